//! Output Wigner distribution.
//!
//! With `ζ = (α_pr, β_c1*, …, β_cN*)` the output Wigner function is the
//! input Gaussian (coherent probe `η`, vacuum conjugates) pulled back through
//! the propagator, `w = T⁻¹ ζ - η e_0`:
//!
//! ```text
//! W(α, β) = C exp(-2 Σ_r |w_r|²)
//! ```
//!
//! Pulling back through `T` itself instead of `T⁻¹` would squeeze the wrong
//! quadrature combination and put the coherent peak at `T⁻¹η` rather than
//! at `α = T[0,0] η`.
//!
//! Coordinates are `u = (Re α, Im α, Re β_1, Im β_1, …)`; quadratures are
//! `x = √2 Re`, `p = √2 Im`. `C` is fixed analytically so that `W`
//! integrates to one over `d²α d²β_1 ⋯`, which gives the vacuum peak
//! `(2/π)^(N+1)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagation::{CMatrix, TransferMatrix};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
/// `|det R|` below this counts as a degenerate Gaussian.
const SINGULAR_DETERMINANT: f64 = 1e-300;

/// Quadratures of every mode: index 0 is the probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraturePoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl QuadraturePoint {
    pub fn origin(modes: usize) -> Self {
        Self { x: vec![0.0; modes], p: vec![0.0; modes] }
    }

    pub fn modes(&self) -> usize {
        self.x.len()
    }

    /// Complex amplitude `(x + ip)/√2` of mode `m`.
    pub fn amplitude(&self, m: usize) -> C64 {
        C64::new(self.x[m], self.p[m]) / SQRT_2
    }

    fn coordinates(&self) -> DVector<f64> {
        DVector::from_fn(2 * self.modes(), |i, _| if i % 2 == 0 { self.x[i / 2] } else { self.p[i / 2] } / SQRT_2)
    }
}

/// The Gaussian `C exp(-2 ‖R u - d‖²)`.
#[derive(Debug, Clone)]
pub struct OutputWigner {
    r: DMatrix<f64>,
    d: DVector<f64>,
    normalization: f64,
}

impl OutputWigner {
    pub fn new(t: &TransferMatrix, eta: C64) -> Result<Self> {
        let inverse = t.matrix.clone().try_inverse().ok_or(Error::SingularQuadraticForm)?;
        let r = real_map(&inverse);
        let modes = t.dimension();
        let det = r.clone().determinant().abs();
        if !(det > SINGULAR_DETERMINANT) || !det.is_finite() {
            return Err(Error::SingularQuadraticForm);
        }
        let mut d = DVector::zeros(2 * modes);
        d[0] = eta.re;
        d[1] = eta.im;
        let normalization = (2.0 / std::f64::consts::PI).powi(modes as i32) * det;
        Ok(Self { r, d, normalization })
    }

    pub fn modes(&self) -> usize {
        self.d.len() / 2
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn evaluate(&self, point: &QuadraturePoint) -> Result<f64> {
        if point.modes() != self.modes() {
            return Err(Error::DimensionMismatch { expected: self.modes(), found: point.modes() });
        }
        let w = &self.r * point.coordinates() - &self.d;
        Ok(self.normalization * (-2.0 * w.norm_squared()).exp())
    }

    /// Location of the maximum, as quadratures.
    pub fn peak(&self) -> Result<QuadraturePoint> {
        let u = self.r.clone().lu().solve(&self.d).ok_or(Error::SingularQuadraticForm)?;
        let modes = self.modes();
        Ok(QuadraturePoint {
            x: (0..modes).map(|m| SQRT_2 * u[2 * m]).collect(),
            p: (0..modes).map(|m| SQRT_2 * u[2 * m + 1]).collect(),
        })
    }

    /// Quadratic form restricted to `(x_pr, x_ck)` with every other
    /// quadrature held at `fixed`: `W = C exp(-2 ‖B s + b‖²)`, `s = (x_pr, x_ck)`.
    pub fn slice(&self, k: usize, fixed: &QuadraturePoint) -> Result<WignerSlice> {
        let modes = self.modes();
        if k == 0 || k >= modes || fixed.modes() != modes {
            return Err(Error::DimensionMismatch { expected: modes, found: k.max(fixed.modes()) });
        }
        let mut base = fixed.clone();
        base.x[0] = 0.0;
        base.x[k] = 0.0;
        let b = &self.r * base.coordinates() - &self.d;
        let mut bm = DMatrix::zeros(2 * modes, 2);
        for row in 0..2 * modes {
            bm[(row, 0)] = self.r[(row, 0)] / SQRT_2;
            bm[(row, 1)] = self.r[(row, 2 * k)] / SQRT_2;
        }
        Ok(WignerSlice { b: bm, offset: b, normalization: self.normalization })
    }

    /// Second moments in `u` coordinates: `(RᵀR)⁻¹ / 4`.
    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        let form = self.r.transpose() * &self.r;
        let inv = form.try_inverse().ok_or(Error::SingularQuadraticForm)?;
        Ok(inv / 4.0)
    }
}

/// `w = M ζ` as a real `2M×2M` map acting on `u`. Conjugate amplitudes enter
/// conjugated, so their imaginary column flips sign.
fn real_map(m: &CMatrix) -> DMatrix<f64> {
    let modes = m.nrows();
    let mut r = DMatrix::zeros(2 * modes, 2 * modes);
    for row in 0..modes {
        for col in 0..modes {
            let c = m[(row, col)];
            let sigma = if col == 0 { 1.0 } else { -1.0 };
            r[(2 * row, 2 * col)] = c.re;
            r[(2 * row, 2 * col + 1)] = -c.im * sigma;
            r[(2 * row + 1, 2 * col)] = c.im;
            r[(2 * row + 1, 2 * col + 1)] = c.re * sigma;
        }
    }
    r
}

/// `W` on the `(x_pr, x_ck)` plane.
#[derive(Debug, Clone)]
pub struct WignerSlice {
    b: DMatrix<f64>,
    offset: DVector<f64>,
    normalization: f64,
}

impl WignerSlice {
    pub fn evaluate(&self, x_pr: f64, x_ck: f64) -> f64 {
        let s = DVector::from_vec(vec![x_pr, x_ck]);
        let w = &self.b * s + &self.offset;
        self.normalization * (-2.0 * w.norm_squared()).exp()
    }

    /// 2×2 matrix `BᵀB` of the slice exponent `-2 (s - s0)ᵀ BᵀB (s - s0) + const`.
    pub fn form(&self) -> DMatrix<f64> {
        self.b.transpose() * &self.b
    }

    /// Closed-form `∫∫ W dx_pr dx_ck` over the plane.
    pub fn integral(&self) -> Result<f64> {
        let form = self.form();
        let det = form.determinant();
        if !(det > 0.0) {
            return Err(Error::SingularQuadraticForm);
        }
        let inv = form.clone().try_inverse().ok_or(Error::SingularQuadraticForm)?;
        let bt_off = self.b.transpose() * &self.offset;
        let residual = self.offset.norm_squared() - (bt_off.transpose() * inv * &bt_off)[(0, 0)];
        Ok(self.normalization * std::f64::consts::PI / (2.0 * det.sqrt()) * (-2.0 * residual).exp())
    }

    /// Principal directions (unit vectors in the `(x_pr, x_ck)` plane) and
    /// the corresponding 1/e half-widths of `W`, narrowest first.
    pub fn principal_axes(&self) -> [([f64; 2], f64); 2] {
        let eig = SymmetricEigen::new(self.form());
        let mut axes: Vec<([f64; 2], f64)> = (0..2)
            .map(|i| {
                let v = eig.eigenvectors.column(i);
                ([v[0], v[1]], 1.0 / (2.0 * eig.eigenvalues[i]).sqrt())
            })
            .collect();
        axes.sort_by(|a, b| a.1.total_cmp(&b.1));
        [axes[0], axes[1]]
    }
}

/// `W(α, β)` at one phase-space point.
pub fn wigner_output(point: &QuadraturePoint, t: &TransferMatrix, eta: C64) -> Result<f64> {
    OutputWigner::new(t, eta)?.evaluate(point)
}

/// Wigner second moments in `(Re, Im)` coordinates per mode.
pub fn wigner_covariance(t: &TransferMatrix) -> Result<DMatrix<f64>> {
    OutputWigner::new(t, C64::new(0.0, 0.0))?.covariance()
}

/// Variance of `Σ_m (cx_m x_m + cp_m p_m)` from a `u`-coordinate covariance.
pub fn quadrature_variance(cov: &DMatrix<f64>, cx: &[f64], cp: &[f64]) -> f64 {
    let n = cov.nrows();
    let c = DVector::from_fn(n, |i, _| SQRT_2 * if i % 2 == 0 { cx[i / 2] } else { cp[i / 2] });
    (c.transpose() * cov * &c)[(0, 0)]
}

/// Smallest symplectic eigenvalue of a `u`-coordinate covariance. The
/// uncertainty principle requires at least 1/4 in these units.
pub fn min_symplectic_eigenvalue(cov: &DMatrix<f64>) -> Result<f64> {
    let n = cov.nrows();
    let eig = SymmetricEigen::new(cov.clone());
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::SingularQuadraticForm);
    }
    let sqrt_cov = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * eig.eigenvectors.transpose();
    let mut omega = DMatrix::<C64>::zeros(n, n);
    for m in 0..n / 2 {
        omega[(2 * m, 2 * m + 1)] = C64::new(0.0, 1.0);
        omega[(2 * m + 1, 2 * m)] = C64::new(0.0, -1.0);
    }
    let sc = sqrt_cov.map(|v| C64::new(v, 0.0));
    let herm = &sc * omega * &sc;
    let values = SymmetricEigen::new(herm).eigenvalues;
    Ok(values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min))
}

/// Axis description of a 2D slice grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceAxes {
    pub x_pr: (f64, f64),
    pub x_ck: (f64, f64),
    pub samples: (usize, usize),
}

/// `W` sampled on `(x_pr, x_ck)`; `values[i][j]` is at `(x_pr[i], x_ck[j])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerGrid {
    pub conjugate: usize,
    pub x_pr: Vec<f64>,
    pub x_ck: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub normalization: f64,
    pub analytic_slice_integral: f64,
}

impl WignerGrid {
    /// Trapezoidal `∫∫ W dx_pr dx_ck` over the sampled rectangle.
    pub fn trapezoid_integral(&self) -> f64 {
        let h1 = (self.x_pr[self.x_pr.len() - 1] - self.x_pr[0]) / (self.x_pr.len() - 1) as f64;
        let h2 = (self.x_ck[self.x_ck.len() - 1] - self.x_ck[0]) / (self.x_ck.len() - 1) as f64;
        let weight = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let (n1, n2) = (self.x_pr.len(), self.x_ck.len());
        let mut total = 0.0;
        for i in 0..n1 {
            for j in 0..n2 {
                total += weight(i, n1) * weight(j, n2) * self.values[i][j];
            }
        }
        total * h1 * h2
    }
}

fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64).collect()
}

/// Samples `W(x_pr, x_ck)` for conjugate `k` (1-based mode index) with the
/// other quadratures at `fixed`. Rows are evaluated in parallel.
pub fn wigner_slice_2d(
    k: usize,
    fixed: &QuadraturePoint,
    axes: &SliceAxes,
    t: &TransferMatrix,
    eta: C64,
) -> Result<WignerGrid> {
    if axes.samples.0 < 2 || axes.samples.1 < 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: axes.samples.0.min(axes.samples.1) });
    }
    let gaussian = OutputWigner::new(t, eta)?;
    let slice = gaussian.slice(k, fixed)?;
    let x_pr = linspace(axes.x_pr, axes.samples.0);
    let x_ck = linspace(axes.x_ck, axes.samples.1);
    let values: Vec<Vec<f64>> =
        x_pr.par_iter().map(|&a| x_ck.iter().map(|&b| slice.evaluate(a, b)).collect()).collect();
    Ok(WignerGrid {
        conjugate: k,
        x_pr,
        x_ck,
        values,
        normalization: gaussian.normalization(),
        analytic_slice_integral: slice.integral()?,
    })
}
