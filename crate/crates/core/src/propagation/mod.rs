//! Coupled-mode propagation `i dv/dz = H v` for `v = (E_pr, E_c1†, …, E_cN†)`.
//!
//! Three independent routes to `T(z) = exp(-iHz)`: eigendecomposition,
//! the closed form that follows from the arrow identity `H³ = sH`, and
//! fixed-step RK4 integration used as an oracle.

mod analytic;
mod eigen;
mod ode;

pub use analytic::transfer_analytic;
pub(crate) use analytic::arrow_functions;
pub use eigen::{transfer_eigen, DEFAULT_CONDITION_LIMIT};
pub use ode::transfer_ode_oracle;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::ModeGrid;
use crate::susceptibility::CouplingCoefficients;

pub type CMatrix = DMatrix<C64>;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// The `(N+1)×(N+1)` coupling matrix: row 0 is `(0, iκ_pr(ω_c1), …)`,
/// column 0 is `(0, iκ_c1*, …)ᵀ`, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    matrix: CMatrix,
}

impl CouplingMatrix {
    /// Wraps an existing matrix after checking the arrow structure.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let dim = matrix.nrows();
        for r in 0..dim {
            for c in 0..dim {
                let off_arrow = (r > 0 && c > 0) || r == c;
                if off_arrow && matrix[(r, c)] != C64::new(0.0, 0.0) {
                    return Err(Error::NotArrowMatrix { row: r, col: c });
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// `s` in `H³ = sH`: `Σ_j H[0,j] H[j,0] = -Σ_j κ_pr,j κ_c,j*`.
    pub fn arrow_parameter(&self) -> C64 {
        (1..self.dimension()).map(|j| self.matrix[(0, j)] * self.matrix[(j, 0)]).sum()
    }

    pub fn norm_max(&self) -> f64 {
        max_abs(&self.matrix)
    }
}

/// Builds `H_mxw` from per-channel couplings.
pub fn assemble_hmxw(kappas: &CouplingCoefficients) -> Result<CouplingMatrix> {
    if kappas.kappa_pr.len() != kappas.kappa_c.len() {
        return Err(Error::DimensionMismatch { expected: kappas.kappa_pr.len(), found: kappas.kappa_c.len() });
    }
    let n = kappas.len();
    let mut m = CMatrix::zeros(n + 1, n + 1);
    for j in 0..n {
        m[(0, j + 1)] = I * kappas.kappa_pr[j];
        m[(j + 1, 0)] = I * kappas.kappa_c[j].conj();
    }
    Ok(CouplingMatrix { matrix: m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransferMethod {
    Eigen,
    Analytic,
    Ode,
}

impl std::fmt::Display for TransferMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TransferMethod::Eigen => "eigen",
            TransferMethod::Analytic => "analytic",
            TransferMethod::Ode => "ode",
        })
    }
}

/// `T(z)` together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub matrix: CMatrix,
    pub method: TransferMethod,
    /// Eigenvector condition number for the eigen route, 1 otherwise.
    pub condition: f64,
}

impl TransferMatrix {
    pub fn identity(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim), method: TransferMethod::Analytic, condition: 1.0 }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }
}

/// Number of RK4 steps used when the ODE route is selected as the solver.
pub const DEFAULT_ODE_STEPS: usize = 10_000;

/// Dispatches to one of the three routes.
pub fn transfer(h: &CouplingMatrix, z: f64, method: TransferMethod, condition_limit: f64) -> Result<TransferMatrix> {
    match method {
        TransferMethod::Eigen => transfer_eigen(h, z, condition_limit),
        TransferMethod::Analytic => Ok(transfer_analytic(h, z)),
        TransferMethod::Ode => Ok(transfer_ode_oracle(h, z, DEFAULT_ODE_STEPS)),
    }
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// `max|A - B| / max|B|`, the matrix-relative entrywise deviation.
pub fn relative_difference(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = max_abs(b);
    let diff = max_abs(&(a - b));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Commutator-preservation diagnostic.
///
/// Converts `T` to the annihilation-operator basis with
/// `D = diag(ω_m^{3/2})`, `S = D⁻¹ T D`, and returns `max|S η S† - η|` for
/// `η = diag(1, -1, …, -1)`. Zero for an exact Bogoliubov transformation.
pub fn symplectic_residual(t: &TransferMatrix, grid: &ModeGrid) -> Result<f64> {
    let dim = t.dimension();
    if dim != grid.dimension() {
        return Err(Error::DimensionMismatch { expected: grid.dimension(), found: dim });
    }
    // Normalize to the probe frequency to keep the scale factors O(1).
    let d: Vec<f64> = (0..dim).map(|m| (grid.omega(m) / grid.omega_pr).powf(1.5)).collect();
    let s = CMatrix::from_fn(dim, dim, |r, c| t.matrix[(r, c)] * (d[c] / d[r]));
    let eta = CMatrix::from_fn(dim, dim, |r, c| match (r == c, r) {
        (true, 0) => C64::new(1.0, 0.0),
        (true, _) => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 0.0),
    });
    let product = &s * &eta * s.adjoint();
    Ok(max_abs(&(product - eta)))
}
