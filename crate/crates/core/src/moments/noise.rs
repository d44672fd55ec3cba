use num_complex::Complex64 as C64;
use serde::Serialize;

use super::combo::{InputState, OutputFields};
use super::wick::{wick_difference_variance, wick_intensity_moments};
use crate::error::{Error, Result};
use crate::propagation::arrow_functions;

/// Tolerated imaginary residue of a variance, relative to its largest term.
const REALNESS_TOLERANCE: f64 = 1e-10;

/// `⟨I_a⟩, ⟨I_b⟩, ⟨I_a²⟩, ⟨I_b²⟩, ⟨I_a I_b⟩, ⟨I_b I_a⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntensityMoments {
    pub mean_a: C64,
    pub mean_b: C64,
    pub square_a: C64,
    pub square_b: C64,
    pub cross_ab: C64,
    pub cross_ba: C64,
}

impl IntensityMoments {
    /// `Var(I_a - I_b)` as a complex number, before the realness check.
    pub fn difference_variance(&self) -> C64 {
        (self.square_a - self.mean_a * self.mean_a) + (self.square_b - self.mean_b * self.mean_b)
            - self.cross_ab
            - self.cross_ba
            + 2.0 * self.mean_a * self.mean_b
    }

    fn scale(&self) -> f64 {
        [self.square_a, self.square_b, self.cross_ab, self.cross_ba, self.mean_a * self.mean_a, self.mean_b * self.mean_b]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Largest absolute deviation between two moment sets.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        [
            self.mean_a - other.mean_a,
            self.mean_b - other.mean_b,
            self.square_a - other.square_a,
            self.square_b - other.square_b,
            self.cross_ab - other.cross_ab,
            self.cross_ba - other.cross_ba,
        ]
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
    }

    /// Real variance, or [`Error::NonRealVariance`].
    pub fn real_variance(&self) -> Result<f64> {
        let var = self.difference_variance();
        check_real(var, self.scale())
    }

    /// `⟨I_a⟩ + ⟨I_b⟩`.
    pub fn shot_noise_variance(&self) -> Result<f64> {
        let snl = self.mean_a + self.mean_b;
        check_real(snl, self.mean_a.norm().max(self.mean_b.norm()))
    }
}

fn check_real(value: C64, scale: f64) -> Result<f64> {
    if value.im.abs() > REALNESS_TOLERANCE * scale.max(value.re.abs()) {
        return Err(Error::NonRealVariance { real: value.re, imag: value.im });
    }
    Ok(value.re)
}

/// Moments of `(I_pr, I_ck)` for conjugate `k` (0-based).
fn pair_moments(fields: &OutputFields, k: usize, state: &InputState) -> Result<IntensityMoments> {
    if k >= fields.num_conjugates() {
        return Err(Error::DimensionMismatch { expected: fields.num_conjugates(), found: k + 1 });
    }
    wick_intensity_moments(&fields.probe, &fields.conjugate(k), state)
}

/// `Var[I_pr(z) - I_ck(z)]`, all expectation values by Wick contraction.
pub fn variance_relative_intensity(fields: &OutputFields, k: usize, state: &InputState) -> Result<f64> {
    if k >= fields.num_conjugates() {
        return Err(Error::DimensionMismatch { expected: fields.num_conjugates(), found: k + 1 });
    }
    let (var, scale) = wick_difference_variance(&fields.probe, &fields.conjugate(k), state)?;
    check_real(var, scale)
}

/// Shot-noise reference `⟨I_pr(z)⟩ + ⟨I_ck(z)⟩`.
pub fn variance_snl(fields: &OutputFields, k: usize, state: &InputState) -> Result<f64> {
    pair_moments(fields, k, state)?.shot_noise_variance()
}

/// `log10(var / var_snl)`; negative means relative-intensity squeezing.
pub fn noise_figure(var: f64, var_snl: f64) -> Result<f64> {
    if !(var_snl > 0.0) {
        return Err(Error::ZeroSnl);
    }
    Ok((var / var_snl).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoModeResult {
    pub var: f64,
    pub var_snl: f64,
    pub snf: f64,
}

/// Single probe / single conjugate closed form with
/// `g = sqrt(κ_pr/κ_ck*)`, `ζ = z sqrt(κ_ck* κ_pr)`:
///
/// ```text
/// Var_SNL = |g sinhζ|² + |g⁻¹ sinhζ|² + (|coshζ|² + |g⁻¹ sinhζ|²) N
/// Var     = [|coshζ|⁴ + (|g|² - |g|⁻²)|coshζ sinhζ|² - 2Re(cosh²ζ sinh²ζ*) + |g⁻¹ sinhζ|⁴] N
///           + (|g|² + |g|⁻²)|coshζ sinhζ|² - 2Re(cosh²ζ sinh²ζ*)
/// ```
///
/// Evaluated through `g sinhζ = κ_pr z sinhζ/ζ` and
/// `g⁻¹ sinhζ = κ_ck* z sinhζ/ζ`, which are free of square-root branches
/// and finite when either coupling vanishes.
pub fn two_mode_analytic(kappa_pr: C64, kappa_ck: C64, z: f64, n_pr: f64) -> TwoModeResult {
    let zeta_sq = kappa_ck.conj() * kappa_pr * (z * z);
    let (sinhc, coshm1_over_sq) = arrow_functions(zeta_sq);
    let cosh = 1.0 + zeta_sq * coshm1_over_sq;
    let g_sinh = kappa_pr * z * sinhc;
    let ginv_sinh = kappa_ck.conj() * z * sinhc;
    let sinh_sq = g_sinh * ginv_sinh;

    let c2 = cosh.norm_sqr();
    let gs2 = g_sinh.norm_sqr();
    let gis2 = ginv_sinh.norm_sqr();
    let interference = 2.0 * (cosh * cosh * sinh_sq.conj()).re;

    let var_snl = gs2 + gis2 + (c2 + gis2) * n_pr;
    let var = (c2 * c2 + c2 * gs2 - c2 * gis2 - interference + gis2 * gis2) * n_pr + c2 * gs2 + c2 * gis2 - interference;
    let snf = if var_snl > 0.0 { (var / var_snl).log10() } else { f64::NAN };
    TwoModeResult { var, var_snl, snf }
}

/// Squeezing figures for one probe/conjugate pair.
///
/// `var`, `var_snl`, `snf_*` and the photon-number means use
/// [`super::Normalization::Unit`]; `mean_i_pr`/`mean_i_ck` are the
/// field-normalized intensities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezeReport {
    pub k: usize,
    pub n: u32,
    pub omega_c_over_pu: f64,
    pub mean_i_pr: f64,
    pub mean_i_ck: f64,
    pub photons_pr: f64,
    pub photons_ck: f64,
    pub var: f64,
    pub var_snl: f64,
    pub snf_log10: f64,
    pub snf_db: f64,
    pub two_mode_snf_log10: f64,
    pub symplectic_residual: f64,
    pub solver_delta: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::build_mode_grid;
    use crate::moments::{output_operator_combos, Normalization};
    use crate::params::fixtures::operating_point;
    use crate::propagation::{assemble_hmxw, transfer_analytic, TransferMatrix};
    use crate::susceptibility::CouplingCoefficients;

    /// Direct evaluation with explicit g and ζ, used as a reference for
    /// the branch-free form.
    fn literal(kp: C64, kc: C64, z: f64, n: f64) -> (f64, f64) {
        let g = (kp / kc.conj()).sqrt();
        let zeta = z * (kc.conj() * kp).sqrt();
        let (ch, sh) = (zeta.cosh(), zeta.sinh());
        let g2 = g.norm_sqr();
        let snl = (g * sh).norm_sqr() + (sh / g).norm_sqr() + (ch.norm_sqr() + (sh / g).norm_sqr()) * n;
        let cross = ch * ch * sh.conj() * sh.conj() + ch.conj() * ch.conj() * sh * sh;
        let var = (ch.norm_sqr().powi(2) + (g2 - 1.0 / g2) * (ch * sh).norm_sqr() - cross.re + (sh / g).norm_sqr().powi(2)) * n
            + (g2 + 1.0 / g2) * (ch * sh).norm_sqr()
            - cross.re;
        (var, snl)
    }

    #[test]
    fn branch_free_form_matches_literal() {
        let cases = [
            (C64::new(-120.0, 3.0), C64::new(800.0, -2.0), 2e-3, 1e4),
            (C64::new(0.3, 0.9), C64::new(-0.4, 0.2), 1.0, 10.0),
            (C64::new(2.0, 0.0), C64::new(0.5, 0.0), 0.8, 1.0),
        ];
        for (kp, kc, z, n) in cases {
            let r = two_mode_analytic(kp, kc, z, n);
            let (var, snl) = literal(kp, kc, z, n);
            assert!((r.var / var - 1.0).abs() < 1e-11, "{} vs {var}", r.var);
            assert!((r.var_snl / snl - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_zeta_is_shot_noise() {
        let r = two_mode_analytic(C64::new(0.0, 0.0), C64::new(0.0, 0.0), 1.0, 1e4);
        assert_eq!((r.var, r.var_snl, r.snf), (1e4, 1e4, 0.0));
    }

    #[test]
    fn unit_g_gives_var_equal_to_photon_number() {
        // g = 1, ζ = 1: var = N, var_snl = 2 sinh²1 + (cosh²1 + sinh²1) N.
        let kap = C64::new(1.0, 0.0);
        let r = two_mode_analytic(kap, kap, 1.0, 100.0);
        assert!((r.var - 100.0).abs() < 1e-10);
        let (c, s) = (1f64.cosh(), 1f64.sinh());
        let snl = 2.0 * s * s + (c * c + s * s) * 100.0;
        assert!((r.var_snl - snl).abs() < 1e-10);
        assert!((r.snf - (100.0 / snl).log10()).abs() < 1e-14);
        assert!((r.snf + 0.578).abs() < 1e-3);
    }

    #[test]
    fn variance_grows_with_g_at_fixed_zeta() {
        // ζ fixed at 0.5 real; |g| = kp/kc-ratio.
        let mut last = f64::NEG_INFINITY;
        for g in [1.0, 1.5, 2.0, 4.0, 8.0] {
            let kp = C64::new(0.5 * g, 0.0);
            let kc = C64::new(0.5 / g, 0.0);
            let r = two_mode_analytic(kp, kc, 1.0, 1e3);
            assert!(r.var > last);
            last = r.var;
        }
    }

    #[test]
    fn noise_figure_basics() {
        assert_eq!(noise_figure(3.0, 3.0).unwrap(), 0.0);
        assert!((noise_figure(1.0, 10.0).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(noise_figure(1.0, 0.0), Err(Error::ZeroSnl)));
    }

    #[test]
    fn identity_transfer_is_pure_probe_shot_noise() {
        let grid = build_mode_grid(&operating_point()).unwrap();
        let t = TransferMatrix::identity(grid.dimension());
        let eta = C64::new(3.0, 4.0);
        let state = InputState::probe_coherent(eta, grid.dimension());
        let field = output_operator_combos(&t, &grid, Normalization::Field).unwrap();
        let e_pr = crate::moments::field_factor(grid.omega_pr);
        let var = variance_relative_intensity(&field, 0, &state).unwrap();
        assert!((var / (e_pr.powi(4) * 25.0) - 1.0).abs() < 1e-12);
        let snl = variance_snl(&field, 0, &state).unwrap();
        assert!((snl / (e_pr.powi(2) * 25.0) - 1.0).abs() < 1e-12);
        let unit = output_operator_combos(&t, &grid, Normalization::Unit).unwrap();
        let var = variance_relative_intensity(&unit, 0, &state).unwrap();
        let snl = variance_snl(&unit, 0, &state).unwrap();
        assert!((var - 25.0).abs() < 1e-12 && (snl - 25.0).abs() < 1e-12);
        assert_eq!(noise_figure(var, snl).unwrap(), 0.0);
    }

    #[test]
    fn unit_g_multimode_reduction() {
        let mut cfg = operating_point();
        cfg.channel_orders = vec![14];
        let grid = build_mode_grid(&cfg).unwrap();
        let kap = C64::new(300.0, 0.0);
        let h = assemble_hmxw(&CouplingCoefficients { kappa_pr: vec![kap], kappa_c: vec![kap] }).unwrap();
        let t = transfer_analytic(&h, cfg.cell_length);
        let fields = output_operator_combos(&t, &grid, Normalization::Unit).unwrap();
        let state = InputState::from_photon_number(1e4, 2);
        let var = variance_relative_intensity(&fields, 0, &state).unwrap();
        assert!((var / 1e4 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn conjugate_index_out_of_range() {
        let grid = build_mode_grid(&operating_point()).unwrap();
        let t = TransferMatrix::identity(grid.dimension());
        let fields = output_operator_combos(&t, &grid, Normalization::Unit).unwrap();
        let state = InputState::from_photon_number(1.0, grid.dimension());
        assert!(variance_snl(&fields, 99, &state).is_err());
    }
}
