use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::constants::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::modes::ModeGrid;
use crate::propagation::TransferMatrix;

/// Field-operator normalization `e = sqrt(ħω³ / (ε0 π² c³))`.
pub fn field_factor(omega: f64) -> f64 {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    (HBAR * omega.powi(3) / (EPSILON_0 * pi2 * SPEED_OF_LIGHT.powi(3))).sqrt()
}

/// How field operators are scaled relative to the mode operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// `Ê = â`. The convention of the two-mode closed form; used for the
    /// noise figure so that an uncoupled coherent probe sits exactly at the
    /// shot-noise limit.
    Unit,
    /// `Ê = e(ω) â` with [`field_factor`].
    Field,
}

impl Normalization {
    pub fn factor(self, omega: f64) -> f64 {
        match self {
            Normalization::Unit => 1.0,
            Normalization::Field => field_factor(omega),
        }
    }
}

/// Product input state: coherent amplitude per mode. The physical case is a
/// coherent probe (mode 0) with every conjugate in vacuum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputState {
    pub amplitudes: Vec<C64>,
}

impl InputState {
    pub fn probe_coherent(eta: C64, modes: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); modes.max(1)];
        amplitudes[0] = eta;
        Self { amplitudes }
    }

    /// Coherent probe with real amplitude `sqrt(N_pr)`.
    pub fn from_photon_number(n_pr: f64, modes: usize) -> Self {
        Self::probe_coherent(C64::new(n_pr.sqrt(), 0.0), modes)
    }

    pub fn modes(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn eta(&self) -> C64 {
        self.amplitudes[0]
    }
}

/// `constant + Σ_m (a[m] â_m + adag[m] â_m†)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorCombo {
    pub constant: C64,
    pub a: Vec<C64>,
    pub adag: Vec<C64>,
}

impl OperatorCombo {
    pub fn zero(modes: usize) -> Self {
        Self { constant: C64::new(0.0, 0.0), a: vec![C64::new(0.0, 0.0); modes], adag: vec![C64::new(0.0, 0.0); modes] }
    }

    /// `coeff · â_m`.
    pub fn annihilation(modes: usize, m: usize, coeff: C64) -> Self {
        let mut c = Self::zero(modes);
        c.a[m] = coeff;
        c
    }

    /// `coeff · â_m†`.
    pub fn creation(modes: usize, m: usize, coeff: C64) -> Self {
        let mut c = Self::zero(modes);
        c.adag[m] = coeff;
        c
    }

    pub fn modes(&self) -> usize {
        self.a.len()
    }

    pub fn dagger(&self) -> Self {
        Self {
            constant: self.constant.conj(),
            a: self.adag.iter().map(|c| c.conj()).collect(),
            adag: self.a.iter().map(|c| c.conj()).collect(),
        }
    }

    /// Substitutes `â_m → α_m + â_m`, leaving an operator whose moments are
    /// taken on vacuum.
    pub fn displaced(&self, state: &InputState) -> Self {
        let shift: C64 = self
            .a
            .iter()
            .zip(&self.adag)
            .zip(&state.amplitudes)
            .map(|((&a, &ad), &alpha)| a * alpha + ad * alpha.conj())
            .sum();
        Self { constant: self.constant + shift, ..self.clone() }
    }
}

/// Output field operators after propagation. `probe` is `Ê_pr(z)`;
/// `conjugate_dag[k]` is `Ê_ck†(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFields {
    pub probe: OperatorCombo,
    pub conjugate_dag: Vec<OperatorCombo>,
}

impl OutputFields {
    pub fn probe_dag(&self) -> OperatorCombo {
        self.probe.dagger()
    }

    pub fn conjugate(&self, k: usize) -> OperatorCombo {
        self.conjugate_dag[k].dagger()
    }

    pub fn num_conjugates(&self) -> usize {
        self.conjugate_dag.len()
    }
}

/// Input-output relations:
///
/// ```text
/// Ê_pr(z)  = T[0,0] Ê_pr(0) + Σ_j T[0,j] Ê_cj†(0)
/// Ê_ck†(z) = T[k,0] Ê_pr(0) + Σ_j T[k,j] Ê_cj†(0)
/// ```
///
/// with `Ê_pr(0) = e_pr â_pr` and `Ê_cj†(0) = e_cj â_cj†`.
pub fn output_operator_combos(t: &TransferMatrix, grid: &ModeGrid, normalization: Normalization) -> Result<OutputFields> {
    let dim = grid.dimension();
    if t.dimension() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: t.dimension() });
    }
    let e: Vec<f64> = (0..dim).map(|m| normalization.factor(grid.omega(m))).collect();
    let row = |r: usize| {
        let mut combo = OperatorCombo::zero(dim);
        combo.a[0] = t.entry(r, 0) * e[0];
        for j in 1..dim {
            combo.adag[j] = t.entry(r, j) * e[j];
        }
        combo
    };
    Ok(OutputFields { probe: row(0), conjugate_dag: (1..dim).map(row).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::build_mode_grid;
    use crate::params::fixtures::operating_point;
    use crate::propagation::{assemble_hmxw, transfer_analytic};
    use crate::susceptibility::CouplingCoefficients;
    use proptest::prelude::*;

    #[test]
    fn identity_transfer_leaves_probe_unchanged() {
        let grid = build_mode_grid(&operating_point()).unwrap();
        let t = TransferMatrix::identity(grid.dimension());
        let out = output_operator_combos(&t, &grid, Normalization::Field).unwrap();
        let e_pr = field_factor(grid.omega_pr);
        assert_eq!(out.probe, OperatorCombo::annihilation(grid.dimension(), 0, C64::new(e_pr, 0.0)));
        for k in 0..out.num_conjugates() {
            let e_c = field_factor(grid.channels[k].omega_c);
            assert_eq!(out.conjugate_dag[k], OperatorCombo::creation(grid.dimension(), k + 1, C64::new(e_c, 0.0)));
        }
    }

    #[test]
    fn two_mode_coefficients() {
        let mut cfg = operating_point();
        cfg.channel_orders = vec![14];
        let grid = build_mode_grid(&cfg).unwrap();
        let (kp, kc) = (C64::new(-50.0, 1.0), C64::new(300.0, -4.0));
        let h = assemble_hmxw(&CouplingCoefficients { kappa_pr: vec![kp], kappa_c: vec![kc] }).unwrap();
        let z = cfg.cell_length;
        let t = transfer_analytic(&h, z);
        let out = output_operator_combos(&t, &grid, Normalization::Field).unwrap();
        let root = (kc.conj() * kp).sqrt();
        let (zeta, g) = (z * root, kp / root);
        let e_pr = field_factor(grid.omega_pr);
        let e_c = field_factor(grid.channels[0].omega_c);
        assert!((out.probe.a[0] - zeta.cosh() * e_pr).norm() < 1e-12 * e_pr);
        assert!((out.probe.adag[1] - g * zeta.sinh() * e_c).norm() < 1e-12 * e_c);
        assert_eq!(out.probe.adag[0], C64::new(0.0, 0.0));
        assert_eq!(out.probe.a[1], C64::new(0.0, 0.0));
    }

    #[test]
    fn field_factor_magnitude() {
        // e² = ħω³/(ε0π²c³) at ω = 1.5e16 rad/s.
        let omega: f64 = 1.5e16;
        let want = 1.054571817e-34 * omega.powi(3) / (8.8541878128e-12 * std::f64::consts::PI.powi(2) * 299792458f64.powi(3));
        assert!((field_factor(omega).powi(2) / want - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let grid = build_mode_grid(&operating_point()).unwrap();
        let t = TransferMatrix::identity(2);
        assert!(matches!(output_operator_combos(&t, &grid, Normalization::Unit), Err(Error::DimensionMismatch { .. })));
    }

    proptest! {
        #[test]
        fn dagger_is_an_involution(
            parts in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 7)
        ) {
            let c: Vec<C64> = parts.iter().map(|&(r, i)| C64::new(r, i)).collect();
            let combo = OperatorCombo { constant: c[0], a: c[1..4].to_vec(), adag: c[4..7].to_vec() };
            prop_assert_eq!(combo.dagger().dagger(), combo);
        }
    }
}
