//! Seeded random inputs for the oracle checks.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::moments::{InputState, OperatorCombo};
use crate::susceptibility::CouplingCoefficients;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in the complex disc of radius `r`.
pub fn disc(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    let radius = r * rng.random::<f64>().sqrt();
    C64::from_polar(radius, rng.random::<f64>() * std::f64::consts::TAU)
}

/// Random couplings with `|κ| z ≤ bound`.
pub fn random_kappas(rng: &mut ChaCha8Rng, n: usize, z: f64, bound: f64) -> CouplingCoefficients {
    let kappa_pr = (0..n).map(|_| disc(rng, bound / z)).collect();
    let kappa_c = (0..n).map(|_| disc(rng, bound / z)).collect();
    CouplingCoefficients { kappa_pr, kappa_c }
}

pub fn random_n(rng: &mut ChaCha8Rng, max: usize) -> usize {
    rng.random_range(1..=max)
}

/// Combination with constant and coefficients in the disc of radius `bound`.
pub fn random_combo(rng: &mut ChaCha8Rng, modes: usize, bound: f64) -> OperatorCombo {
    let mut c = OperatorCombo::zero(modes);
    c.constant = disc(rng, bound);
    for m in 0..modes {
        c.a[m] = disc(rng, bound);
        c.adag[m] = disc(rng, bound);
    }
    c
}

/// Coherent amplitudes in the disc of radius `bound` on every mode.
pub fn random_state(rng: &mut ChaCha8Rng, modes: usize, bound: f64) -> InputState {
    InputState { amplitudes: (0..modes).map(|_| disc(rng, bound)).collect() }
}
