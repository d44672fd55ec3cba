use num_complex::Complex64 as C64;

use super::combo::{InputState, OperatorCombo};
use super::noise::IntensityMoments;
use crate::error::{Error, Result};

/// Largest tolerated coherent-state population in the top levels.
pub const DEFAULT_TAIL_LIMIT: f64 = 1e-10;
const MAX_MODES: usize = 3;
const MAX_ORDER: usize = 4;

/// Brute-force `⟨ψ| F_1 … F_k |ψ⟩` in a truncated Fock space of `dim` levels
/// per mode, with `|ψ⟩` the product of truncated, renormalized coherent
/// states. Operators are applied right to left on the state vector.
///
/// Fails with [`Error::TruncationInsufficient`] if a coherent state puts more
/// than [`DEFAULT_TAIL_LIMIT`] of its population in the levels that the
/// product can push past the cutoff.
pub fn fock_expectation(factors: &[&OperatorCombo], state: &InputState, dim: usize) -> Result<C64> {
    let space = FockSpace::new(state, dim, factors.len())?;
    for f in factors {
        if f.modes() != state.modes() {
            return Err(Error::DimensionMismatch { expected: state.modes(), found: f.modes() });
        }
    }
    let psi = space.coherent(state);
    let mut v = psi.clone();
    for f in factors.iter().rev() {
        v = space.apply(f, &v);
    }
    Ok(psi.iter().zip(&v).map(|(p, x)| p.conj() * x).sum())
}

/// Same moment set as [`super::wick_intensity_moments`], by brute force.
pub fn fock_intensity_moments(
    a: &OperatorCombo,
    b: &OperatorCombo,
    state: &InputState,
    dim: usize,
) -> Result<IntensityMoments> {
    let (ad, bd) = (a.dagger(), b.dagger());
    Ok(IntensityMoments {
        mean_a: fock_expectation(&[&ad, a], state, dim)?,
        mean_b: fock_expectation(&[&bd, b], state, dim)?,
        square_a: fock_expectation(&[&ad, a, &ad, a], state, dim)?,
        square_b: fock_expectation(&[&bd, b, &bd, b], state, dim)?,
        cross_ab: fock_expectation(&[&ad, a, &bd, b], state, dim)?,
        cross_ba: fock_expectation(&[&bd, b, &ad, a], state, dim)?,
    })
}

struct FockSpace {
    modes: usize,
    dim: usize,
    strides: Vec<usize>,
    len: usize,
    sqrt: Vec<f64>,
}

impl FockSpace {
    fn new(state: &InputState, dim: usize, order: usize) -> Result<Self> {
        let modes = state.modes();
        if modes > MAX_MODES {
            return Err(Error::TooManyModes { max: MAX_MODES, found: modes });
        }
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder { order });
        }
        if dim < 2 {
            return Err(Error::TruncationInsufficient { tail_mass: 1.0, limit: DEFAULT_TAIL_LIMIT });
        }
        let reach = dim.saturating_sub(MAX_ORDER);
        for alpha in &state.amplitudes {
            let tail = poisson_tail(alpha.norm_sqr(), reach);
            if tail > DEFAULT_TAIL_LIMIT {
                return Err(Error::TruncationInsufficient { tail_mass: tail, limit: DEFAULT_TAIL_LIMIT });
            }
        }
        let strides: Vec<usize> = (0..modes).map(|m| dim.pow(m as u32)).collect();
        Ok(Self { modes, dim, strides, len: dim.pow(modes as u32), sqrt: (0..dim).map(|n| (n as f64).sqrt()).collect() })
    }

    fn level(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.dim
    }

    fn coherent(&self, state: &InputState) -> Vec<C64> {
        let per_mode: Vec<Vec<C64>> = state
            .amplitudes
            .iter()
            .map(|&alpha| {
                let mut amps = Vec::with_capacity(self.dim);
                let mut c = C64::new(1.0, 0.0);
                for n in 0..self.dim {
                    if n > 0 {
                        c = c * alpha / (n as f64).sqrt();
                    }
                    amps.push(c);
                }
                let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                amps.iter().map(|a| a / norm).collect()
            })
            .collect();
        (0..self.len)
            .map(|idx| (0..self.modes).map(|m| per_mode[m][self.level(idx, m)]).product())
            .collect()
    }

    fn apply(&self, op: &OperatorCombo, v: &[C64]) -> Vec<C64> {
        let mut out: Vec<C64> = v.iter().map(|x| op.constant * x).collect();
        for m in 0..self.modes {
            let stride = self.strides[m];
            let (ca, cad) = (op.a[m], op.adag[m]);
            if ca == C64::new(0.0, 0.0) && cad == C64::new(0.0, 0.0) {
                continue;
            }
            for (idx, &x) in v.iter().enumerate() {
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                let n = self.level(idx, m);
                // a|n⟩ = √n |n-1⟩, a†|n⟩ = √(n+1) |n+1⟩ (dropped at the cutoff).
                if n > 0 {
                    out[idx - stride] += ca * self.sqrt[n] * x;
                }
                if n + 1 < self.dim {
                    out[idx + stride] += cad * self.sqrt[n + 1] * x;
                }
            }
        }
        out
    }
}

/// Population of a coherent state with mean `mean` at levels `>= from`.
fn poisson_tail(mean: f64, from: usize) -> f64 {
    if mean == 0.0 {
        return if from == 0 { 1.0 } else { 0.0 };
    }
    // Sum upward from `from` in log space; terms decay super-exponentially.
    let ln_mean = mean.ln();
    let mut ln_term = -mean + from as f64 * ln_mean - ln_factorial(from);
    let mut total = 0.0;
    for n in from..from + 2000 {
        let term = ln_term.exp();
        total += term;
        if n as f64 > mean && term < 1e-30 * total.max(1e-300) {
            break;
        }
        ln_term += ln_mean - ((n + 1) as f64).ln();
    }
    total
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}
