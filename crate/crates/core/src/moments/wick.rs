use num_complex::Complex64 as C64;

use super::combo::{InputState, OperatorCombo};
use super::noise::IntensityMoments;
use crate::error::{Error, Result};

const MAX_ORDER: usize = 4;

/// `⟨F_1 F_2 … F_k⟩` (ordered product, `k ≤ 4`) on a coherent product state.
///
/// Each factor is displaced, `F = c + L` with `L` linear in the vacuum
/// fluctuation operators. Expanding the product, every factor contributes
/// either its constant or its `L`; the `L`s are paired with the only
/// nonzero ordered vacuum contraction `⟨ã_m ã_n†⟩ = δ_mn`.
pub fn wick_moment(factors: &[&OperatorCombo], state: &InputState) -> Result<C64> {
    if factors.len() > MAX_ORDER {
        return Err(Error::UnsupportedOrder { order: factors.len() });
    }
    for f in factors {
        if f.modes() != state.modes() {
            return Err(Error::DimensionMismatch { expected: state.modes(), found: f.modes() });
        }
    }
    let displaced: Vec<OperatorCombo> = factors.iter().map(|f| f.displaced(state)).collect();
    let refs: Vec<&OperatorCombo> = displaced.iter().collect();
    Ok(expand(&refs))
}

/// `⟨L_i L_j⟩` for `i` left of `j`: only `ã_m` (from `L_i`) against `ã_m†`
/// (from `L_j`) survives.
fn contraction(left: &OperatorCombo, right: &OperatorCombo) -> C64 {
    left.a.iter().zip(&right.adag).map(|(&x, &y)| x * y).sum()
}

fn expand(factors: &[&OperatorCombo]) -> C64 {
    let Some((first, rest)) = factors.split_first() else {
        return C64::new(1.0, 0.0);
    };
    let mut total = first.constant * expand(rest);
    for j in 0..rest.len() {
        let pair = contraction(first, rest[j]);
        if pair == C64::new(0.0, 0.0) {
            continue;
        }
        let remaining: Vec<&OperatorCombo> =
            rest.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &f)| f).collect();
        total += pair * expand(&remaining);
    }
    total
}

/// First and second intensity moments of the pair `(A, B)` with
/// `I_A = A†A`, `I_B = B†B`.
pub fn wick_intensity_moments(a: &OperatorCombo, b: &OperatorCombo, state: &InputState) -> Result<IntensityMoments> {
    let (ad, bd) = (a.dagger(), b.dagger());
    Ok(IntensityMoments {
        mean_a: wick_moment(&[&ad, a], state)?,
        mean_b: wick_moment(&[&bd, b], state)?,
        square_a: wick_moment(&[&ad, a, &ad, a], state)?,
        square_b: wick_moment(&[&bd, b, &bd, b], state)?,
        cross_ab: wick_moment(&[&ad, a, &bd, b], state)?,
        cross_ba: wick_moment(&[&bd, b, &ad, a], state)?,
    })
}

/// `Var(A†A - B†B)` without forming the second moments, which cancel to
/// about `N·ε` relative at large photon number.
///
/// With `A = α + a`, `B = β + b` after displacement, the centred difference
/// is `ℓ + (q - ⟨q⟩)` with `ℓ = α* a + α a† - β* b - β b†` and
/// `q = a†a - b†b`. Cross terms carry an odd number of vacuum operators and
/// vanish, leaving `⟨ℓℓ⟩ + ⟨qq⟩ - ⟨q⟩²`.
pub fn wick_difference_variance(a: &OperatorCombo, b: &OperatorCombo, state: &InputState) -> Result<(C64, f64)> {
    for f in [a, b] {
        if f.modes() != state.modes() {
            return Err(Error::DimensionMismatch { expected: state.modes(), found: f.modes() });
        }
    }
    let vacuum = InputState { amplitudes: vec![C64::new(0.0, 0.0); state.modes()] };
    let centred = |f: &OperatorCombo| {
        let d = f.displaced(state);
        let alpha = d.constant;
        (alpha, OperatorCombo { constant: C64::new(0.0, 0.0), ..d })
    };
    let (alpha, a0) = centred(a);
    let (beta, b0) = centred(b);
    let (a0d, b0d) = (a0.dagger(), b0.dagger());
    let mut lin = OperatorCombo::zero(state.modes());
    for m in 0..state.modes() {
        lin.a[m] = alpha.conj() * a0.a[m] + alpha * a0d.a[m] - beta.conj() * b0.a[m] - beta * b0d.a[m];
        lin.adag[m] = alpha.conj() * a0.adag[m] + alpha * a0d.adag[m] - beta.conj() * b0.adag[m] - beta * b0d.adag[m];
    }
    let linear = expand(&[&lin, &lin]);
    let quad = wick_intensity_moments(&a0, &b0, &vacuum)?;
    let scale = linear.norm().max(quad.difference_variance().norm());
    Ok((linear + quad.difference_variance(), scale))
}
