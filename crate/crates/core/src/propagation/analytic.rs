use num_complex::Complex64 as C64;

use super::{CMatrix, CouplingMatrix, TransferMatrix, TransferMethod};

/// Below this `|w|` the entire functions are summed as power series.
const SERIES_RADIUS: f64 = 1.0;
const SERIES_TERMS: usize = 24;

/// `sinh(√w)/√w` and `(cosh(√w) - 1)/w`, both entire in `w`, so the branch
/// of the square root never matters.
pub(crate) fn arrow_functions(w: C64) -> (C64, C64) {
    if w.norm() <= SERIES_RADIUS {
        // Σ w^k/(2k+1)!  and  Σ w^k/(2k+2)!
        let mut f1 = C64::new(0.0, 0.0);
        let mut f2 = C64::new(0.0, 0.0);
        let mut power = C64::new(1.0, 0.0);
        let mut fact = 1.0; // (2k+1)!
        for k in 0..SERIES_TERMS {
            f1 += power / fact;
            f2 += power / (fact * (2 * k + 2) as f64);
            fact *= ((2 * k + 2) * (2 * k + 3)) as f64;
            power *= w;
        }
        (f1, f2)
    } else {
        let x = w.sqrt();
        (x.sinh() / x, (x.cosh() - 1.0) / w)
    }
}

/// Closed-form propagator for an arrow matrix.
///
/// With `H³ = sH` the exponential series collapses to
/// `exp(tH) = I + t f1(st²) H + t² f2(st²) H²`, `t = -iz`. Exact for any
/// `s`, including the nilpotent case `s = 0`.
pub fn transfer_analytic(h: &CouplingMatrix, z: f64) -> TransferMatrix {
    let dim = h.dimension();
    let t = C64::new(0.0, -z);
    let s = h.arrow_parameter();
    let (f1, f2) = arrow_functions(s * t * t);
    let m = h.matrix();
    let h2 = m * m;
    let matrix = CMatrix::identity(dim, dim) + m * (t * f1) + h2 * (t * t * f2);
    TransferMatrix { matrix, method: TransferMethod::Analytic, condition: 1.0 }
}
