use num_complex::Complex64 as C64;

use super::{CMatrix, CouplingMatrix, TransferMatrix, TransferMethod};

/// Classical RK4 integration of `i dV/dz = H V` from `V(0) = I`.
///
/// Independent of the other two routes; global error is `O(h⁴)`.
pub fn transfer_ode_oracle(h: &CouplingMatrix, z: f64, steps: usize) -> TransferMatrix {
    let steps = steps.max(1);
    let dim = h.dimension();
    let a = h.matrix() * C64::new(0.0, -1.0);
    let step = C64::from(z / steps as f64);
    let half = step / 2.0;
    let two = C64::from(2.0);
    let mut v = CMatrix::identity(dim, dim);
    for _ in 0..steps {
        let k1 = &a * &v;
        let k2 = &a * (&v + &k1 * half);
        let k3 = &a * (&v + &k2 * half);
        let k4 = &a * (&v + &k3 * step);
        v += (k1 + k2 * two + k3 * two + k4) * (step / 6.0);
    }
    TransferMatrix { matrix: v, method: TransferMethod::Ode, condition: 1.0 }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::*;
    use super::*;

    #[test]
    fn zero_length_is_identity() {
        let kap = random_kappas(&mut rng(2), 3, 1.0, 3.0);
        let t = transfer_ode_oracle(&assemble_hmxw(&kap).unwrap(), 0.0, 10);
        assert_eq!(t.matrix, CMatrix::identity(4, 4));
    }

    #[test]
    fn fourth_order_convergence() {
        let mut r = rng(13);
        let kap = random_kappas(&mut r, 3, 1.0, 3.0);
        let h = assemble_hmxw(&kap).unwrap();
        let exact = transfer_analytic(&h, 1.0).matrix;
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| relative_difference(&transfer_ode_oracle(&h, 1.0, n).matrix, &exact))
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 4.0).abs() < 0.2, "order {order}, errors {errs:?}");
        }
    }

    #[test]
    fn two_mode_closed_form_with_ten_thousand_steps() {
        let kap = CouplingCoefficients { kappa_pr: vec![C64::new(-120.0, 3.0)], kappa_c: vec![C64::new(800.0, -2.0)] };
        let h = assemble_hmxw(&kap).unwrap();
        let z = 2e-3;
        let t = transfer_ode_oracle(&h, z, 10_000);
        let root = (kap.kappa_c[0].conj() * kap.kappa_pr[0]).sqrt();
        let zeta = z * root;
        let g = kap.kappa_pr[0] / root;
        assert!((t.entry(0, 0) - zeta.cosh()).norm() < 1e-8);
        assert!((t.entry(0, 1) - g * zeta.sinh()).norm() < 1e-8);
        assert!((t.entry(1, 0) - zeta.sinh() / g).norm() < 1e-8);
        assert!((t.entry(1, 1) - zeta.cosh()).norm() < 1e-8);
    }
}
