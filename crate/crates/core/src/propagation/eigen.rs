use nalgebra::linalg::Schur;
use num_complex::Complex64 as C64;

use super::{CMatrix, CouplingMatrix, TransferMatrix, TransferMethod};
use crate::error::{Error, Result};

/// Eigenvector-matrix condition number above which the eigen route refuses.
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e8;

/// Eigenvalues closer than this (relative to `‖H‖_F`) share one eigenspace.
const CLUSTER_TOLERANCE: f64 = 1e-8;
/// Largest admissible singular value of `H - λI` on a claimed eigenspace.
const NULL_SPACE_TOLERANCE: f64 = 1e-6;

/// `T(z) = M exp(-iΛz) M⁻¹` from the eigendecomposition `H = M Λ M⁻¹`.
///
/// Eigenvalues come from a complex Schur form. Each cluster of (numerically)
/// repeated eigenvalues gets an orthonormal eigenspace basis from the SVD
/// null space of `H - λI`; a cluster whose null space is too small marks `H`
/// as defective. The arrow matrix has eigenvalue 0 with multiplicity `N-1`,
/// so this matters for every `N > 1`.
pub fn transfer_eigen(h: &CouplingMatrix, z: f64, condition_limit: f64) -> Result<TransferMatrix> {
    let dim = h.dimension();
    let m = h.matrix();
    let scale = m.norm();
    if scale == 0.0 {
        return Ok(TransferMatrix { matrix: CMatrix::identity(dim, dim), method: TransferMethod::Eigen, condition: 1.0 });
    }

    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::DefectiveMatrix { condition: f64::INFINITY })?;
    let (_, upper) = schur.unpack();
    let eigenvalues: Vec<C64> = (0..dim).map(|i| upper[(i, i)]).collect();

    let mut assigned = vec![false; dim];
    let mut vectors = CMatrix::zeros(dim, dim);
    let mut lambdas = Vec::with_capacity(dim);
    let mut col = 0;
    for i in 0..dim {
        if assigned[i] {
            continue;
        }
        let members: Vec<usize> = (i..dim)
            .filter(|&j| !assigned[j] && (eigenvalues[j] - eigenvalues[i]).norm() <= CLUSTER_TOLERANCE * scale)
            .collect();
        for &j in &members {
            assigned[j] = true;
        }
        let k = members.len();
        let center = members.iter().map(|&j| eigenvalues[j]).sum::<C64>() / k as f64;

        let shifted = m - CMatrix::identity(dim, dim) * center;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.as_ref().ok_or(Error::DefectiveMatrix { condition: f64::INFINITY })?;
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let worst = svd.singular_values[order[k - 1]];
        if worst > NULL_SPACE_TOLERANCE * scale {
            return Err(Error::DefectiveMatrix { condition: f64::INFINITY });
        }
        for &idx in &order[..k] {
            let v = v_t.row(idx).adjoint();
            vectors.set_column(col, &v);
            lambdas.push(center);
            col += 1;
        }
    }

    let sv = vectors.clone().svd(false, false).singular_values;
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= condition_limit) {
        return Err(Error::DefectiveMatrix { condition });
    }
    let inverse = vectors.clone().try_inverse().ok_or(Error::DefectiveMatrix { condition })?;

    let phase = C64::new(0.0, -z);
    let mut scaled = vectors;
    for (j, lambda) in lambdas.iter().enumerate() {
        let factor = (phase * lambda).exp();
        for r in 0..dim {
            scaled[(r, j)] *= factor;
        }
    }
    Ok(TransferMatrix { matrix: scaled * inverse, method: TransferMethod::Eigen, condition })
}
