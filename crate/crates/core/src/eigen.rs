//! Symmetric 3x3 eigen-decomposition by cyclic Jacobi rotations.

use crate::cloud::Point3;

/// Convergence threshold on the off-diagonal mass relative to the matrix norm.
pub(crate) const JACOBI_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order with matching unit eigenvectors.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SymmetricEigen {
    pub values: [f64; 3],
    pub vectors: [Point3; 3],
}

pub(crate) fn symmetric_eigen(m: [[f64; 3]; 3]) -> SymmetricEigen {
    let mut a = m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let norm = libm::sqrt(a.iter().flatten().map(|x| x * x).sum::<f64>());

    for _ in 0..MAX_SWEEPS {
        let off = libm::sqrt(2.0 * (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]));
        if off <= JACOBI_TOLERANCE * norm || off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / libm::sqrt(t * t + 1.0);
            let s = t * c;

            // A <- J^T A J with the rotation in the (p, q) plane
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }

    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let column = |j: usize| [v[0][j], v[1][j], v[2][j]];
    SymmetricEigen {
        values: idx.map(|i| a[i][i]),
        vectors: idx.map(column),
    }
}
