//! Per-point normal estimation from local covariance.

use alloc::vec::Vec;

use crate::cloud::{Point3, PointCloud};
use crate::eigen::{symmetric_eigen, JACOBI_TOLERANCE};
use crate::error::{Error, Result};
use crate::index::SpatialIndex;
use crate::par::map_indexed;

pub const DEFAULT_NEIGHBORS: usize = 12;

/// Returns `cloud` with a unit normal per point.
///
/// Each normal is the eigenvector of the smallest eigenvalue of the
/// covariance of the point's `k` nearest neighbors (the point itself
/// excluded). Orientation is not propagated; the sign is canonicalized so
/// the largest-magnitude component is positive. A cloud that already has
/// normals is returned unchanged.
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<PointCloud> {
    if cloud.normals().is_some() {
        return Ok(cloud.clone());
    }
    let n = cloud.len();
    if k < 3 || k >= n {
        return Err(Error::InvalidNeighborhood { k, points: n });
    }
    let index = SpatialIndex::build(cloud);
    let points = cloud.points();
    let normals = map_indexed(n, |i| {
        let neighbors = index.nearest_k(&points[i], k, Some(i))?;
        let hood: Vec<Point3> = neighbors.iter().map(|nb| points[nb.index]).collect();
        normal_of(&hood).ok_or(Error::DegenerateNeighborhood { index: i })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    cloud.clone().with_normals(normals)
}

/// Smallest-variance direction of a neighborhood, or `None` when every
/// point coincides.
pub(crate) fn normal_of(hood: &[Point3]) -> Option<Point3> {
    let count = hood.len() as f64;
    let mut centroid = [0.0; 3];
    for p in hood {
        for a in 0..3 {
            centroid[a] += p[a];
        }
    }
    centroid = centroid.map(|c| c / count);

    let mut cov = [[0.0; 3]; 3];
    let mut scale: f64 = 0.0;
    for p in hood {
        let d = [p[0] - centroid[0], p[1] - centroid[1], p[2] - centroid[2]];
        for r in 0..3 {
            scale = scale.max(p[r].abs());
            for c in 0..3 {
                cov[r][c] += d[r] * d[c];
            }
        }
    }
    for row in cov.iter_mut() {
        for v in row.iter_mut() {
            *v /= count;
        }
    }

    let trace = cov[0][0] + cov[1][1] + cov[2][2];
    let floor = 64.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    if !(trace > floor * floor) {
        return None;
    }

    let eig = symmetric_eigen(cov);
    let tie = JACOBI_TOLERANCE * eig.values[2].abs();
    // isotropic case: lexicographically smallest canonical eigenvector
    let chosen = eig
        .vectors
        .iter()
        .zip(eig.values.iter())
        .filter(|(_, &v)| v - eig.values[0] <= tie)
        .map(|(vec, _)| canonical_sign(*vec))
        .min_by(|a, b| {
            a[0].total_cmp(&b[0])
                .then(a[1].total_cmp(&b[1]))
                .then(a[2].total_cmp(&b[2]))
        })?;
    crate::cloud::normalize(chosen)
}

fn canonical_sign(v: Point3) -> Point3 {
    let mut axis = 0;
    for a in 1..3 {
        if v[a].abs() > v[axis].abs() {
            axis = a;
        }
    }
    if v[axis] < 0.0 {
        v.map(|c| -c)
    } else {
        v
    }
}
