//! Seeded, codec-like geometric distortions.
//!
//! These stand in for real codecs when exercising the metrics: octree
//! pruning (uniform quantization to leaf centers), Gaussian jitter, and
//! sparse outliers that produce a heavy error tail. Every random draw comes
//! from a ChaCha8 stream seeded with the caller's `u64`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};

use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};

/// Deepest supported octree; leaf coordinates must fit in 21 bits each.
pub const MAX_OCTREE_DEPTH: u32 = 21;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistortionKind {
    OctreePrune { depth: u32 },
    GaussianJitter { sigma: f64 },
    OutlierInject { fraction: f64, magnitude: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionSpec {
    pub kind: DistortionKind,
    pub seed: u64,
}

impl DistortionSpec {
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DistortionKind::OctreePrune { depth } => {
                if depth == 0 || depth > MAX_OCTREE_DEPTH {
                    return Err(Error::InvalidDistortion("octree depth must be in 1..=21"));
                }
            }
            DistortionKind::GaussianJitter { sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidDistortion("sigma must be positive"));
                }
            }
            DistortionKind::OutlierInject {
                fraction,
                magnitude,
            } => {
                if !(fraction > 0.0 && fraction < 1.0) {
                    return Err(Error::InvalidDistortion("fraction must be in (0, 1)"));
                }
                if !(magnitude > 0.0 && magnitude.is_finite()) {
                    return Err(Error::InvalidDistortion("magnitude must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, cloud: &PointCloud) -> Result<PointCloud> {
        self.validate()?;
        match self.kind {
            DistortionKind::OctreePrune { depth } => octree_prune(cloud, depth),
            DistortionKind::GaussianJitter { sigma } => gaussian_jitter(cloud, sigma, self.seed),
            DistortionKind::OutlierInject {
                fraction,
                magnitude,
            } => inject_outliers(cloud, fraction, magnitude, self.seed),
        }
    }
}

/// Bounding cube of a cloud: the tight box grown to a cube about its center.
/// Returns `(min corner, side)`.
pub fn bounding_cube(points: &[Point3]) -> (Point3, f64) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let side = (0..3).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
    let corner = [0, 1, 2].map(|a| (lo[a] + hi[a]) / 2.0 - side / 2.0);
    (corner, side)
}

/// Replaces every point by the center of its octree leaf at `depth` and
/// drops duplicates, keeping first-occurrence order. Normals are dropped.
pub fn octree_prune(cloud: &PointCloud, depth: u32) -> Result<PointCloud> {
    if depth == 0 || depth > MAX_OCTREE_DEPTH {
        return Err(Error::InvalidDistortion("octree depth must be in 1..=21"));
    }
    let name = format!("{}_octree{}", cloud.name(), depth);
    let (corner, side) = bounding_cube(cloud.points());
    if side == 0.0 {
        return Ok(PointCloud::new(name, alloc::vec![cloud.points()[0]])?
            .with_precision_bits(cloud.precision_bits()));
    }
    let cells = 1u64 << depth;
    let leaf = side / cells as f64;

    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for p in cloud.points() {
        let key = [0, 1, 2].map(|a| {
            let c = libm::floor((p[a] - corner[a]) / leaf);
            (c.max(0.0) as u64).min(cells - 1)
        });
        let code = (key[0] << 42) | (key[1] << 21) | key[2];
        seen.entry(code).or_insert_with(|| {
            out.push([0, 1, 2].map(|a| corner[a] + (key[a] as f64 + 0.5) * leaf));
        });
    }
    Ok(PointCloud::new(name, out)?.with_precision_bits(cloud.precision_bits()))
}

/// Adds i.i.d. `N(0, sigma^2)` offsets to every coordinate.
pub fn gaussian_jitter(cloud: &PointCloud, sigma: f64, seed: u64) -> Result<PointCloud> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidDistortion("sigma must be positive"));
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|_| Error::InvalidDistortion("sigma must be positive"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = cloud
        .points()
        .iter()
        .map(|p| p.map(|c| c + normal.sample(&mut rng)))
        .collect();
    Ok(PointCloud::new(format!("{}_jitter", cloud.name()), points)?
        .with_precision_bits(cloud.precision_bits()))
}

/// Number of points [`inject_outliers`] moves.
pub fn outlier_count(fraction: f64, n: usize) -> usize {
    libm::ceil(fraction * n as f64) as usize
}

/// Moves `ceil(fraction * N)` distinct points, chosen uniformly, by
/// `magnitude` along independent uniformly random directions.
/// Normals, if any, are kept as they were.
pub fn inject_outliers(
    cloud: &PointCloud,
    fraction: f64,
    magnitude: f64,
    seed: u64,
) -> Result<PointCloud> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidDistortion("fraction must be in (0, 1)"));
    }
    if !(magnitude > 0.0 && magnitude.is_finite()) {
        return Err(Error::InvalidDistortion("magnitude must be positive"));
    }
    let n = cloud.len();
    let count = outlier_count(fraction, n);
    if count == 0 || count > n {
        return Err(Error::InvalidDistortion("fraction selects no points"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = sample(&mut rng, n, count).into_vec();
    chosen.sort_unstable();

    let mut points = cloud.points().to_vec();
    for i in chosen {
        let dir: [f64; 3] = UnitSphere.sample(&mut rng);
        for a in 0..3 {
            points[i][a] += magnitude * dir[a];
        }
    }
    let mut out = PointCloud::new(format!("{}_outliers", cloud.name()), points)?
        .with_precision_bits(cloud.precision_bits());
    if let Some(normals) = cloud.normals() {
        out = out.with_normals(normals.to_vec())?;
    }
    Ok(out)
}
