//! Directed error sets, their reductions, undirected pooling and PSNR.
//!
//! All distances are squared Euclidean distances in model units. A directed
//! error set holds one value per query point, sorted ascending, so every
//! ranked reduction is a lookup into the same array.

use alloc::vec::Vec;

use crate::cloud::{dot, sub, PointCloud};
use crate::error::{Error, Result};
use crate::index::SpatialIndex;
use crate::par::map_indexed;

/// How a per-point error is measured against its nearest reference point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    /// `|a - b|^2`
    PointToPoint,
    /// `((a - b) . n_b)^2`, with `n_b` the normal of the nearest reference point.
    PointToPlane,
}

/// Which order statistic a generalized Hausdorff reduction picks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rank {
    /// The smallest error, i.e. `per = 100 / N` for each direction's own `N`.
    Minimum,
    /// Percentage of the sorted errors, in `(0, 100]`.
    Percent(f64),
}

impl Rank {
    /// 1-based rank into a set of `n` errors.
    pub fn resolve(self, n: usize) -> usize {
        match self {
            Rank::Minimum => 1,
            Rank::Percent(per) => rank_from_per(per, n),
        }
    }

    /// Percentage this rank stands for in a set of `n` errors.
    pub fn percent(self, n: usize) -> f64 {
        match self {
            Rank::Minimum => 100.0 / n as f64,
            Rank::Percent(per) => per,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reduction {
    /// Mean of all errors (MPEG D1/D2).
    Mse,
    /// Generalized Hausdorff: the K-th smallest error.
    Gh(Rank),
}

/// Combination of the two directed distances into one undirected value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pooling {
    Min,
    Max,
    Avg,
    /// Average weighted by the point count of each direction's query cloud.
    Wavg,
}

impl Pooling {
    pub const ALL: [Pooling; 4] = [Pooling::Min, Pooling::Max, Pooling::Avg, Pooling::Wavg];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    pub kind: DistanceKind,
    pub reduction: Reduction,
    pub pooling: Pooling,
    /// Signal peak `p` of the PSNR, usually `2^precision - 1`.
    pub signal_peak: f64,
}

impl MetricConfig {
    /// MPEG D1 PSNR: point-to-point MSE with max pooling.
    pub fn d1(signal_peak: f64) -> Self {
        Self {
            kind: DistanceKind::PointToPoint,
            reduction: Reduction::Mse,
            pooling: Pooling::Max,
            signal_peak,
        }
    }

    /// MPEG D2 PSNR: point-to-plane MSE with max pooling.
    pub fn d2(signal_peak: f64) -> Self {
        Self {
            kind: DistanceKind::PointToPlane,
            ..Self::d1(signal_peak)
        }
    }

    /// Classical Hausdorff PSNR (`per = 100`, max pooling).
    pub fn hausdorff(kind: DistanceKind, signal_peak: f64) -> Self {
        Self::gh(kind, 100.0, Pooling::Max, signal_peak)
    }

    pub fn gh(kind: DistanceKind, per: f64, pooling: Pooling, signal_peak: f64) -> Self {
        Self {
            kind,
            reduction: Reduction::Gh(Rank::Percent(per)),
            pooling,
            signal_peak,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.signal_peak > 0.0 && self.signal_peak.is_finite()) {
            return Err(Error::InvalidPeak(self.signal_peak));
        }
        if let Reduction::Gh(Rank::Percent(per)) = self.reduction {
            check_per(per)?;
        }
        Ok(())
    }
}

pub(crate) fn check_per(per: f64) -> Result<()> {
    if per > 0.0 && per <= 100.0 {
        Ok(())
    } else {
        Err(Error::InvalidPercentage(per))
    }
}

/// Per-point squared errors from a query cloud toward a reference cloud,
/// sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedErrorSet {
    errors: Vec<f64>,
}

impl DirectedErrorSet {
    /// Sorts `errors`. Rejects empty input and negative or NaN entries.
    pub fn from_errors(mut errors: Vec<f64>) -> Result<Self> {
        if errors.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if let Some(&bad) = errors.iter().find(|e| !(**e >= 0.0)) {
            return Err(Error::NegativeDistance(bad));
        }
        errors.sort_unstable_by(f64::total_cmp);
        Ok(Self { errors })
    }

    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    /// Number of query points `N`.
    pub fn source_size(&self) -> usize {
        self.errors.len()
    }

    pub fn max(&self) -> f64 {
        self.errors[self.errors.len() - 1]
    }

    pub fn min(&self) -> f64 {
        self.errors[0]
    }

    /// The `rank`-th smallest error, 1-based and clamped to `[1, N]`.
    pub fn ranked(&self, rank: usize) -> f64 {
        self.errors[rank.clamp(1, self.errors.len()) - 1]
    }

    pub fn reduce(&self, reduction: Reduction) -> f64 {
        match reduction {
            Reduction::Mse => reduce_mse(self),
            Reduction::Gh(rank) => self.ranked(rank.resolve(self.source_size())),
        }
    }
}

/// Errors of each query point in query order.
///
/// For point-to-plane the reference cloud must carry normals.
pub fn point_errors(
    query: &PointCloud,
    reference: &PointCloud,
    kind: DistanceKind,
    reference_index: &SpatialIndex<'_>,
) -> Result<Vec<f64>> {
    let normals = match kind {
        DistanceKind::PointToPoint => None,
        DistanceKind::PointToPlane => Some(reference.normals().ok_or_else(|| {
            Error::MissingNormals {
                cloud: reference.name().into(),
            }
        })?),
    };
    let q = query.points();
    let r = reference.points();
    map_indexed(q.len(), |i| {
        let nn = reference_index.nearest(&q[i])?;
        Ok(match normals {
            None => nn.squared_distance,
            Some(normals) => {
                let proj = dot(&sub(&q[i], &r[nn.index]), &normals[nn.index]);
                proj * proj
            }
        })
    })
    .into_iter()
    .collect()
}

/// Sorted per-point errors from `query` toward `reference`.
pub fn directed_errors(
    query: &PointCloud,
    reference: &PointCloud,
    kind: DistanceKind,
    reference_index: &SpatialIndex<'_>,
) -> Result<DirectedErrorSet> {
    DirectedErrorSet::from_errors(point_errors(query, reference, kind, reference_index)?)
}

/// Mean of the error set, summed pairwise in a fixed order.
pub fn reduce_mse(s: &DirectedErrorSet) -> f64 {
    pairwise_sum(&s.errors) / s.errors.len() as f64
}

fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        values.iter().sum()
    } else {
        let (a, b) = values.split_at(values.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Rank `K = round(per * n / 100)`, half away from zero, clamped to `[1, n]`.
pub fn rank_from_per(per: f64, n: usize) -> usize {
    let k = libm::round(per * n as f64 / 100.0);
    if k.is_nan() || k < 1.0 {
        1
    } else if k >= n as f64 {
        n.max(1)
    } else {
        k as usize
    }
}

/// The K-th smallest error with `K = rank_from_per(per, N)`.
/// `per = 100` is the classical Hausdorff distance.
pub fn reduce_gh(s: &DirectedErrorSet, per: f64) -> f64 {
    s.ranked(rank_from_per(per, s.source_size()))
}

pub fn pool(d_ab: f64, d_ba: f64, pooling: Pooling, n_a: usize, n_b: usize) -> f64 {
    match pooling {
        Pooling::Min => d_ab.min(d_ba),
        Pooling::Max => d_ab.max(d_ba),
        Pooling::Avg => (d_ab + d_ba) / 2.0,
        Pooling::Wavg => {
            if n_a == n_b {
                return (d_ab + d_ba) / 2.0;
            }
            let (wa, wb) = (n_a as f64, n_b as f64);
            let v = (wa * d_ab + wb * d_ba) / (wa + wb);
            // rounding can step outside the hull of the two inputs
            v.clamp(d_ab.min(d_ba), d_ab.max(d_ba))
        }
    }
}

/// `10 log10(3 p^2 / d)`; zero distance maps to `+inf`.
pub fn psnr(undirected: f64, peak: f64) -> Result<f64> {
    if !(undirected >= 0.0) {
        return Err(Error::NegativeDistance(undirected));
    }
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::InvalidPeak(peak));
    }
    if undirected == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * libm::log10(3.0 * peak * peak / undirected))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityResult {
    /// Reduced original -> decoded distance.
    pub directed_ab: f64,
    /// Reduced decoded -> original distance.
    pub directed_ba: f64,
    pub undirected: f64,
    /// May be `+inf` for a lossless pair.
    pub psnr_db: f64,
    pub config: MetricConfig,
}

/// Both directed error sets of an (original, decoded) pair for one kind.
///
/// Computing the sets is the expensive step; every reduction and pooling is
/// then evaluated from them without further neighbor searches.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedPair {
    pub kind: DistanceKind,
    /// original -> decoded, measured against decoded normals for point-to-plane.
    pub ab: DirectedErrorSet,
    /// decoded -> original, measured against original normals for point-to-plane.
    pub ba: DirectedErrorSet,
}

impl DirectedPair {
    pub fn compute(original: &PointCloud, decoded: &PointCloud, kind: DistanceKind) -> Result<Self> {
        let original_index = SpatialIndex::build(original);
        let decoded_index = SpatialIndex::build(decoded);
        Self::with_indices(original, &original_index, decoded, &decoded_index, kind)
    }

    pub fn with_indices(
        original: &PointCloud,
        original_index: &SpatialIndex<'_>,
        decoded: &PointCloud,
        decoded_index: &SpatialIndex<'_>,
        kind: DistanceKind,
    ) -> Result<Self> {
        Ok(Self {
            kind,
            ab: directed_errors(original, decoded, kind, decoded_index)?,
            ba: directed_errors(decoded, original, kind, original_index)?,
        })
    }

    /// Reduces, pools and converts to PSNR. `config.kind` must match the pair.
    pub fn evaluate(&self, config: &MetricConfig) -> Result<QualityResult> {
        config.validate()?;
        debug_assert_eq!(config.kind, self.kind);
        let directed_ab = self.ab.reduce(config.reduction);
        let directed_ba = self.ba.reduce(config.reduction);
        let undirected = pool(
            directed_ab,
            directed_ba,
            config.pooling,
            self.ab.source_size(),
            self.ba.source_size(),
        );
        Ok(QualityResult {
            directed_ab,
            directed_ba,
            undirected,
            psnr_db: psnr(undirected, config.signal_peak)?,
            config: *config,
        })
    }
}

/// Computes one metric between an original and a decoded cloud.
///
/// MSE with max pooling is MPEG D1 (point-to-point) or D2 (point-to-plane).
/// Point-to-plane needs normals on both clouds; see
/// [`crate::normals::estimate_normals`].
pub fn compute_metric(
    original: &PointCloud,
    decoded: &PointCloud,
    config: &MetricConfig,
) -> Result<QualityResult> {
    config.validate()?;
    DirectedPair::compute(original, decoded, config.kind)?.evaluate(config)
}

/// The default rank list: the minimum, then 50, 60, 65, ..., 95, 96, ..., 100.
pub fn default_per_grid() -> Vec<Rank> {
    let mut grid = alloc::vec![Rank::Minimum];
    grid.extend(
        [
            50.0, 60.0, 65.0, 70.0, 75.0, 80.0, 85.0, 90.0, 95.0, 96.0, 97.0, 98.0, 99.0, 100.0,
        ]
        .map(Rank::Percent),
    );
    grid
}

/// Every (kind, rank, pooling) combination plus one MSE/max baseline per kind.
///
/// For each kind the baseline comes first, then ranks in order with poolings
/// nested inside. Error sets are computed once per kind.
pub fn metric_grid(
    original: &PointCloud,
    decoded: &PointCloud,
    kinds: &[DistanceKind],
    ranks: &[Rank],
    poolings: &[Pooling],
    signal_peak: f64,
) -> Result<Vec<QualityResult>> {
    if ranks.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let original_index = SpatialIndex::build(original);
    let decoded_index = SpatialIndex::build(decoded);
    let mut results = Vec::with_capacity(kinds.len() * (ranks.len() * poolings.len() + 1));
    for &kind in kinds {
        let pair =
            DirectedPair::with_indices(original, &original_index, decoded, &decoded_index, kind)?;
        results.push(pair.evaluate(&MetricConfig {
            kind,
            reduction: Reduction::Mse,
            pooling: Pooling::Max,
            signal_peak,
        })?);
        for &rank in ranks {
            for &pooling in poolings {
                results.push(pair.evaluate(&MetricConfig {
                    kind,
                    reduction: Reduction::Gh(rank),
                    pooling,
                    signal_peak,
                })?);
            }
        }
    }
    Ok(results)
}

/// `(per, K-th ranked error)` for each percentage.
pub fn distance_profile(s: &DirectedErrorSet, per_grid: &[f64]) -> Vec<(f64, f64)> {
    per_grid.iter().map(|&per| (per, reduce_gh(s, per))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn set(v: &[f64]) -> DirectedErrorSet {
        DirectedErrorSet::from_errors(v.to_vec()).unwrap()
    }

    fn two_by_two() -> (PointCloud, PointCloud) {
        (
            PointCloud::new("A", vec![[0.0; 3], [1.0, 0.0, 0.0]]).unwrap(),
            PointCloud::new("B", vec![[0.0; 3], [3.0, 0.0, 0.0]]).unwrap(),
        )
    }

    #[test]
    fn directed_hand_example() {
        let (a, b) = two_by_two();
        let pair = DirectedPair::compute(&a, &b, DistanceKind::PointToPoint).unwrap();
        assert_eq!(pair.ab.errors(), &[0.0, 1.0]);
        assert_eq!(pair.ba.errors(), &[0.0, 4.0]);
        assert_eq!(reduce_mse(&pair.ab), 0.5);
        assert_eq!(reduce_mse(&pair.ba), 2.0);
    }

    #[test]
    fn identical_clouds_have_zero_errors() {
        let (a, _) = two_by_two();
        let pair = DirectedPair::compute(&a, &a, DistanceKind::PointToPoint).unwrap();
        assert!(pair.ab.errors().iter().all(|&e| e == 0.0));
        assert_eq!(reduce_mse(&pair.ab), 0.0);
    }

    #[test]
    fn plane_error_orthogonal_to_normal_vanishes() {
        let q = PointCloud::new("q", vec![[1.0, 1.0, 0.0]]).unwrap();
        let r = PointCloud::new("r", vec![[0.0; 3]])
            .unwrap()
            .with_normals(vec![[0.0, 0.0, 1.0]])
            .unwrap();
        let idx = SpatialIndex::build(&r);
        let s = directed_errors(&q, &r, DistanceKind::PointToPlane, &idx).unwrap();
        assert_eq!(s.errors(), &[0.0]);
    }

    #[test]
    fn plane_without_normals_fails() {
        let (a, b) = two_by_two();
        let idx = SpatialIndex::build(&b);
        assert_eq!(
            directed_errors(&a, &b, DistanceKind::PointToPlane, &idx),
            Err(Error::MissingNormals { cloud: "B".into() })
        );
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_from_per(80.0, 600), 480);
        assert_eq!(rank_from_per(100.0, 1), 1);
        assert_eq!(rank_from_per(100.0, 12345), 12345);
        assert_eq!(rank_from_per(100.0 / 37.0, 37), 1);
        // half away from zero: 2.5 -> 3
        assert_eq!(rank_from_per(50.0, 5), 3);
        assert_eq!(rank_from_per(1e-9, 10), 1);
    }

    #[test]
    fn gh_examples() {
        let s = set(&[9.0, 0.0, 4.0, 1.0]);
        assert_eq!(reduce_gh(&s, 100.0), 9.0);
        assert_eq!(reduce_gh(&s, 75.0), 4.0);
        assert_eq!(reduce_gh(&s, 25.0), 0.0);
        assert_eq!(s.reduce(Reduction::Gh(Rank::Minimum)), 0.0);
        assert_eq!(
            distance_profile(&s, &[25.0, 50.0, 75.0, 100.0]),
            vec![(25.0, 0.0), (50.0, 1.0), (75.0, 4.0), (100.0, 9.0)]
        );
    }

    #[test]
    fn constant_profile_is_flat() {
        let s = set(&[2.0; 17]);
        assert!(distance_profile(&s, &[1.0, 50.0, 100.0])
            .iter()
            .all(|&(_, v)| v == 2.0));
    }

    #[test]
    fn pooling_examples() {
        assert_eq!(pool(0.5, 2.0, Pooling::Max, 2, 2), 2.0);
        assert_eq!(pool(0.5, 2.0, Pooling::Min, 2, 2), 0.5);
        assert_eq!(pool(0.5, 2.0, Pooling::Avg, 2, 2), 1.25);
        assert_eq!(pool(0.5, 2.0, Pooling::Wavg, 2, 2), 1.25);
        assert_eq!(pool(0.5, 2.0, Pooling::Wavg, 3, 1), 0.875);
        for p in Pooling::ALL {
            assert_eq!(pool(0.7, 0.7, p, 3, 11), 0.7);
        }
    }

    #[test]
    fn psnr_examples() {
        assert_eq!(psnr(3.0 * 4.0, 2.0).unwrap(), 0.0);
        let v = psnr(1.0, 1023.0).unwrap();
        // 10 log10(3 * 1023^2) = 10 log10(3139587), evaluated independently
        assert!((v - 64.968_725_221_439_83).abs() < 1e-9, "{v}");
        assert_eq!(psnr(0.0, 1.0).unwrap(), f64::INFINITY);
        assert_eq!(psnr(-1.0, 1.0), Err(Error::NegativeDistance(-1.0)));
        assert_eq!(psnr(1.0, 0.0), Err(Error::InvalidPeak(0.0)));
    }

    #[test]
    fn d1_chain_on_hand_example() {
        let (a, b) = two_by_two();
        let r = compute_metric(&a, &b, &MetricConfig::d1(1.0)).unwrap();
        assert_eq!((r.directed_ab, r.directed_ba, r.undirected), (0.5, 2.0, 2.0));
        assert!((r.psnr_db - 10.0 * libm::log10(1.5)).abs() < 1e-12);
    }

    #[test]
    fn identical_clouds_are_infinite_for_every_config() {
        let (a, _) = two_by_two();
        let grid = metric_grid(
            &a,
            &a,
            &[DistanceKind::PointToPoint],
            &default_per_grid(),
            &Pooling::ALL,
            1.0,
        )
        .unwrap();
        assert_eq!(grid.len(), 15 * 4 + 1);
        assert!(grid.iter().all(|r| r.psnr_db == f64::INFINITY));
    }

    #[test]
    fn config_validation() {
        let bad = MetricConfig::gh(DistanceKind::PointToPoint, 0.0, Pooling::Max, 1.0);
        assert_eq!(bad.validate(), Err(Error::InvalidPercentage(0.0)));
        let bad = MetricConfig::gh(DistanceKind::PointToPoint, 100.5, Pooling::Max, 1.0);
        assert!(bad.validate().is_err());
        assert_eq!(MetricConfig::d1(-1.0).validate(), Err(Error::InvalidPeak(-1.0)));
    }

    #[test]
    fn error_set_rejects_negative() {
        assert_eq!(
            DirectedErrorSet::from_errors(vec![1.0, -0.5]),
            Err(Error::NegativeDistance(-0.5))
        );
        assert_eq!(DirectedErrorSet::from_errors(vec![]), Err(Error::EmptyCloud));
    }

    proptest! {
        #[test]
        fn gh_is_monotone_with_exact_bounds(v in prop::collection::vec(0.0f64..1e6, 1..300)) {
            let s = set(&v);
            let n = s.source_size();
            prop_assert_eq!(reduce_gh(&s, 100.0), v.iter().cloned().fold(f64::MIN, f64::max));
            prop_assert_eq!(reduce_gh(&s, 100.0 / n as f64), v.iter().cloned().fold(f64::MAX, f64::min));
            let mut prev = f64::NEG_INFINITY;
            for per in (1..=1000).map(|i| f64::from(i) / 10.0) {
                let g = reduce_gh(&s, per);
                prop_assert!(g >= prev);
                prev = g;
            }
        }

        #[test]
        fn pooling_is_bracketed(a in 0.0f64..1e8, b in 0.0f64..1e8, na in 1usize..1_000_000, nb in 1usize..1_000_000) {
            let (lo, hi) = (pool(a, b, Pooling::Min, na, nb), pool(a, b, Pooling::Max, na, nb));
            for p in [Pooling::Avg, Pooling::Wavg] {
                let v = pool(a, b, p, na, nb);
                prop_assert!(lo <= v && v <= hi);
            }
            prop_assert_eq!(pool(a, b, Pooling::Wavg, na, na), pool(a, b, Pooling::Avg, na, na));
        }

        #[test]
        fn psnr_strictly_decreasing(d in 1e-6f64..1e6, f in 1.0001f64..100.0, p in 1.0f64..5000.0) {
            prop_assert!(psnr(d, p).unwrap() > psnr(d * f, p).unwrap());
        }
    }
}
