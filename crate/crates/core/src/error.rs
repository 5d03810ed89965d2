use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("non-finite coordinate at point {index}")]
    NonFiniteCoordinate { index: usize },
    #[error("normal count {normals} does not match point count {points}")]
    NormalCountMismatch { points: usize, normals: usize },
    #[error("normal at point {index} is not unit length (norm {norm})")]
    NonUnitNormal { index: usize, norm: f64 },
    #[error("zero-length normal at point {index}")]
    ZeroNormal { index: usize },
    #[error("non-finite query point")]
    NonFiniteQuery,
    #[error("point-to-plane distance requires normals on the reference cloud `{cloud}`")]
    MissingNormals { cloud: String },
    #[error("neighborhood size k={k} must be at least 3 and below the point count {points}")]
    InvalidNeighborhood { k: usize, points: usize },
    #[error("degenerate neighborhood around point {index}: all neighbors coincide")]
    DegenerateNeighborhood { index: usize },
    #[error("percentage {0} is outside (0, 100]")]
    InvalidPercentage(f64),
    #[error("signal peak must be positive and finite, got {0}")]
    InvalidPeak(f64),
    #[error("distance must be non-negative, got {0}")]
    NegativeDistance(f64),
    #[error("invalid distortion parameter: {0}")]
    InvalidDistortion(&'static str),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("non-finite sample value")]
    NonFiniteSample,
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("cubic fit is rank deficient: {distinct} distinct objective values, need 4")]
    RankDeficient { distinct: usize },
    #[error("record `{stimulus}` has no objective score `{label}`")]
    MissingScore { stimulus: String, label: String },
}
