//! Geometry quality metrics for point clouds.
//!
//! The crate computes per-point nearest-neighbor errors between an original
//! and a decoded cloud, reduces them with the mean (MPEG D1/D2) or with a
//! ranked order statistic (generalized Hausdorff), pools both directions and
//! converts the result to PSNR. It also carries the pieces needed to
//! evaluate a metric against subjective scores: cubic MOS mapping and
//! PLCC/SROCC/RMSE.
//!
//! The crate is `no_std` with `alloc`. The default `std` feature enables
//! parallel error computation through rayon; results are identical either
//! way.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cloud;
pub mod correlation;
pub mod distortion;
mod eigen;
mod error;
pub mod index;
pub mod metrics;
pub mod normals;
mod par;

pub use cloud::{Point3, PointCloud};
pub use error::{Error, Result};
pub use index::SpatialIndex;
pub use metrics::{
    DirectedErrorSet, DistanceKind, MetricConfig, Pooling, QualityResult, Rank, Reduction,
};
