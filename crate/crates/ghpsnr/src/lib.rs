//! File formats, reports and the command-line front end for `ghpsnr-core`.

pub mod cli;
mod error;
pub mod heatmap;
pub mod mos;
pub mod ply;
pub mod report;

pub use error::{Error, Result};
pub use ghpsnr_core as core;
