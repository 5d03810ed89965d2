//! Per-point error heatmaps as colored PLY.
//!
//! Colors follow a linear ramp over `[0, max error]`: blue at zero, green at
//! half the maximum, red at the maximum. The raw error is written as a
//! `double` property named `error`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ghpsnr_core::PointCloud;

use crate::error::{Error, Result};
use crate::ply::{write_vertices, Encoding, ExtraColumn, ScalarType};

/// Maps `t` in `[0, 1]` onto the blue-green-red ramp.
pub fn ramp_color(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t <= 0.5 {
        (0.0, 2.0 * t, 1.0 - 2.0 * t)
    } else {
        (2.0 * t - 1.0, 2.0 - 2.0 * t, 0.0)
    };
    [r, g, b].map(|c| (c * 255.0).round() as u8)
}

/// Ramp colors for a set of errors, scaled by their maximum.
pub fn error_colors(errors: &[f64]) -> Vec<[u8; 3]> {
    let max = errors.iter().cloned().fold(0.0, f64::max);
    errors
        .iter()
        .map(|&e| ramp_color(if max > 0.0 { e / max } else { 0.0 }))
        .collect()
}

pub fn write_error_heatmap<W: Write>(
    w: W,
    cloud: &PointCloud,
    errors: &[f64],
    encoding: Encoding,
) -> Result<()> {
    if errors.len() != cloud.len() {
        return Err(Error::Heatmap(format!(
            "{} errors for {} points",
            errors.len(),
            cloud.len()
        )));
    }
    if let Some(bad) = errors.iter().find(|e| !(**e >= 0.0)) {
        return Err(Error::Heatmap(format!("negative or NaN error {bad}")));
    }
    let colors = error_colors(errors);
    let channel = |c: usize| colors.iter().map(|rgb| f64::from(rgb[c])).collect::<Vec<_>>();
    let (red, green, blue) = (channel(0), channel(1), channel(2));
    let extras = [
        ExtraColumn { name: "red", ty: ScalarType::UChar, values: &red },
        ExtraColumn { name: "green", ty: ScalarType::UChar, values: &green },
        ExtraColumn { name: "blue", ty: ScalarType::UChar, values: &blue },
        ExtraColumn { name: "error", ty: ScalarType::Double, values: errors },
    ];
    let plain = cloud.clone().without_normals();
    write_vertices(w, &plain, &extras, encoding).map_err(|e| Error::Heatmap(e.to_string()))
}

pub fn export_error_heatmap(
    cloud: &PointCloud,
    errors: &[f64],
    path: impl AsRef<Path>,
    encoding: Encoding,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_error_heatmap(BufWriter::new(file), cloud, errors, encoding)
}
