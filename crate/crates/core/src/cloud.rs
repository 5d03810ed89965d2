use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A 3D coordinate in model units.
pub type Point3 = [f64; 3];

/// Tolerance on the Euclidean norm of a stored normal.
pub const UNIT_NORMAL_TOLERANCE: f64 = 1e-6;

#[inline]
pub(crate) fn sub(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn dot(a: &Point3, b: &Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn squared_distance(a: &Point3, b: &Point3) -> f64 {
    let d = sub(a, b);
    dot(&d, &d)
}

/// Scales `v` to unit length. Returns `None` for zero or non-finite vectors.
pub fn normalize(v: Point3) -> Option<Point3> {
    let norm = libm::sqrt(dot(&v, &v));
    if norm > 0.0 && norm.is_finite() {
        Some([v[0] / norm, v[1] / norm, v[2] / norm])
    } else {
        None
    }
}

/// An ordered set of points with optional unit normals.
///
/// Point order is significant: it is the identity used for tie-breaking in
/// nearest-neighbor queries and the order of per-point outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    name: String,
    points: Vec<Point3>,
    normals: Option<Vec<Point3>>,
    precision_bits: Option<u32>,
}

impl PointCloud {
    /// Builds a cloud, rejecting empty input and non-finite coordinates.
    pub fn new(name: impl Into<String>, points: Vec<Point3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if let Some(index) = points
            .iter()
            .position(|p| !p.iter().all(|c| c.is_finite()))
        {
            return Err(Error::NonFiniteCoordinate { index });
        }
        Ok(Self {
            name: name.into(),
            points,
            normals: None,
            precision_bits: None,
        })
    }

    /// Attaches normals. Each must already be unit length within
    /// [`UNIT_NORMAL_TOLERANCE`].
    pub fn with_normals(mut self, normals: Vec<Point3>) -> Result<Self> {
        if normals.len() != self.points.len() {
            return Err(Error::NormalCountMismatch {
                points: self.points.len(),
                normals: normals.len(),
            });
        }
        for (index, n) in normals.iter().enumerate() {
            let norm = libm::sqrt(dot(n, n));
            if !((norm - 1.0).abs() <= UNIT_NORMAL_TOLERANCE) {
                return Err(Error::NonUnitNormal { index, norm });
            }
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn with_precision_bits(mut self, bits: Option<u32>) -> Self {
        self.precision_bits = bits.filter(|&b| b > 0);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn without_normals(mut self) -> Self {
        self.normals = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn normals(&self) -> Option<&[Point3]> {
        self.normals.as_deref()
    }

    pub fn precision_bits(&self) -> Option<u32> {
        self.precision_bits
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false for a constructed cloud; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `2^precision_bits - 1` when the precision is known.
    pub fn signal_peak(&self) -> Option<f64> {
        self.precision_bits.map(peak_from_precision)
    }
}

/// Signal peak for a voxel grid of the given bit depth (10 bit gives 1023).
pub fn peak_from_precision(bits: u32) -> f64 {
    libm::exp2(f64::from(bits)) - 1.0
}
