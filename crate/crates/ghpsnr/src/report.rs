//! JSON and CSV report schemas.

use std::io::Write;

use ghpsnr_core::correlation::{CorrelationReport, MosRecord, RegressionModel};
use ghpsnr_core::distortion::{DistortionKind, DistortionSpec};
use ghpsnr_core::{DistanceKind, Pooling, QualityResult, Rank, Reduction};
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub fn kind_name(kind: DistanceKind) -> &'static str {
    match kind {
        DistanceKind::PointToPoint => "p2po",
        DistanceKind::PointToPlane => "p2pl",
    }
}

pub fn pooling_name(pooling: Pooling) -> &'static str {
    match pooling {
        Pooling::Min => "min",
        Pooling::Max => "max",
        Pooling::Avg => "avg",
        Pooling::Wavg => "wavg",
    }
}

/// One metric value. `psnr_db` is `null` for an infinite PSNR; `per` is
/// `null` for MSE and `100/N` of the original for the minimum rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub label: String,
    pub kind: String,
    pub reduction: String,
    pub per: Option<f64>,
    pub pooling: String,
    pub d_ab: f64,
    pub d_ba: f64,
    pub undirected: f64,
    pub psnr_db: Option<f64>,
}

impl ResultRecord {
    pub fn new(r: &QualityResult, original_size: usize) -> Self {
        let kind = kind_name(r.config.kind);
        let pooling = pooling_name(r.config.pooling);
        let (reduction, per, label) = match r.config.reduction {
            Reduction::Mse => {
                let mpeg = match (r.config.kind, r.config.pooling) {
                    (DistanceKind::PointToPoint, Pooling::Max) => "D1".to_string(),
                    (DistanceKind::PointToPlane, Pooling::Max) => "D2".to_string(),
                    _ => format!("MSE_{kind}_{pooling}"),
                };
                ("mse", None, mpeg)
            }
            Reduction::Gh(Rank::Minimum) => (
                "gh",
                Some(Rank::Minimum.percent(original_size)),
                format!("PSNR_{kind}_100/N_{pooling}"),
            ),
            Reduction::Gh(Rank::Percent(p)) => ("gh", Some(p), format!("PSNR_{kind}_{p}_{pooling}")),
        };
        Self {
            label,
            kind: kind.into(),
            reduction: reduction.into(),
            per,
            pooling: pooling.into(),
            d_ab: r.directed_ab,
            d_ba: r.directed_ba,
            undirected: r.undirected,
            psnr_db: r.psnr_db.is_finite().then_some(r.psnr_db),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedNormals {
    pub cloud: String,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub original: String,
    pub decoded: String,
    pub original_points: usize,
    pub decoded_points: usize,
    pub signal_peak: f64,
    pub estimated_normals: Vec<EstimatedNormals>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<u64>,
    pub results: Vec<ResultRecord>,
}

pub fn write_results_csv<W: Write>(w: W, results: &[ResultRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["label", "kind", "reduction", "per", "pooling", "d_ab", "d_ba", "undirected", "psnr_db"])?;
    for r in results {
        out.write_record([
            r.label.clone(),
            r.kind.clone(),
            r.reduction.clone(),
            r.per.map(|p| p.to_string()).unwrap_or_default(),
            r.pooling.clone(),
            r.d_ab.to_string(),
            r.d_ba.to_string(),
            r.undirected.to_string(),
            r.psnr_db.map_or_else(|| "inf".to_string(), |p| p.to_string()),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl From<RegressionModel> for ModelRecord {
    fn from(m: RegressionModel) -> Self {
        Self { a: m.a, b: m.b, c: m.c, d: m.d }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub metric_label: String,
    pub n: usize,
    pub excluded_infinite: usize,
    pub plcc_raw: f64,
    pub plcc_fitted: f64,
    pub srocc: f64,
    pub rmse: f64,
    pub model: ModelRecord,
}

impl From<&CorrelationReport> for CorrelationRecord {
    fn from(r: &CorrelationReport) -> Self {
        Self {
            metric_label: r.metric_label.clone(),
            n: r.n,
            excluded_infinite: r.excluded_infinite,
            plcc_raw: r.plcc_raw,
            plcc_fitted: r.plcc_fitted,
            srocc: r.srocc,
            rmse: r.rmse,
            model: r.model.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelateOutput {
    pub reports: Vec<CorrelationRecord>,
    /// Metric labels ordered by fitted PLCC, best first.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ranking: Option<Vec<String>>,
}

/// `(y, mos, mos_predicted)` rows for the finite-score records.
pub fn write_fit_csv<W: Write>(w: W, records: &[MosRecord], report: &CorrelationReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["stimulus_id", "y", "mos", "mos_predicted"])?;
    for r in records {
        let y = r.objective_scores[&report.metric_label];
        if y.is_finite() {
            out.write_record([
                r.stimulus_id.clone(),
                y.to_string(),
                r.mos.to_string(),
                report.model.predict(y).to_string(),
            ])?;
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Serializable form of a distortion, used in experiment manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistortionRecord {
    OctreePrune { depth: u32 },
    GaussianJitter { sigma: f64 },
    OutlierInject { fraction: f64, magnitude: f64 },
}

impl From<DistortionKind> for DistortionRecord {
    fn from(k: DistortionKind) -> Self {
        match k {
            DistortionKind::OctreePrune { depth } => Self::OctreePrune { depth },
            DistortionKind::GaussianJitter { sigma } => Self::GaussianJitter { sigma },
            DistortionKind::OutlierInject { fraction, magnitude } => {
                Self::OutlierInject { fraction, magnitude }
            }
        }
    }
}

impl From<DistortionRecord> for DistortionKind {
    fn from(k: DistortionRecord) -> Self {
        match k {
            DistortionRecord::OctreePrune { depth } => Self::OctreePrune { depth },
            DistortionRecord::GaussianJitter { sigma } => Self::GaussianJitter { sigma },
            DistortionRecord::OutlierInject { fraction, magnitude } => {
                Self::OutlierInject { fraction, magnitude }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionManifest {
    pub input: String,
    pub output: String,
    pub distortion: DistortionRecord,
    pub seed: u64,
    pub input_points: usize,
    pub output_points: usize,
}

impl DistortionManifest {
    pub fn spec(&self) -> DistortionSpec {
        DistortionSpec { kind: self.distortion.into(), seed: self.seed }
    }
}
