//! Command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ghpsnr_core::correlation::evaluate_metric;
use ghpsnr_core::distortion::{DistortionKind, DistortionSpec};
use ghpsnr_core::metrics::{default_per_grid, metric_grid, point_errors, DirectedPair};
use ghpsnr_core::normals::{estimate_normals, DEFAULT_NEIGHBORS};
use ghpsnr_core::{DistanceKind, MetricConfig, PointCloud, Pooling, Rank, Reduction, SpatialIndex};

use crate::error::{Error, Result};
use crate::heatmap::export_error_heatmap;
use crate::mos::{load_mos_table, score_columns};
use crate::ply::{load_ply, save_ply, Encoding};
use crate::report::{
    write_fit_csv, write_results_csv, CompareReport, CorrelateOutput, CorrelationRecord,
    DistortionManifest, EstimatedNormals, ResultRecord,
};

#[derive(Debug, Parser)]
#[command(name = "ghpsnr", version, about = "Point cloud geometry quality metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare a decoded cloud against its original.
    Compare(CompareArgs),
    /// Write a distorted copy of a cloud plus a JSON manifest.
    Distort(DistortArgs),
    /// Ranked directed distances as CSV (per, value).
    Profile(ProfileArgs),
    /// Per-point error heatmap as colored PLY.
    Heatmap(HeatmapArgs),
    /// Objective/subjective correlation from a MOS table.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    P2po,
    P2pl,
}

impl From<KindArg> for DistanceKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::P2po => DistanceKind::PointToPoint,
            KindArg::P2pl => DistanceKind::PointToPlane,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReductionArg {
    Mse,
    Gh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PoolingArg {
    Min,
    Max,
    Avg,
    Wavg,
}

impl From<PoolingArg> for Pooling {
    fn from(p: PoolingArg) -> Self {
        match p {
            PoolingArg::Min => Pooling::Min,
            PoolingArg::Max => Pooling::Max,
            PoolingArg::Avg => Pooling::Avg,
            PoolingArg::Wavg => Pooling::Wavg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EncodingArg {
    Ascii,
    Binary,
}

impl From<EncodingArg> for Encoding {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Ascii => Encoding::Ascii,
            EncodingArg::Binary => Encoding::BinaryLittleEndian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    /// original -> decoded
    Ab,
    /// decoded -> original
    Ba,
    Both,
}

/// `min` (rank 1) or a percentage in (0, 100].
fn parse_rank(s: &str) -> std::result::Result<Rank, String> {
    if s.eq_ignore_ascii_case("min") {
        return Ok(Rank::Minimum);
    }
    let per: f64 = s.parse().map_err(|_| format!("`{s}` is not a number or `min`"))?;
    if per > 0.0 && per <= 100.0 {
        Ok(Rank::Percent(per))
    } else {
        Err(format!("per must be in (0, 100], got {per}"))
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` must be a positive number")),
    }
}

fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v < 1.0 => Ok(v),
        _ => Err(format!("`{s}` must be in (0, 1)")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct PeakArgs {
    /// Signal peak p of the PSNR.
    #[arg(long, value_parser = parse_positive)]
    pub peak: Option<f64>,
    /// Bit depth of the original; sets p = 2^bits - 1.
    #[arg(long)]
    pub precision_bits: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    pub original: PathBuf,
    pub decoded: PathBuf,
    #[arg(long, value_enum, default_value = "p2po")]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "mse")]
    pub reduction: ReductionArg,
    /// Rank percentage for `--reduction gh`, or `min`.
    #[arg(long, value_parser = parse_rank)]
    pub per: Option<Rank>,
    #[arg(long, value_enum, default_value = "max")]
    pub pooling: PoolingArg,
    #[command(flatten)]
    pub peak: PeakArgs,
    /// Neighborhood size when normals have to be estimated.
    #[arg(long, default_value_t = DEFAULT_NEIGHBORS)]
    pub normals_k: usize,
    /// Evaluate every kind, rank and pooling (plus D1 and D2).
    #[arg(long)]
    pub grid: bool,
    /// Comma-separated ranks for `--grid` (default: min,50,60,...,100).
    #[arg(long, value_delimiter = ',', value_parser = parse_rank)]
    pub per_list: Option<Vec<Rank>>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write a flat CSV of the results.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Add a unix timestamp to the report.
    #[arg(long)]
    pub timestamp: bool,
}

#[derive(Debug, Clone, Args)]
#[command(group(clap::ArgGroup::new("distortion").required(true).args(["octree_depth", "jitter_sigma", "outlier_fraction"])))]
pub struct DistortArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long)]
    pub octree_depth: Option<u32>,
    #[arg(long, value_parser = parse_positive)]
    pub jitter_sigma: Option<f64>,
    #[arg(long, value_parser = parse_fraction, requires = "outlier_magnitude")]
    pub outlier_fraction: Option<f64>,
    #[arg(long, value_parser = parse_positive)]
    pub outlier_magnitude: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "binary")]
    pub encoding: EncodingArg,
    /// Manifest path (default: `<output>.json`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    pub original: PathBuf,
    pub decoded: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub direction: Direction,
    #[arg(long, value_enum, default_value = "p2po")]
    pub kind: KindArg,
    #[arg(long, value_delimiter = ',', value_parser = parse_rank)]
    pub per_list: Option<Vec<Rank>>,
    #[arg(long, default_value_t = DEFAULT_NEIGHBORS)]
    pub normals_k: usize,
    /// CSV path (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct HeatmapArgs {
    pub original: PathBuf,
    pub decoded: PathBuf,
    pub output: PathBuf,
    /// `ba` colors the decoded cloud, `ab` the original.
    #[arg(long, value_enum, default_value = "ba")]
    pub direction: Direction,
    #[arg(long, value_enum, default_value = "p2po")]
    pub kind: KindArg,
    #[arg(long, default_value_t = DEFAULT_NEIGHBORS)]
    pub normals_k: usize,
    #[arg(long, value_enum, default_value = "binary")]
    pub encoding: EncodingArg,
}

#[derive(Debug, Clone, Args)]
pub struct CorrelateArgs {
    pub mos_csv: PathBuf,
    /// Score column(s) to evaluate (default: all numeric columns).
    #[arg(long = "metric", value_delimiter = ',')]
    pub metrics: Vec<String>,
    /// Order the metrics by fitted PLCC.
    #[arg(long)]
    pub rank: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write `<metric>.csv` with (y, mos, mos_predicted) rows here.
    #[arg(long)]
    pub fit_csv_dir: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn emit(payload: &[u8], output: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(payload).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
        }
        None => stdout.write_all(payload).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    Ok(text)
}

/// Makes sure `cloud` has normals, estimating them when absent.
fn ensure_normals(cloud: PointCloud, k: usize, notes: &mut Vec<EstimatedNormals>) -> Result<PointCloud> {
    if cloud.normals().is_some() {
        return Ok(cloud);
    }
    log::info!("estimating normals for `{}` with k={k}", cloud.name());
    notes.push(EstimatedNormals { cloud: cloud.name().into(), k });
    Ok(estimate_normals(&cloud, k)?)
}

fn resolve_peak(args: &PeakArgs, original: &PointCloud) -> Result<f64> {
    if let Some(p) = args.peak {
        return Ok(p);
    }
    if let Some(bits) = args.precision_bits {
        return Ok(ghpsnr_core::cloud::peak_from_precision(bits));
    }
    original.signal_peak().ok_or_else(|| {
        Error::Usage("no signal peak: pass --peak or --precision-bits, or add `comment precision_bits N` to the original PLY".into())
    })
}

fn load_pair(
    original: &Path,
    decoded: &Path,
    plane: bool,
    k: usize,
    notes: &mut Vec<EstimatedNormals>,
) -> Result<(PointCloud, PointCloud)> {
    let mut a = load_ply(original)?;
    let mut b = load_ply(decoded)?;
    if a.name() == b.name() {
        let (na, nb) = (format!("original:{}", a.name()), format!("decoded:{}", b.name()));
        a = a.with_name(na);
        b = b.with_name(nb);
    }
    if plane {
        a = ensure_normals(a, k, notes)?;
        b = ensure_normals(b, k, notes)?;
    }
    Ok((a, b))
}

pub fn cmd_compare(args: &CompareArgs, stdout: &mut dyn Write) -> Result<()> {
    let kind: DistanceKind = args.kind.into();
    let needs_plane = args.grid || kind == DistanceKind::PointToPlane;
    let mut notes = Vec::new();
    let (original, decoded) =
        load_pair(&args.original, &args.decoded, needs_plane, args.normals_k, &mut notes)?;
    let peak = resolve_peak(&args.peak, &original)?;

    let results = if args.grid {
        let ranks = args.per_list.clone().unwrap_or_else(default_per_grid);
        metric_grid(
            &original,
            &decoded,
            &[DistanceKind::PointToPoint, DistanceKind::PointToPlane],
            &ranks,
            &Pooling::ALL,
            peak,
        )?
    } else {
        let reduction = match (args.reduction, args.per) {
            (ReductionArg::Mse, None) => Reduction::Mse,
            (ReductionArg::Mse, Some(_)) => {
                return Err(Error::Usage("--per only applies to --reduction gh".into()))
            }
            (ReductionArg::Gh, Some(rank)) => Reduction::Gh(rank),
            (ReductionArg::Gh, None) => {
                return Err(Error::Usage("--reduction gh needs --per".into()))
            }
        };
        let config = MetricConfig { kind, reduction, pooling: args.pooling.into(), signal_peak: peak };
        config.validate()?;
        vec![DirectedPair::compute(&original, &decoded, kind)?.evaluate(&config)?]
    };

    let records: Vec<ResultRecord> =
        results.iter().map(|r| ResultRecord::new(r, original.len())).collect();
    let report = CompareReport {
        original: args.original.display().to_string(),
        decoded: args.decoded.display().to_string(),
        original_points: original.len(),
        decoded_points: decoded.len(),
        signal_peak: peak,
        estimated_normals: notes,
        timestamp: args.timestamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        }),
        results: records,
    };
    if let Some(path) = &args.csv {
        write_results_csv(create(path)?, &report.results)?;
    }
    emit(&to_json(&report)?, args.output.as_deref(), stdout)
}

pub fn cmd_distort(args: &DistortArgs) -> Result<DistortionManifest> {
    let kind = match (args.octree_depth, args.jitter_sigma, args.outlier_fraction) {
        (Some(depth), None, None) => DistortionKind::OctreePrune { depth },
        (None, Some(sigma), None) => DistortionKind::GaussianJitter { sigma },
        (None, None, Some(fraction)) => DistortionKind::OutlierInject {
            fraction,
            magnitude: args
                .outlier_magnitude
                .ok_or_else(|| Error::Usage("--outlier-fraction needs --outlier-magnitude".into()))?,
        },
        _ => return Err(Error::Usage("choose exactly one distortion".into())),
    };
    let spec = DistortionSpec { kind, seed: args.seed };
    spec.validate()?;
    let input = load_ply(&args.input)?;
    let output = spec.apply(&input)?;
    save_ply(&output, &args.output, args.encoding.into())?;

    let manifest = DistortionManifest {
        input: args.input.display().to_string(),
        output: args.output.display().to_string(),
        distortion: kind.into(),
        seed: args.seed,
        input_points: input.len(),
        output_points: output.len(),
    };
    let path = args.manifest.clone().unwrap_or_else(|| {
        let mut p = args.output.clone().into_os_string();
        p.push(".json");
        PathBuf::from(p)
    });
    emit(&to_json(&manifest)?, Some(&path), &mut std::io::sink())?;
    Ok(manifest)
}

pub fn cmd_profile(args: &ProfileArgs, stdout: &mut dyn Write) -> Result<()> {
    let kind: DistanceKind = args.kind.into();
    let mut notes = Vec::new();
    let (original, decoded) = load_pair(
        &args.original,
        &args.decoded,
        kind == DistanceKind::PointToPlane,
        args.normals_k,
        &mut notes,
    )?;
    let pair = DirectedPair::compute(&original, &decoded, kind)?;
    let ranks = args.per_list.clone().unwrap_or_else(default_per_grid);

    let mut buf = Vec::new();
    {
        let mut out = csv::Writer::from_writer(&mut buf);
        out.write_record(["direction", "per", "value"])?;
        let dirs: &[(&str, &ghpsnr_core::DirectedErrorSet)] = match args.direction {
            Direction::Ab => &[("ab", &pair.ab)],
            Direction::Ba => &[("ba", &pair.ba)],
            Direction::Both => &[("ab", &pair.ab), ("ba", &pair.ba)],
        };
        for (name, set) in dirs {
            for rank in &ranks {
                let value = set.reduce(Reduction::Gh(*rank));
                let per = rank.percent(set.source_size());
                out.write_record([name.to_string(), per.to_string(), value.to_string()])?;
            }
        }
        out.flush().map_err(csv::Error::from)?;
    }
    emit(&buf, args.output.as_deref(), stdout)
}

pub fn cmd_heatmap(args: &HeatmapArgs) -> Result<()> {
    let kind: DistanceKind = args.kind.into();
    let mut notes = Vec::new();
    let (original, decoded) = load_pair(
        &args.original,
        &args.decoded,
        kind == DistanceKind::PointToPlane,
        args.normals_k,
        &mut notes,
    )?;
    let (query, reference) = match args.direction {
        Direction::Ab => (&original, &decoded),
        Direction::Ba => (&decoded, &original),
        Direction::Both => return Err(Error::Usage("heatmap needs --direction ab or ba".into())),
    };
    let index = SpatialIndex::build(reference);
    let errors = point_errors(query, reference, kind, &index)?;
    export_error_heatmap(query, &errors, &args.output, args.encoding.into())
}

pub fn cmd_correlate(args: &CorrelateArgs, stdout: &mut dyn Write) -> Result<()> {
    let records = load_mos_table(&args.mos_csv)?;
    let available = score_columns(&records);
    let metrics = if args.metrics.is_empty() { available.clone() } else { args.metrics.clone() };
    if metrics.is_empty() {
        return Err(Error::Mos("table has no objective score columns".into()));
    }
    let mut reports = Vec::new();
    for label in &metrics {
        if !available.contains(label) {
            return Err(Error::Mos(format!(
                "no numeric column `{label}`; available: {}",
                available.join(", ")
            )));
        }
        let report = evaluate_metric(&records, label)?;
        if report.excluded_infinite > 0 {
            log::warn!("{label}: excluded {} infinite scores", report.excluded_infinite);
        }
        if let Some(dir) = &args.fit_csv_dir {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let path = dir.join(format!("{label}.csv"));
            write_fit_csv(create(&path)?, &records, &report)?;
        }
        reports.push(report);
    }
    let ranking = args.rank.then(|| {
        let mut order: Vec<_> = reports.iter().collect();
        order.sort_by(|a, b| b.plcc_fitted.total_cmp(&a.plcc_fitted));
        order.iter().map(|r| r.metric_label.clone()).collect()
    });
    let out = CorrelateOutput {
        reports: reports.iter().map(CorrelationRecord::from).collect(),
        ranking,
    };
    emit(&to_json(&out)?, args.output.as_deref(), stdout)
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Compare(a) => cmd_compare(a, stdout),
        Command::Distort(a) => cmd_distort(a).map(|_| ()),
        Command::Profile(a) => cmd_profile(a, stdout),
        Command::Heatmap(a) => cmd_heatmap(a),
        Command::Correlate(a) => cmd_correlate(a, stdout),
    }
}
