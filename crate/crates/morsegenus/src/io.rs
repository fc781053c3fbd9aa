//! File formats: point clouds, series, detections and run reports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::areafn::{AreaSeries, DerivSeries};
use crate::critdetect::ResidualSeries;
use crate::error::{Error, Result};
use crate::resample::{FiveNumber, GenusDistribution, ReplicateResult};
use crate::surfaces::{NoiseMode, PointCloud, SurfaceSpec};

/// `x,y,z` with a header row, 13 significant digits.
pub fn write_cloud_csv(path: &Path, cloud: &PointCloud) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,y,z")?;
    for p in &cloud.points {
        writeln!(w, "{:.12e},{:.12e},{:.12e}", p[0], p[1], p[2])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `x,y,z` rows. A header row is optional. Row numbers in errors are 1-based file lines.
pub fn read_cloud_csv(path: &Path) -> Result<PointCloud> {
    let file = File::open(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(file);
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(std::io::Error::other(e.to_string())),
            _ => Error::Parse { row: i + 1, msg: e.to_string() },
        })?;
        let row = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.len() != 3 {
            return Err(Error::Parse { row, msg: format!("expected 3 fields, found {}", rec.len()) });
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if v.iter().all(|x| x.is_finite()) => points.push([v[0], v[1], v[2]]),
            Ok(_) => return Err(Error::Parse { row, msg: "non-finite coordinate".into() }),
            Err(_) if i == 0 && rec.iter().any(|f| f.eq_ignore_ascii_case("x")) => continue,
            Err(e) => return Err(Error::Parse { row, msg: e.to_string() }),
        }
    }
    if points.is_empty() {
        return Err(Error::Parse { row: 0, msg: "no points in file".into() });
    }
    Ok(PointCloud::new(points))
}

/// How a cloud was produced; written next to the CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec: SurfaceSpec,
    pub n: usize,
    pub sigma: f64,
    pub noise: NoiseMode,
    pub seed: u64,
    pub tool_version: String,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_series(path: &Path, header: &str, h: &[f64], v: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    for (a, b) in h.iter().zip(v) {
        writeln!(w, "{a:.12e},{b:.12e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_area_csv(path: &Path, s: &AreaSeries) -> Result<()> {
    write_series(path, "h,s", &s.grid.nodes(), &s.s)
}

pub fn write_deriv_csv(path: &Path, d: &DerivSeries) -> Result<()> {
    write_series(path, "h,ds", &d.grid.nodes(), &d.d)
}

pub fn write_second_deriv_csv(path: &Path, d: &DerivSeries) -> Result<()> {
    write_series(path, "h,d2s", &d.grid.nodes(), &d.d)
}

pub fn write_residual_csv(path: &Path, r: &ResidualSeries) -> Result<()> {
    write_series(path, "h,residual", &r.grid.nodes(), &r.residual)
}

/// Result file of a Monte Carlo or bootstrap run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub spec: Option<SurfaceSpec>,
    pub n: usize,
    pub sigma: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub master_seed: u64,
    pub histogram: std::collections::BTreeMap<u32, f64>,
    pub modal_genus: Option<u32>,
    pub invalid_rate: f64,
    pub count_summaries: [FiveNumber; 3],
    pub genus_summary: Option<FiveNumber>,
    pub per_replicate: Vec<ReplicateResult>,
}

impl RunReport {
    pub fn new(spec: Option<SurfaceSpec>, n: usize, sigma: f64, master_seed: u64, dist: GenusDistribution) -> Self {
        RunReport {
            spec,
            n,
            sigma,
            b: dist.replicates(),
            master_seed,
            histogram: dist.histogram,
            modal_genus: dist.modal_genus,
            invalid_rate: dist.invalid_rate,
            count_summaries: dist.count_summaries,
            genus_summary: dist.genus_summary,
            per_replicate: dist.per_replicate,
        }
    }
}

/// `genus,count,frequency` rows; invalid replicates are counted under `invalid`.
pub fn write_histogram_csv(path: &Path, report: &RunReport) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "genus,count,frequency")?;
    let valid = report.per_replicate.iter().filter(|r| r.valid).count();
    for (g, f) in &report.histogram {
        let c = report.per_replicate.iter().filter(|r| r.genus == Some(*g)).count();
        writeln!(w, "{g},{c},{f}")?;
    }
    let invalid = report.per_replicate.len() - valid;
    writeln!(w, "invalid,{invalid},{}", report.invalid_rate)?;
    w.flush()?;
    Ok(())
}

/// Output of a single-cloud analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub input: String,
    pub n: usize,
    pub config: crate::resample::PipelineConfig,
    pub grid: crate::areafn::HeightGrid,
    pub counts: [u32; 3],
    pub b1: i64,
    pub valid: bool,
    pub invalid_reason: Option<crate::morse::InvalidReason>,
    pub genus: Option<u32>,
    pub euler: i64,
    pub weak_ok: bool,
    pub strong_q: Option<[u32; 2]>,
    pub detections: Vec<crate::critdetect::Detection>,
}

/// Output of a Rips-complex sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub source: String,
    pub points: usize,
    pub up_to_dim: usize,
    pub sweep: Vec<crate::vroracle::SweepRow>,
    pub stable_betti: crate::vroracle::BettiVector,
    pub stable_from: f64,
    pub stable_to: f64,
    /// b1 / 2 of the stable vector, when b1 was computed.
    pub genus: Option<usize>,
}
