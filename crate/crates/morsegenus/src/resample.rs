//! Single-run pipeline and its Monte Carlo / bootstrap repetition.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::areafn::{area_function, first_derivative, height_grid, AreaSeries, DerivSeries};
use crate::critdetect::{detect_critical_points, CriticalSet, DetectConfig};
use crate::error::{param, Error, Result};
use crate::morse::{
    betti_one, euler_characteristic, genus_estimate, morse_polynomial, strong_inequality_q,
    weak_inequality, InvalidReason, PoincarePolynomial,
};
use crate::surfaces::{add_height_noise, PointCloud, SurfaceSampler, SurfaceSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Height grid spacing.
    pub step: f64,
    pub detect: DetectConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { step: 0.5, detect: DetectConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub index: usize,
    pub seed: u64,
    pub counts: [u32; 3],
    /// Morse polynomial coefficients.
    pub m: [u32; 3],
    pub b1: i64,
    pub valid: bool,
    pub invalid_reason: Option<InvalidReason>,
    pub genus: Option<u32>,
    pub euler: i64,
    pub weak_ok: bool,
    pub strong_q: Option<[u32; 2]>,
}

impl ReplicateResult {
    fn from_detections(set: &CriticalSet) -> Self {
        let counts = set.counts();
        let m = morse_polynomial(counts);
        let b1 = betti_one(&m);
        let reason = if set.is_degenerate() { Some(InvalidReason::Degenerate) } else { b1.reason };
        let genus = match reason {
            None => genus_estimate(&b1).ok(),
            Some(_) => None,
        };
        let p = genus.map(PoincarePolynomial::of_genus);
        ReplicateResult {
            index: 0,
            seed: 0,
            counts,
            m: m.0,
            b1: b1.value,
            valid: reason.is_none(),
            invalid_reason: reason,
            genus,
            euler: euler_characteristic(&m),
            weak_ok: p.is_some_and(|p| weak_inequality(&m, &p)),
            strong_q: p.and_then(|p| strong_inequality_q(&m, &p)),
        }
    }
}

/// Every intermediate of one pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub area: AreaSeries,
    pub deriv: DerivSeries,
    pub detections: CriticalSet,
    pub result: ReplicateResult,
}

pub fn analyze_cloud(cloud: &PointCloud, cfg: &PipelineConfig) -> Result<Analysis> {
    let grid = height_grid(cloud, cfg.step)?;
    let area = area_function(cloud, &grid)?;
    let deriv = first_derivative(&area)?;
    let detections = detect_critical_points(&deriv, &cfg.detect)?;
    let result = ReplicateResult::from_detections(&detections);
    Ok(Analysis { area, deriv, detections, result })
}

pub fn run_pipeline_once(cloud: &PointCloud, cfg: &PipelineConfig) -> Result<ReplicateResult> {
    Ok(analyze_cloud(cloud, cfg)?.result)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    Serial,
    #[default]
    Parallel,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of replicate `i`, a function of the master seed and `i` only.
pub fn replicate_seed(master: u64, i: u64) -> u64 {
    splitmix64(master ^ splitmix64(i))
}

/// Seed of the noise added to the cloud drawn with `seed`.
pub fn noise_seed(seed: u64) -> u64 {
    splitmix64(seed ^ 0x6E6F_6973_6531)
}

fn run_replicates<F>(b: usize, master: u64, schedule: Schedule, f: F) -> Result<Vec<ReplicateResult>>
where
    F: Fn(u64) -> Result<ReplicateResult> + Sync,
{
    if b == 0 {
        return Err(param("number of replicates must be positive"));
    }
    let one = |i: usize| {
        let seed = replicate_seed(master, i as u64);
        f(seed).map(|r| ReplicateResult { index: i, seed, ..r })
    };
    match schedule {
        Schedule::Serial => (0..b).map(one).collect(),
        Schedule::Parallel => (0..b).into_par_iter().map(one).collect(),
    }
}

/// Fresh clouds from the surface for every replicate.
pub fn monte_carlo(
    spec: &SurfaceSpec,
    n: usize,
    sigma: f64,
    b: usize,
    master_seed: u64,
    cfg: &PipelineConfig,
    schedule: Schedule,
) -> Result<GenusDistribution> {
    let sampler = SurfaceSampler::new(spec)?;
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(param(format!("noise sigma must be finite and >= 0, got {sigma}")));
    }
    let reps = run_replicates(b, master_seed, schedule, |seed| {
        let clean = sampler.sample(n, seed)?;
        let noisy = add_height_noise(&clean, sigma, noise_seed(seed))?;
        run_pipeline_once(&noisy, cfg)
    })?;
    checked_summary(reps)
}

/// Resample the given cloud with replacement for every replicate.
pub fn bootstrap(
    cloud: &PointCloud,
    b: usize,
    master_seed: u64,
    cfg: &PipelineConfig,
    schedule: Schedule,
) -> Result<GenusDistribution> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::Input("bootstrap needs at least two points".into()));
    }
    let reps = run_replicates(b, master_seed, schedule, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..n).map(|_| cloud.points[rng.random_range(0..n)]).collect();
        run_pipeline_once(&PointCloud::new(pts), cfg)
    })?;
    checked_summary(reps)
}

fn checked_summary(reps: Vec<ReplicateResult>) -> Result<GenusDistribution> {
    let dist = summarize(reps)?;
    if dist.modal_genus.is_none() {
        let mut why: BTreeMap<String, usize> = BTreeMap::new();
        for r in &dist.per_replicate {
            if let Some(reason) = r.invalid_reason {
                *why.entry(format!("{reason:?}")).or_default() += 1;
            }
        }
        return Err(Error::Degenerate(format!(
            "all {} replicates invalid: {why:?}",
            dist.per_replicate.len()
        )));
    }
    Ok(dist)
}

/// Min, lower quartile, median, upper quartile, max. Quartiles are medians of
/// the lower and upper halves, the middle value excluded for odd sizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let half = n / 2;
        let (lower, upper) = if n == 1 { (&v[..], &v[..]) } else { (&v[..half], &v[n - half..]) };
        Some(FiveNumber { min: v[0], q1: median(lower), median: median(&v), q3: median(upper), max: v[n - 1] })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenusDistribution {
    /// Relative frequency of each genus among valid replicates.
    pub histogram: BTreeMap<u32, f64>,
    /// Most frequent genus; ties go to the smaller genus.
    pub modal_genus: Option<u32>,
    pub invalid_rate: f64,
    /// Five-number summaries of the minimum, saddle and maximum counts over all replicates.
    pub count_summaries: [FiveNumber; 3],
    pub genus_summary: Option<FiveNumber>,
    pub per_replicate: Vec<ReplicateResult>,
}

impl GenusDistribution {
    pub fn replicates(&self) -> usize {
        self.per_replicate.len()
    }
}

pub fn summarize(results: Vec<ReplicateResult>) -> Result<GenusDistribution> {
    if results.is_empty() {
        return Err(param("no replicates to summarize"));
    }
    let mut tally: BTreeMap<u32, usize> = BTreeMap::new();
    for g in results.iter().filter_map(|r| r.genus) {
        *tally.entry(g).or_default() += 1;
    }
    let valid: usize = tally.values().sum();
    let modal_genus = tally
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(g, _)| *g);
    let histogram = tally.iter().map(|(g, c)| (*g, *c as f64 / valid as f64)).collect();
    let count = |k: usize| {
        let v: Vec<f64> = results.iter().map(|r| r.counts[k] as f64).collect();
        FiveNumber::of(&v).expect("non-empty")
    };
    let genera: Vec<f64> = results.iter().filter_map(|r| r.genus.map(f64::from)).collect();
    Ok(GenusDistribution {
        histogram,
        modal_genus,
        invalid_rate: (results.len() - valid) as f64 / results.len() as f64,
        count_summaries: [count(0), count(1), count(2)],
        genus_summary: FiveNumber::of(&genera),
        per_replicate: results,
    })
}
