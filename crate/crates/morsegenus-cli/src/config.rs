//! Flat `key = value` config files and their merge with command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use morsegenus::critdetect::{DetectConfig, ThresholdRule};
use morsegenus::resample::{PipelineConfig, Schedule};
use morsegenus::surfaces::{NoiseMode, SurfaceKind};
use morsegenus::{Error, Result};

pub const KEYS: &[&str] = &[
    "surface", "input", "n", "sigma", "noise", "seed", "step", "window", "gate", "threshold", "step_cut",
    "cusp_cut", "replicates", "mode", "serial", "out_dir", "output", "subsample", "eps_min", "eps_max",
    "eps_steps", "up_to_dim",
];

/// Parsed config file. Keys use underscores; dashes are accepted too.
#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = i + 1;
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { row, msg: format!("expected key = value, got '{line}'") })?;
            let key = k.trim().replace('-', "_");
            let key = if key == "B" { "replicates".to_string() } else { key };
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Parse { row, msg: format!("unknown key '{}'", k.trim()) });
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    /// The flag value if given, else the file value parsed as `T`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| Error::Param(format!("config value for '{key}' is not valid: '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    MonteCarlo,
    Bootstrap,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "montecarlo" | "mc" => Ok(Mode::MonteCarlo),
            "bootstrap" => Ok(Mode::Bootstrap),
            _ => Err(Error::Param(format!("unknown mode '{s}', expected montecarlo or bootstrap"))),
        }
    }
}

pub fn parse_noise(s: &str) -> Result<NoiseMode> {
    match s.to_ascii_lowercase().as_str() {
        "height" | "z" => Ok(NoiseMode::Height),
        "isotropic" => Ok(NoiseMode::Isotropic),
        _ => Err(Error::Param(format!("unknown noise mode '{s}', expected height or isotropic"))),
    }
}

/// Either a generated surface or a point-cloud file, never both.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Surface(SurfaceKind),
    Input(PathBuf),
}

impl Source {
    pub fn resolve(file: &FileConfig, surface: Option<String>, input: Option<PathBuf>) -> Result<Option<Self>> {
        // a flag for one source hides the other one from the file
        let (surface, input) = match (&surface, &input) {
            (Some(_), None) => (surface, None),
            (None, Some(_)) => (None, input),
            _ => (file.pick(surface, "surface")?, file.pick(input, "input")?),
        };
        match (surface, input) {
            (Some(_), Some(_)) => Err(Error::Param("give either a surface or an input file, not both".into())),
            (Some(s), None) => Ok(Some(Source::Surface(s.parse()?))),
            (None, Some(p)) => Ok(Some(Source::Input(p))),
            (None, None) => Ok(None),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Source::Surface(k) => k.name().to_string(),
            Source::Input(p) => p.file_stem().map_or("cloud".into(), |s| s.to_string_lossy().into_owned()),
        }
    }
}

pub struct PipelineFlags {
    pub step: Option<f64>,
    pub window: Option<usize>,
    pub gate: Option<f64>,
    pub threshold: Option<String>,
    pub step_cut: Option<f64>,
    pub cusp_cut: Option<f64>,
}

pub fn pipeline_config(file: &FileConfig, f: PipelineFlags) -> Result<PipelineConfig> {
    let base = PipelineConfig::default();
    let ThresholdRule::Fixed { step: s0, cusp: c0 } = base.detect.threshold else { unreachable!() };
    let rule = file.pick(f.threshold, "threshold")?.unwrap_or_else(|| "fixed".into());
    let threshold = match rule.to_ascii_lowercase().as_str() {
        "fixed" => ThresholdRule::Fixed {
            step: file.pick(f.step_cut, "step_cut")?.unwrap_or(s0),
            cusp: file.pick(f.cusp_cut, "cusp_cut")?.unwrap_or(c0),
        },
        "std" | "stddev" => ThresholdRule::StdDev,
        other => return Err(Error::Param(format!("unknown threshold rule '{other}', expected fixed or std"))),
    };
    let cfg = PipelineConfig {
        step: file.pick(f.step, "step")?.unwrap_or(base.step),
        detect: DetectConfig {
            window_len: file.pick(f.window, "window")?.unwrap_or(base.detect.window_len),
            gate: file.pick(f.gate, "gate")?.unwrap_or(base.detect.gate),
            threshold,
            ..base.detect
        },
    };
    if !(cfg.step > 0.0 && cfg.step.is_finite()) {
        return Err(Error::Param(format!("grid step must be positive, got {}", cfg.step)));
    }
    cfg.detect.validate()?;
    Ok(cfg)
}

pub fn schedule(file: &FileConfig, serial_flag: bool) -> Result<Schedule> {
    let serial = serial_flag || file.pick(None::<bool>, "serial")?.unwrap_or(false);
    Ok(if serial { Schedule::Serial } else { Schedule::Parallel })
}
