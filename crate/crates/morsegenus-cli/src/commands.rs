//! Subcommand implementations.

use std::path::{Path, PathBuf};

use morsegenus::areafn::second_derivative;
use morsegenus::critdetect::{make_templates, residual_series};
use morsegenus::io::{
    read_cloud_csv, sidecar_path, write_area_csv, write_cloud_csv, write_deriv_csv, write_histogram_csv,
    write_json, write_residual_csv, write_second_deriv_csv, AnalyzeReport, OracleReport, Provenance, RunReport,
};
use morsegenus::resample::{analyze_cloud, bootstrap, monte_carlo, noise_seed};
use morsegenus::surfaces::{add_noise, sample_surface, NoiseMode, PointCloud};
use morsegenus::vroracle::{
    build_vr, epsilon_sweep, farthest_point_subsample, median_nn_distance, DEFAULT_POINT_LIMIT,
};
use morsegenus::{Error, Result};

use crate::config::{self, FileConfig, Mode, Source};
use crate::{AnalyzeArgs, BootstrapArgs, Cli, Command, GenerateArgs, OracleArgs, PipelineFlags, SampleFlags};

const DEFAULT_N: usize = 5000;
const DEFAULT_SIGMA: f64 = 0.1;
const DEFAULT_REPLICATES: usize = 100;
const DEFAULT_EPS_STEPS: usize = 24;

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let out_dir = file.pick(cli.out_dir, "out_dir")?.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)?;
    match cli.command {
        Command::Generate(a) => generate(&file, &out_dir, a),
        Command::Analyze(a) => analyze(&file, &out_dir, a),
        Command::Bootstrap(a) => run_bootstrap(&file, &out_dir, a),
        Command::Oracle(a) => oracle(&file, &out_dir, a),
    }
}

struct Sample {
    n: usize,
    sigma: f64,
    seed: u64,
}

fn sample_settings(file: &FileConfig, f: SampleFlags) -> Result<Sample> {
    let s = Sample {
        n: file.pick(f.n, "n")?.unwrap_or(DEFAULT_N),
        sigma: file.pick(f.sigma, "sigma")?.unwrap_or(DEFAULT_SIGMA),
        seed: file.pick(f.seed, "seed")?.unwrap_or(0),
    };
    if s.n == 0 {
        return Err(Error::Param("n must be positive".into()));
    }
    Ok(s)
}

fn pipeline_flags(f: PipelineFlags) -> config::PipelineFlags {
    config::PipelineFlags {
        step: f.step,
        window: f.window,
        gate: f.gate,
        threshold: f.threshold,
        step_cut: f.step_cut,
        cusp_cut: f.cusp_cut,
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or("cloud".into(), |s| s.to_string_lossy().into_owned())
}

fn generate(file: &FileConfig, out_dir: &Path, a: GenerateArgs) -> Result<()> {
    let Some(Source::Surface(kind)) = Source::resolve(file, a.surface, None)? else {
        return Err(Error::Param("generate needs --surface".into()));
    };
    let s = sample_settings(file, a.sample)?;
    let noise = match file.pick(a.noise, "noise")? {
        Some(m) => config::parse_noise(&m)?,
        None => NoiseMode::Height,
    };
    let output = file
        .pick(a.output, "output")?
        .unwrap_or_else(|| out_dir.join(format!("{}_n{}_s{}.csv", kind.name(), s.n, s.seed)));
    let spec = kind.default_spec();
    let clean = sample_surface(&spec, s.n, s.seed)?;
    let cloud = add_noise(&clean, s.sigma, noise_seed(s.seed), noise)?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_cloud_csv(&output, &cloud)?;
    let prov = Provenance {
        spec,
        n: s.n,
        sigma: s.sigma,
        noise,
        seed: s.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    write_json(&sidecar_path(&output), &prov)?;
    println!("wrote {} points to {}", cloud.len(), output.display());
    Ok(())
}

fn analyze(file: &FileConfig, out_dir: &Path, a: AnalyzeArgs) -> Result<()> {
    let Some(Source::Input(input)) = Source::resolve(file, None, a.input)? else {
        return Err(Error::Param("analyze needs --input".into()));
    };
    let cfg = config::pipeline_config(file, pipeline_flags(a.pipeline))?;
    let cloud = read_cloud_csv(&input)?;
    let an = analyze_cloud(&cloud, &cfg)?;
    let base = stem(&input);
    let out = |suffix: &str| out_dir.join(format!("{base}.{suffix}"));

    write_area_csv(&out("area.csv"), &an.area)?;
    write_deriv_csv(&out("deriv.csv"), &an.deriv)?;
    write_second_deriv_csv(&out("deriv2.csv"), &second_derivative(&an.area)?)?;
    for t in make_templates(cfg.detect.window_len, an.deriv.d.len())? {
        let r = residual_series(&an.deriv, &t)?;
        write_residual_csv(&out(&format!("residual-{}.csv", t.kind.name())), &r)?;
    }
    write_json(&out("detections.json"), &an.detections.points)?;

    let r = an.result;
    let report = AnalyzeReport {
        input: input.display().to_string(),
        n: cloud.len(),
        config: cfg,
        grid: an.area.grid,
        counts: r.counts,
        b1: r.b1,
        valid: r.valid,
        invalid_reason: r.invalid_reason,
        genus: r.genus,
        euler: r.euler,
        weak_ok: r.weak_ok,
        strong_q: r.strong_q,
        detections: an.detections.points,
    };
    write_json(&out("report.json"), &report)?;
    let [c0, c1, c2] = report.counts;
    match report.genus {
        Some(g) => println!("counts {c0}/{c1}/{c2}, genus {g}"),
        None => println!("counts {c0}/{c1}/{c2}, no valid genus ({:?})", report.invalid_reason),
    }
    Ok(())
}

fn run_bootstrap(file: &FileConfig, out_dir: &Path, a: BootstrapArgs) -> Result<()> {
    let source = Source::resolve(file, a.surface, a.input)?
        .ok_or_else(|| Error::Param("bootstrap needs --surface or --input".into()))?;
    let mode = match file.pick(a.mode, "mode")? {
        Some(m) => m.parse()?,
        None if matches!(source, Source::Surface(_)) => Mode::MonteCarlo,
        None => Mode::Bootstrap,
    };
    let b = file.pick(a.replicates, "replicates")?.unwrap_or(DEFAULT_REPLICATES);
    let s = sample_settings(file, a.sample)?;
    let cfg = config::pipeline_config(file, pipeline_flags(a.pipeline))?;
    let schedule = config::schedule(file, a.serial)?;

    let report = match (&source, mode) {
        (Source::Surface(kind), Mode::MonteCarlo) => {
            let spec = kind.default_spec();
            let dist = monte_carlo(&spec, s.n, s.sigma, b, s.seed, &cfg, schedule)?;
            RunReport::new(Some(spec), s.n, s.sigma, s.seed, dist)
        }
        (Source::Input(path), Mode::Bootstrap) => {
            let cloud = read_cloud_csv(path)?;
            let dist = bootstrap(&cloud, b, s.seed, &cfg, schedule)?;
            RunReport::new(None, cloud.len(), 0.0, s.seed, dist)
        }
        (Source::Surface(_), Mode::Bootstrap) => {
            return Err(Error::Param("bootstrap mode resamples a cloud; give --input".into()))
        }
        (Source::Input(_), Mode::MonteCarlo) => {
            return Err(Error::Param("montecarlo mode draws from a surface; give --surface".into()))
        }
    };
    let label = source.label();
    write_json(&out_dir.join(format!("{label}.results.json")), &report)?;
    write_histogram_csv(&out_dir.join(format!("{label}.histogram.csv")), &report)?;
    println!(
        "{} replicates, modal genus {}, invalid rate {:.3}",
        report.b,
        report.modal_genus.map_or("none".into(), |g| g.to_string()),
        report.invalid_rate
    );
    Ok(())
}

fn oracle(file: &FileConfig, out_dir: &Path, a: OracleArgs) -> Result<()> {
    let source = Source::resolve(file, a.surface, a.input)?
        .ok_or_else(|| Error::Param("oracle needs --input or --surface".into()))?;
    let subsample = file.pick(a.subsample, "subsample")?;
    let mut cloud = match &source {
        Source::Input(p) => read_cloud_csv(p)?,
        Source::Surface(kind) => {
            let s = sample_settings(file, a.sample)?;
            let clean = sample_surface(&kind.default_spec(), s.n, s.seed)?;
            add_noise(&clean, s.sigma, noise_seed(s.seed), NoiseMode::Height)?
        }
    };
    let target = match (&source, subsample) {
        (_, Some(m)) => Some(m),
        (Source::Surface(_), None) => Some(DEFAULT_POINT_LIMIT),
        (Source::Input(_), None) => None,
    };
    if let Some(m) = target {
        if m == 0 {
            return Err(Error::Param("subsample size must be positive".into()));
        }
        cloud = PointCloud::new(farthest_point_subsample(&cloud.points, m));
    }
    if cloud.len() > DEFAULT_POINT_LIMIT {
        return Err(Error::SizeLimit(format!(
            "{} points exceed the oracle limit of {DEFAULT_POINT_LIMIT}; use --subsample",
            cloud.len()
        )));
    }
    let lo = match file.pick(a.eps_min, "eps_min")? {
        Some(v) => v,
        None => median_nn_distance(&cloud.points)
            .ok_or_else(|| Error::Input("the oracle needs at least two points".into()))?,
    };
    let hi = file.pick(a.eps_max, "eps_max")?.unwrap_or(5.0 * lo);
    let steps = file.pick(a.eps_steps, "eps_steps")?.unwrap_or(DEFAULT_EPS_STEPS);
    let up_to = file.pick(a.up_to_dim, "up_to_dim")?.unwrap_or(1);
    let sweep = epsilon_sweep(&cloud.points, lo, hi, steps, up_to)?;

    let label = source.label();
    if a.dump_complex {
        let eps = (sweep.stable_from * sweep.stable_to).sqrt();
        let cx = build_vr(&cloud.points, eps, up_to + 1)?;
        write_json(&out_dir.join(format!("{label}.complex.json")), &cx)?;
    }
    let report = OracleReport {
        source: match &source {
            Source::Input(p) => p.display().to_string(),
            Source::Surface(k) => k.name().to_string(),
        },
        points: cloud.len(),
        up_to_dim: up_to,
        genus: sweep.stable.0.get(1).map(|b1| b1 / 2),
        stable_betti: sweep.stable,
        stable_from: sweep.stable_from,
        stable_to: sweep.stable_to,
        sweep: sweep.rows,
    };
    write_json(&out_dir.join(format!("{label}.oracle.json")), &report)?;
    println!(
        "stable betti {:?} on [{:.4}, {:.4}]",
        report.stable_betti.0, report.stable_from, report.stable_to
    );
    Ok(())
}
