//! `morsegenus` command-line tool.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use morsegenus::Error;

/// Genus estimation of sampled surfaces from the critical points of the
/// height function.
///
/// Settings are read from command-line flags first, then from the
/// MORSEGENUS_OUT_DIR environment variable (output directory only), then from
/// the `--config` file, then from built-in defaults.
///
/// Exit codes: 0 success, 1 invalid arguments, 2 I/O failure, 3 unparsable
/// input or config, 4 every replicate degenerate, 5 cloud too large for the
/// oracle.
#[derive(Parser, Debug)]
#[command(name = "morsegenus", version)]
pub struct Cli {
    /// Flat `key = value` config file; keys match the long flag names with
    /// underscores (e.g. `eps_min = 0.5`) and `#` starts a comment.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory for all output files [default: current directory].
    #[arg(long, global = true, env = "MORSEGENUS_OUT_DIR", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a noisy point cloud from one of the built-in surfaces.
    Generate(GenerateArgs),
    /// Run the pipeline once on a point cloud and write every intermediate series.
    Analyze(AnalyzeArgs),
    /// Genus distribution over repeated draws or bootstrap resamples.
    Bootstrap(BootstrapArgs),
    /// Betti numbers of Vietoris-Rips complexes over a range of scales.
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Default)]
pub struct SampleFlags {
    /// Number of points to draw [default: 5000].
    #[arg(long)]
    pub n: Option<usize>,

    /// Standard deviation of the added Gaussian noise [default: 0.1].
    #[arg(long)]
    pub sigma: Option<f64>,

    /// Random seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct PipelineFlags {
    /// Spacing of the height grid [default: 0.5].
    #[arg(long)]
    pub step: Option<f64>,

    /// Template window length in grid nodes, odd and at least 5 [default: 9].
    #[arg(long)]
    pub window: Option<usize>,

    /// Minimum feature contrast as a fraction of the range of S' [default: 0.1].
    #[arg(long)]
    pub gate: Option<f64>,

    /// Residual threshold rule: `fixed` cut-offs, or `std` to cut at one
    /// standard deviation of each residual series [default: fixed].
    #[arg(long, value_name = "RULE")]
    pub threshold: Option<String>,

    /// Relative-residual cut-off for step templates under the fixed rule [default: 0.33].
    #[arg(long)]
    pub step_cut: Option<f64>,

    /// Relative-residual cut-off for the cusp template under the fixed rule [default: 0.75].
    #[arg(long)]
    pub cusp_cut: Option<f64>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Surface to sample: dimpled-sphere, torus, dimpled-torus, two-torus.
    #[arg(long)]
    pub surface: Option<String>,

    #[command(flatten)]
    pub sample: SampleFlags,

    /// Noise direction: `height` (z only) or `isotropic` [default: height].
    #[arg(long)]
    pub noise: Option<String>,

    /// Output CSV path; the provenance sidecar goes next to it with a .json
    /// extension [default: OUT_DIR/SURFACE_nN_sSEED.csv].
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Point cloud CSV with `x,y,z` columns.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,

    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(Args, Debug)]
pub struct BootstrapArgs {
    /// Draw fresh clouds from this surface for every replicate.
    #[arg(long, conflicts_with = "input")]
    pub surface: Option<String>,

    /// Resample this point cloud CSV with replacement for every replicate.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// `montecarlo` (needs --surface) or `bootstrap` (needs --input)
    /// [default: chosen from the source].
    #[arg(long)]
    pub mode: Option<String>,

    /// Number of replicates B [default: 100].
    #[arg(long, short = 'B')]
    pub replicates: Option<usize>,

    #[command(flatten)]
    pub sample: SampleFlags,

    #[command(flatten)]
    pub pipeline: PipelineFlags,

    /// Run replicates one after another instead of on the thread pool.
    /// Results are identical either way.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// Point cloud CSV; clouds above 400 points need --subsample.
    #[arg(long, value_name = "FILE", conflicts_with = "surface")]
    pub input: Option<PathBuf>,

    /// Sample this surface, then reduce to --subsample points [default: 400].
    #[arg(long)]
    pub surface: Option<String>,

    #[command(flatten)]
    pub sample: SampleFlags,

    /// Reduce the cloud to this many points by farthest-point sampling.
    #[arg(long, value_name = "M")]
    pub subsample: Option<usize>,

    /// Smallest scale of the sweep [default: median nearest-neighbour distance].
    #[arg(long)]
    pub eps_min: Option<f64>,

    /// Largest scale of the sweep [default: 5 x eps-min].
    #[arg(long)]
    pub eps_max: Option<f64>,

    /// Number of geometrically spaced scales [default: 24].
    #[arg(long)]
    pub eps_steps: Option<usize>,

    /// Highest homology dimension to compute, 0 to 2 [default: 1].
    #[arg(long)]
    pub up_to_dim: Option<usize>,

    /// Also write the complex at the middle of the stable range as JSON.
    #[arg(long)]
    pub dump_complex: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Json(_) => 2,
        Error::Parse { .. } => 3,
        Error::Degenerate(_) => 4,
        Error::SizeLimit(_) => 5,
        Error::Param(_) | Error::Input(_) | Error::Inconsistent(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
