use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multisense_core::experiments::ExperimentSampling;
use multisense_core::{BasisKind, EntryDist, ProfileFamily, SamplingMode};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "multisense",
    version,
    about = "Multi-sensor compressed sensing experiments",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum Command {
    /// Sweep the sensor count and tabulate the squared constants.
    ConstantsSweep(ConstantsSweepArgs),
    /// Empirical phase transition of noiseless l1 recovery.
    PhaseTransition(PhaseTransitionArgs),
    /// Asymmetric restricted isometry constants of an ensemble.
    AricCheck(AricCheckArgs),
    /// Draw an ensemble, a sparse signal and its measurements.
    Ensemble(EnsembleArgs),
    /// Decode a measurement vector.
    Recover(RecoverArgs),
    /// Summarize the runs recorded in an output directory.
    Report(ReportArgs),
    /// Re-run recorded manifests and compare output digests.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ConstantsSweep(_) => "constants-sweep",
            Command::PhaseTransition(_) => "phase-transition",
            Command::AricCheck(_) => "aric-check",
            Command::Ensemble(_) => "ensemble",
            Command::Recover(_) => "recover",
            Command::Report(_) => "report",
            Command::Replay(_) => "replay",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::ConstantsSweep(a) => &a.common,
            Command::PhaseTransition(a) => &a.common,
            Command::AricCheck(a) => &a.common,
            Command::Ensemble(a) => &a.common,
            Command::Recover(a) => &a.common,
            Command::Report(a) => &a.common,
            Command::Replay(a) => &a.common,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::ConstantsSweep(a) => a.seed,
            Command::PhaseTransition(a) => Some(a.seed),
            Command::AricCheck(a) => a.generate.seed,
            Command::Ensemble(a) => a.generate.seed,
            _ => None,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Output directory; nothing is written outside it.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write SVG plots derived from the CSV outputs.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AricMethodArg {
    /// Exhaustive when the subset count is within the guard, else sampled.
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstantsSweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "partitioned")]
    pub family: ProfileFamily,
    #[arg(long, default_value = "fourier")]
    pub basis: BasisKind,
    /// Sensor counts, comma separated.
    #[arg(
        long = "C",
        alias = "sensors",
        value_delimiter = ',',
        default_value = "1,2,4,8,16"
    )]
    pub sensors: Vec<usize>,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Required for random families.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use the family's vectors as circulant eigenvalues.
    #[arg(long)]
    pub circulant: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct PhaseTransitionArgs {
    #[command(flatten)]
    pub common: Common,
    /// Signal dimension [default: 64, or 128 with --full].
    #[arg(long)]
    pub n: Option<usize>,
    /// Grid resolution per axis [default: 16, or 50 with --full].
    #[arg(long)]
    pub grid: Option<usize>,
    /// Trials per cell [default: 10, or 20 with --full].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Full-size protocol defaults.
    #[arg(long)]
    pub full: bool,
    #[arg(
        long = "C",
        alias = "sensors",
        value_delimiter = ',',
        default_value = "1,2,4"
    )]
    pub sensors: Vec<usize>,
    #[arg(long, default_value = "global")]
    pub family: ProfileFamily,
    #[arg(long, default_value = "canonical")]
    pub basis: BasisKind,
    #[arg(long, default_value = "distinct")]
    pub mode: ExperimentSampling,
    #[arg(long, default_value = "gaussian")]
    pub dist: EntryDist,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Reuse one measurement matrix for all trials of a cell.
    #[arg(long)]
    pub shared_ensemble: bool,
    #[arg(long)]
    pub circulant: bool,
    #[arg(long, default_value_t = 20_000)]
    pub max_iter: usize,
    #[arg(long)]
    pub seed: u64,
}

/// Parameters that define a generated ensemble.
#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Total measurements.
    #[arg(long)]
    pub m: Option<usize>,
    /// Per-sensor measurements for distinct-varied sampling, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub rows: Vec<usize>,
    #[arg(long = "C", alias = "sensors", default_value_t = 1)]
    pub sensors: usize,
    #[arg(long, default_value = "partitioned")]
    pub family: ProfileFamily,
    #[arg(long, default_value = "canonical")]
    pub basis: BasisKind,
    #[arg(long, default_value = "distinct")]
    pub mode: SamplingMode,
    #[arg(long, default_value = "gaussian")]
    pub dist: EntryDist,
    #[arg(long)]
    pub circulant: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct AricCheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// Read the matrix from an ensemble file instead of generating it.
    #[arg(long)]
    pub ensemble: Option<PathBuf>,
    #[command(flatten)]
    pub generate: GenerateArgs,
    /// Orders to evaluate, comma separated.
    #[arg(
        long = "s",
        alias = "orders",
        value_delimiter = ',',
        default_value = "1,2"
    )]
    pub orders: Vec<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: AricMethodArg,
    /// Random supports per order for the sampled method.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub generate: GenerateArgs,
    /// Sparsity of the generated test signal.
    #[arg(long = "s", alias = "sparsity", default_value_t = 2)]
    pub sparsity: usize,
    /// Norm of the additive measurement noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub ensemble: PathBuf,
    /// Measurement vector CSV with columns re,im.
    #[arg(long)]
    pub y: PathBuf,
    /// Optional ground truth CSV for error reporting.
    #[arg(long)]
    pub x_true: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub primal_tol: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub feasibility_tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
    /// Directory holding the CSV outputs to summarize [default: --out].
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    #[command(flatten)]
    pub common: Common,
    /// Manifest to replay [default: <out>/manifest.jsonl].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Replay only this entry (0-based line index).
    #[arg(long)]
    pub index: Option<usize>,
}
