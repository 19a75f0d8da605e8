use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hhcr_core::Algorithm;

pub const CONFIG_ENV: &str = "HHCR_CONFIG";

#[derive(Debug, Parser)]
#[command(
    name = "hhcr",
    version,
    about = "Home-care rescheduling solver and benchmark harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one algorithm on one instance with consecutive seeds.
    Solve(SolveArgs),
    /// Full-factorial runs over instances, mu, lambda and algorithms.
    Grid(GridArgs),
    /// Write the original and rescheduling models as LP files.
    Export(ExportArgs),
    /// Join external exact objectives against a summary CSV.
    Gap(GapArgs),
    /// Exact optimum by exhaustive search (at most 12 customers).
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long, env = CONFIG_ENV, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Rejection cost; defaults to the mean payment of new customers.
    #[arg(long)]
    pub rejection_cost: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Instance file in the OP benchmark layout.
    #[arg(long, value_name = "PATH")]
    pub instance: PathBuf,
    /// Number of existing customers.
    #[arg(long)]
    pub ne: usize,
    /// Number of new customers.
    #[arg(long)]
    pub nn: usize,
    /// Name used in reports; defaults to the file stem.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Instance file in the OP benchmark layout (needs --ne and --nn).
    #[arg(long, value_name = "PATH", requires_all = ["ne", "nn"])]
    pub instance: Option<PathBuf>,
    /// List file with one `path ne nn [name]` entry per line.
    #[arg(long, value_name = "PATH")]
    pub instances: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub inst: InstanceArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub repeats: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "ma2")]
    pub algo: Algorithm,
    /// Directory for runs.csv and summary.csv.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Directory for iteration traces of the first run.
    #[arg(long, value_name = "DIR")]
    pub trace: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Write 0 instead of wall time so outputs are byte-stable.
    #[arg(long)]
    pub no_time: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// List file with one `path ne nn [name]` entry per line.
    #[arg(long, value_name = "PATH")]
    pub instances: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.9, 1.0])]
    pub mu: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])]
    pub lambda: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "ma2")]
    pub algos: Vec<Algorithm>,
    #[arg(long, default_value_t = 10)]
    pub repeats: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub no_time: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub ne: Option<usize>,
    #[arg(long)]
    pub nn: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GapArgs {
    /// External results CSV with `instance,exact_obj` (optional mu, lambda).
    #[arg(long, value_name = "PATH")]
    pub results: PathBuf,
    /// Summary CSV written by `solve` or `grid`.
    #[arg(long, value_name = "PATH")]
    pub summary: PathBuf,
    /// Output CSV; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub ne: Option<usize>,
    #[arg(long)]
    pub nn: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Output CSV `instance,exact_obj`; stdout lines only when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
