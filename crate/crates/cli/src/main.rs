//! `emoblog`: simulate, infer, analyze, communities and circumplex pipelines.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "emoblog", version, about = "Emotional blogging simulator and analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the agent-based simulation.
    Simulate(SimulateArgs),
    /// Estimate model inputs from an event log.
    Infer(InferArgs),
    /// Time series, spectra, degree statistics and circumplex maps.
    Analyze(AnalyzeArgs),
    /// Spectral communities of a projected network.
    Communities(CommunitiesArgs),
    /// Circumplex occupancy maps of the logged emotions.
    Circumplex(CircumplexArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub steps: Option<u64>,
    /// `constant:<p>`, `synthetic` or `empirical:<csv>`.
    #[arg(long)]
    pub driving: Option<String>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InferWhat {
    Delay,
    Lifetime,
    Mu,
    G,
    Arrivals,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Event log CSV.
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long, value_enum)]
    pub what: InferWhat,
    /// Exposure window in bins, used by `--what mu`.
    #[arg(long, default_value_t = 576)]
    pub t0: u64,
    /// Bin width for `--what arrivals`.
    #[arg(long, default_value_t = 1)]
    pub bin_width: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Event log CSV.
    #[arg(long)]
    pub log: PathBuf,
    /// Edge list CSV, needed by `--degrees` and `--assortativity`.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Series to transform (`N_c`, `N_plus`, `N_minus`, `Q`, `N_ap`, `N_au`); repeatable.
    #[arg(long)]
    pub spectrum: Vec<String>,
    /// Fit range `lo,hi` in bins^-1.
    #[arg(long, default_value = "0.0005,0.041666666666666664")]
    pub fit_range: String,
    /// Log-binning factor of the spectrum.
    #[arg(long, default_value_t = 1.3)]
    pub log_bin: f64,
    /// Average the periodogram over this many equal segments.
    #[arg(long, default_value_t = 1)]
    pub segments: usize,
    /// Skip bins before this one (for example the initial-condition bin 0).
    #[arg(long, default_value_t = 0)]
    pub from_bin: usize,
    #[arg(long)]
    pub degrees: bool,
    #[arg(long)]
    pub assortativity: bool,
    /// `all`, or an assignment CSV `(node, community)` for per-community maps.
    #[arg(long)]
    pub circumplex: Option<String>,
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Args)]
pub struct CommunitiesArgs {
    /// Edge list CSV.
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long, default_value = "agents")]
    pub partition: String,
    /// Keep nodes whose bipartite degree exceeds this.
    #[arg(long, default_value_t = 0)]
    pub min_degree: usize,
    /// Keep nodes whose bipartite strength exceeds this.
    #[arg(long, default_value_t = 0)]
    pub min_strength: u64,
    #[arg(long, default_value = "min")]
    pub commons: String,
    /// Number of low eigenpairs to compute.
    #[arg(long, default_value_t = 12)]
    pub kmax: usize,
    #[arg(long, default_value_t = emoblog::communities::DEFAULT_DENSE_LIMIT)]
    pub dense_limit: usize,
    #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
    pub solver: SolverArg,
    /// Seed of the centroid clustering.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CircumplexArgs {
    /// Event log CSV.
    #[arg(long)]
    pub log: PathBuf,
    /// Assignment CSV `(node, community)`; maps are then written per community.
    #[arg(long)]
    pub communities: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Infer(a) => commands::infer(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Communities(a) => commands::communities(&a),
        Command::Circumplex(a) => commands::circumplex(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.category.as_str(), e.message);
            ExitCode::from(e.category.exit_code())
        }
    }
}
