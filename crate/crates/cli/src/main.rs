//! `gt`: command-line front end to the group testing toolkit.
//!
//! Exit codes: 0 success, 1 parameter or usage error, 2 verification
//! failure, 3 I/O error.

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Param(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Param(_) => 1,
            CliError::Verify(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<gtkit::Error> for CliError {
    fn from(e: gtkit::Error) -> Self {
        match &e {
            gtkit::Error::Io(_) => CliError::Io(e.to_string()),
            gtkit::Error::Csv(c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => CliError::Io(e.to_string()),
            gtkit::Error::Json(j) if j.is_io() => CliError::Io(e.to_string()),
            _ => CliError::Param(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "gt", version, about = "Non-adaptive group testing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a pooling design (and optionally a defective set and its outcomes).
    Design(DesignArgs),
    /// Decode an outcome vector against a design.
    Decode(DecodeArgs),
    /// Run a Monte Carlo sweep and write the per-(T, algorithm) CSV.
    Simulate(SimulateArgs),
    /// SNR and f(N, k) tables.
    #[command(subcommand)]
    Theory(TheoryCommand),
    /// Run the oracle and identity suite.
    Verify(VerifyArgs),
    /// Render a sweep CSV as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// bernoulli, constant_column or near_constant_column.
    #[arg(long)]
    pub kind: String,
    /// Number of items N.
    #[arg(long = "n")]
    pub n_items: usize,
    /// Number of tests T.
    #[arg(long = "t")]
    pub n_tests: usize,
    /// Inclusion probability (Bernoulli); defaults to 1/(k+1) when --k is given.
    #[arg(long)]
    pub p: Option<f64>,
    /// Column weight (column designs); defaults to floor((T/k) ln 2) when --k is given.
    #[arg(long = "L")]
    pub column_weight: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    /// Number of defectives, used for default parameters and --defectives-out.
    #[arg(long)]
    pub k: Option<usize>,
    /// Output path for the design JSON; stdout when absent.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    /// Also sample a defective set of size --k and write it here.
    #[arg(long, requires = "k")]
    pub defectives_out: Option<PathBuf>,
    /// Write the outcomes of the sampled defective set here.
    #[arg(long, requires = "defectives_out")]
    pub outcomes_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Design JSON file.
    #[arg(long)]
    pub design: PathBuf,
    /// Outcome JSON file ({"bits": [...]}).
    #[arg(long)]
    pub outcomes: PathBuf,
    /// comp, dd, scomp or wscomp.
    #[arg(long, default_value = "wscomp")]
    pub algo: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Include the greedy iteration trace in the output.
    #[arg(long)]
    pub trace: bool,
    /// Output path; stdout when absent.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Sweep configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV; stdout when absent.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    /// Master seed; overrides `master_seed` in the config. One of the two is required.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum TheoryCommand {
    /// Weighted and unweighted per-test SNR and moments at p = 1/(k+1).
    Snr(SnrArgs),
    /// f(N, k) grid as CSV.
    F(FGridArgs),
}

#[derive(Debug, Args)]
pub struct SnrArgs {
    #[arg(long = "n")]
    pub n_items: usize,
    #[arg(long)]
    pub k: usize,
    /// Inclusion probability; 1/(k+1) when absent.
    #[arg(long)]
    pub p: Option<f64>,
    /// Also print the aggregated SNR and the bounds at this many tests.
    #[arg(long = "t")]
    pub n_tests: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FGridArgs {
    #[arg(long)]
    pub k_max: usize,
    #[arg(long)]
    pub n_span: usize,
    /// Output CSV; stdout when absent.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Largest N of the enumeration oracle (at most 16).
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    /// Largest N of the identity grid.
    #[arg(long, default_value_t = 200)]
    pub identity_n_max: usize,
    /// Largest k of the identity grid.
    #[arg(long, default_value_t = 20)]
    pub identity_k_max: usize,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Sweep CSV produced by `gt simulate`.
    #[arg(long)]
    pub input: PathBuf,
    /// success_prob, mean_fn, mean_fp, jaccard, f1 or delta.
    #[arg(long, default_value = "success_prob")]
    pub metric: String,
    /// Draw the counting bound as a dashed line.
    #[arg(long)]
    pub overlay_bound: bool,
    /// Restrict the x axis to [LO, HI].
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub zoom: Option<Vec<usize>>,
    /// Trailing moving-average window applied to every series.
    #[arg(long)]
    pub smooth: Option<usize>,
    #[arg(short = 'o', long)]
    pub output: PathBuf,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Design(a) => commands::design(&a),
        Command::Decode(a) => commands::decode(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Theory(TheoryCommand::Snr(a)) => commands::theory_snr(&a),
        Command::Theory(TheoryCommand::F(a)) => commands::theory_f(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Plot(a) => commands::plot(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
