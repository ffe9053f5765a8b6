//! `critset`: analyse critical points of two-layer networks from the command
//! line.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad input, 3 numerical
//! failure.

mod commands;
mod problem;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<critset::Error> for CliError {
    fn from(e: critset::Error) -> Self {
        match e {
            critset::Error::InvalidArgument(m) => CliError::Input(m),
            critset::Error::Domain(m) | critset::Error::NotApplicable(m) => CliError::Check(m),
            critset::Error::Numerical(m) => CliError::Numeric(m),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "critset", version, about = "Critical sets and saddles of two-layer networks")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Gradient norm up to which a point counts as critical.
    #[arg(long, global = true)]
    pub tol_grad: Option<f64>,
    /// Relative eigenvalue cutoff (times the spectral radius).
    #[arg(long, global = true)]
    pub tol_eig: Option<f64>,
    /// Box `lo,hi` used in every coordinate for manifold tracing and zero
    /// search.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub region: Option<String>,
    /// Evaluation budget for manifold tracing and zero search.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Width of the network to describe or embed into.
    #[arg(long, global = true)]
    pub m_target: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// List every permutation of each branch instead of one per orbit.
    #[arg(long, global = true)]
    pub expand_permutations: bool,
}

#[derive(Debug, Clone, Args)]
pub struct Input {
    /// Problem file (TOML).
    #[arg(long)]
    pub problem: PathBuf,
    /// Name of the point to use; defaults to the first one.
    #[arg(long)]
    pub point: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gradient, Hessian spectrum, classification and branch of each point.
    Analyze(Input),
    /// Pieces of the critical set representing the point's output function.
    Atlas {
        #[command(flatten)]
        input: Input,
        /// CSV file for the traced zero set; defaults to the report path with
        /// extension `csv`.
        #[arg(long)]
        trace_csv: Option<PathBuf>,
    },
    /// Minimal reduction of a point.
    Reduce(Input),
    /// Critical embedding into width `--m-target`.
    Embed {
        #[command(flatten)]
        input: Input,
        /// Number of appended zero-output neurons.
        #[arg(long, default_value_t = 0)]
        zero_neurons: usize,
    },
    /// Saddle certificate for a point.
    Saddle {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1e-3)]
        radius: f64,
    },
    /// Sequence of critical points joining the point's branch to another.
    Connect {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        /// Interval to concentrate; defaults to the first with two or more
        /// neurons.
        #[arg(long)]
        interval: Option<usize>,
    },
    /// Runs the golden checks on the exponential four-sample example.
    VerifyExample {
        /// Replace the built-in example by this problem file.
        #[arg(long)]
        problem: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match &cli.command {
        Command::Analyze(input) => commands::analyze(g, input),
        Command::Atlas { input, trace_csv } => commands::atlas(g, input, trace_csv.as_deref()),
        Command::Reduce(input) => commands::reduce(g, input),
        Command::Embed { input, zero_neurons } => commands::embed(g, input, *zero_neurons),
        Command::Saddle { input, radius } => commands::saddle(g, input, *radius),
        Command::Connect { input, n_max, interval } => commands::connect(g, input, *n_max, *interval),
        Command::VerifyExample { problem } => commands::verify_example(g, problem.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("critset: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
