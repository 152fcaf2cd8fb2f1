//! `m2ols`: generate instances, run recoveries and sweeps, and check the
//! recovery guarantees from the command line.
//!
//! Stdout carries exactly one JSON document per invocation. Progress and
//! human-readable summaries go to stderr.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "m2ols", version, about = "Greedy sparse recovery toolkit")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random unit-norm sensing matrix to a CSV file.
    GenMatrix(GenMatrixArgs),
    /// Write a random K-sparse signal to a CSV file.
    GenSignal(GenSignalArgs),
    /// Recover a sparse signal from a matrix and a signal or measurement file.
    Recover(RecoverArgs),
    /// Run a Monte-Carlo sweep described by a TOML file.
    Sweep(SweepArgs),
    /// Restricted isometry constant of a matrix, exact or sampled.
    Ric(RicArgs),
    /// Check the RIP lemmas or the recovery theorems on random instances.
    Check(CheckArgs),
    /// Per-iteration proof quantities for one recovery with known ground truth.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Debug)]
struct GenMatrixArgs {
    /// Number of rows.
    #[arg(long)]
    m: usize,
    /// Number of columns.
    #[arg(long)]
    n: usize,
    /// Upper end of the per-column uniform offset; 0 gives a Gaussian matrix.
    #[arg(long = "corr-T", visible_alias = "corr-t", default_value_t = 0.0)]
    corr_t: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ValuesArg {
    Gaussian,
    Rademacher,
}

#[derive(Args, Debug)]
struct GenSignalArgs {
    /// Ambient dimension.
    #[arg(long)]
    n: usize,
    /// Sparsity.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Distribution of the nonzero values.
    #[arg(long, value_enum, default_value_t = ValuesArg::Gaussian)]
    values: ValuesArg,
    #[arg(long)]
    out: PathBuf,
    /// Also write the noiseless measurements y = A x using this matrix.
    #[arg(long, requires = "y_out")]
    matrix: Option<PathBuf>,
    /// Destination of the measurements; requires --matrix.
    #[arg(long, requires = "matrix")]
    y_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AlgArg {
    Omp,
    Ols,
    Gomp,
    Mols,
    M2ols,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("input").required(true).args(["signal", "y"])))]
struct RecoverArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Ground-truth signal; measurements are y = A x (plus noise with --snr).
    #[arg(long)]
    signal: Option<PathBuf>,
    /// Measurement vector file.
    #[arg(long)]
    y: Option<PathBuf>,
    #[arg(long, value_enum)]
    alg: AlgArg,
    /// Sparsity K.
    #[arg(long)]
    k: usize,
    /// Preselection size N (gomp, m2ols).
    #[arg(long)]
    big_n: Option<usize>,
    /// Indices identified per iteration L (mols, m2ols).
    #[arg(long)]
    l: Option<usize>,
    /// Stop once the residual norm falls below eps times the norm of y.
    #[arg(long, default_value_t = m2ols_core::greedy::DEFAULT_EPSILON)]
    eps: f64,
    /// Iteration cap [default: K].
    #[arg(long)]
    max_iter: Option<usize>,
    /// Add Gaussian noise at this signal-to-noise ratio (needs --signal).
    #[arg(long, requires = "signal")]
    snr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
    /// Include the per-iteration trace in the output.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Sweep description (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Result file; a .json extension selects JSON, anything else CSV.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads [default: all cores]. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct RicArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Sparsity order k.
    #[arg(long)]
    order: usize,
    /// Sample this many supports for a lower bound instead of enumerating.
    #[arg(long)]
    samples: Option<u64>,
    /// Seed for --samples.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest number of supports exact enumeration may visit.
    #[arg(long, default_value_t = m2ols_core::analysis::ric::DEFAULT_ENUMERATION_BUDGET)]
    budget: u128,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("which").required(true).args(["lemmas", "theorem1", "theorem2"])))]
struct CheckArgs {
    /// RIP lemma bounds on random dictionaries (or on --matrix).
    #[arg(long)]
    lemmas: bool,
    /// Noiseless recovery guarantee on certified random instances.
    #[arg(long)]
    theorem1: bool,
    /// Noisy recovery guarantee on certified random instances.
    #[arg(long)]
    theorem2: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random trials per order (--lemmas) or certified instances wanted
    /// (theorems) [default: 100 for --lemmas, 25 otherwise].
    #[arg(long)]
    trials: Option<usize>,
    /// Number of random dictionaries for --lemmas.
    #[arg(long, default_value_t = 50, conflicts_with = "matrix")]
    dictionaries: usize,
    /// Rows of the random dictionaries [default: 6 for --lemmas, 128 otherwise].
    #[arg(long)]
    m: Option<usize>,
    /// Columns of the random --lemmas dictionaries.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Check the lemmas on this matrix instead of random ones.
    #[arg(long, requires = "lemmas")]
    matrix: Option<PathBuf>,
    /// Attempt budget for certifying theorem instances.
    #[arg(long, default_value_t = 2000)]
    max_attempts: usize,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    signal: PathBuf,
    #[arg(long, value_enum)]
    alg: AlgArg,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    big_n: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long, default_value_t = m2ols_core::greedy::DEFAULT_EPSILON)]
    eps: f64,
    /// Add Gaussian noise at this signal-to-noise ratio.
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();

    match commands::dispatch(cli.command) {
        Ok(payload) => {
            let text = serde_json::to_string_pretty(&payload).expect("JSON values serialize");
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}").and_then(|_| out.flush()) {
                Ok(()) => ExitCode::SUCCESS,
                // A closed reader (`| head`) is not a failure of the command.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: writing output: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
