//! Command-line driver: argument parsing, thread-pool setup, and exit-code
//! mapping. Exit 0 on success, 1 on usage errors, 2 on data errors, 3 on
//! numerical failures.

mod commands;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bapmnmf",
    version,
    about = "Bayesian probit multi-study NMF: fit, simulate, evaluate, match"
)]
struct Cli {
    /// Worker threads (default: BAPMNMF_THREADS or hardware parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the model to one or more per-study counts files.
    Fit(FitArgs),
    /// Generate synthetic datasets with ground truth from a scenario file.
    Simulate(SimulateArgs),
    /// Score fitted outputs against simulated ground truth.
    Evaluate(EvaluateArgs),
    /// Cosine-similarity table between two signature matrices.
    Match(MatchArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Counts file per study; command-line order defines the study index.
    #[arg(long = "counts", required = true, num_args = 1..)]
    pub counts: Vec<String>,
    /// Covariate file for one study, as INDEX=PATH with 1-based index.
    #[arg(long = "covariates")]
    pub covariates: Vec<String>,
    /// Reference catalog; enables recovery-discovery mode.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Flat key=value configuration file.
    #[arg(long)]
    pub config: Option<String>,
    /// Rank cap: total signatures (discovery) or discovered signatures
    /// (recovery-discovery; defaults to 0 there).
    #[arg(long)]
    pub rank: Option<usize>,
    /// Seed for initialization (defaulted and logged when omitted).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Resume from a checkpoint archive instead of initializing.
    #[arg(long)]
    pub resume: Option<String>,
    #[arg(long)]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario specification (TOML).
    #[arg(long)]
    pub spec: String,
    /// Master seed; replicate seeds are split from it.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub replicates: u64,
    #[arg(long)]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Fit output directory; repeat for replicates, paired with --truth.
    #[arg(long = "fit", required = true)]
    pub fits: Vec<String>,
    /// Ground-truth directory; give one per --fit or a single shared one.
    #[arg(long = "truth", required = true)]
    pub truths: Vec<String>,
    /// Capture threshold on cosine similarity.
    #[arg(long, default_value_t = 0.8)]
    pub threshold: f64,
    #[arg(long)]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// First signature matrix (rows of the emitted table).
    #[arg(long)]
    pub a: String,
    /// Second signature matrix (columns).
    #[arg(long)]
    pub b: String,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<String>,
}

fn configure_threads(threads: Option<usize>) -> Result<(), String> {
    let n = match threads {
        Some(n) => Some(n),
        None => match std::env::var("BAPMNMF_THREADS") {
            Ok(v) => Some(
                v.parse::<usize>()
                    .map_err(|_| format!("BAPMNMF_THREADS='{v}' is not a thread count"))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err("thread count must be at least 1".into());
        }
        bapmnmf::parallel::configure_threads(n);
    } else {
        bapmnmf::parallel::set_sequential(false);
    }
    Ok(())
}

fn exit_code_for(err: &bapmnmf::Error) -> i32 {
    if err.is_data_error() {
        EXIT_DATA
    } else {
        EXIT_NUMERICAL
    }
}

/// Parses and runs a full command line (excluding the program name is fine;
/// include it when forwarding `std::env::args`).
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = configure_threads(cli.threads) {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    let outcome = match cli.command {
        Command::Fit(args) => commands::fit::run(&args, &argv),
        Command::Simulate(args) => commands::simulate::run(&args, &argv),
        Command::Evaluate(args) => commands::evaluate::run(&args, &argv),
        Command::Match(args) => commands::match_cmd::run(&args),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(commands::CommandError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(commands::CommandError::Core(e)) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
