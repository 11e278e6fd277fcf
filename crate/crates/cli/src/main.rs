//! `tailscore`: evaluate tail risk measures, score forecasts, fit, backtest
//! and run verification suites.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tailscore::grid::Axis;

/// Exit code for unreadable or invalid input.
pub const EXIT_INPUT: u8 = 2;
/// Exit code for a failed verification suite.
pub const EXIT_VERIFY: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "tailscore",
    version,
    about = "Scores, identification functions and oracles for tail risk measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Risk measures of the empirical distribution of column `y`.
    Eval(EvalArgs),
    /// Per-row scores of a forecast file plus their mean.
    Score(ScoreArgs),
    /// M- or Z-estimation from a sample in column `y`.
    Fit(FitArgs),
    /// Calibration test (one input) or comparative test (two inputs).
    Backtest(BacktestArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Levels {
    #[arg(long = "level-p")]
    pub level_p: Option<f64>,
    #[arg(long = "level-q")]
    pub level_q: Option<f64>,
    /// Expectile level.
    #[arg(long)]
    pub tau: Option<f64>,
}

/// Score or identification family, given by flags or a JSON config.
#[derive(Args, Debug, Clone, Default)]
pub struct FamilyArgs {
    /// Construction name (pinball, quantile, bregman, expectile, fz, rvar,
    /// shortfall, ratio, lift, left_tail, body).
    #[arg(long)]
    pub family: Option<String>,
    /// Generator construction for lift, left_tail and body.
    #[arg(long)]
    pub generator: Option<String>,
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    /// Monotone repair of the generator with constant bound h.
    #[arg(long, allow_hyphen_values = true)]
    pub repair: Option<f64>,
    /// JSON family config; flags are ignored when given.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub levels: Levels,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    /// Scored CSV; without it the CSV goes to stdout and the summary to
    /// stderr.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub levels: Levels,
    #[command(flatten)]
    pub family: FamilyArgs,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub levels: Levels,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// m: grid minimization of the mean score; z: root of the mean
    /// identification function.
    #[arg(long, default_value = "m", value_parser = ["m", "z"])]
    pub method: String,
    /// Grid axis lo:hi:step, one per forecast coordinate (or one for all).
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Vec<Axis>,
    /// Bisection tolerance for z-estimation.
    #[arg(long, default_value_t = 0.0)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct BacktestArgs {
    #[arg(long, required = true, num_args = 1)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub levels: Levels,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// HAC lag; defaults to the integer cube root of n.
    #[arg(long)]
    pub lag: Option<usize>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suite: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn init_threads() {
    if let Some(n) = std::env::var("TAILSCORE_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
    {
        if n > 0 {
            // Fails only if a pool already exists.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let result = match cli.command {
        Command::Eval(a) => commands::eval(&a),
        Command::Score(a) => commands::score(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Backtest(a) => commands::backtest(&a),
        Command::Verify(a) => commands::verify(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
