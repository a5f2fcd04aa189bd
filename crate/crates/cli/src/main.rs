//! `board-sim`: run board experiments, VME conformance scripts and MAC budgets
//! from the command line.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 runtime error
//! (including a failed conformance expectation). Verbosity follows the
//! `BOARD_SIM_LOG` environment variable (`error` .. `trace`, default `warn`).

mod commands;
mod manifest;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use board_sim::dualcore::FilterKind;

#[derive(Debug, Parser)]
#[command(
    name = "board-sim",
    version,
    about = "Dual-DSP instrumentation board simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Beam-current-monitor chain: ADC, dual-DSP line enhancer, trip, DAC.
    Bcm(RunArgs),
    /// System identification with an adaptive FIR or equation-error IIR.
    Ident(RunArgs),
    /// Adaptive line enhancer (predictor topology).
    Predict(RunArgs),
    /// Run a VME conformance script against the slave model.
    Vme(VmeArgs),
    /// MAC budget of an adaptive filter against the board.
    Budget(BudgetArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Reseed the noise sources: the j-th noise component gets SEED + j.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum BackingKind {
    /// The board: DPRAM and CE3 peripheral pages behind the window.
    Board,
    /// Plain RAM filling the window.
    Ram,
}

#[derive(Debug, Args)]
struct VmeArgs {
    /// Transaction script.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Slave base address (hex).
    #[arg(long, default_value = "00800000", value_parser = parse_hex)]
    base: u32,
    #[arg(long, value_enum, default_value_t = BackingKind::Board)]
    backing: BackingKind,
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Feed-forward taps.
    taps: usize,
    /// `fir` or `iir:<na>`.
    #[arg(default_value = "fir")]
    topology: FilterKind,
    /// Sample rate in Hz.
    #[arg(default_value_t = 333_000.0)]
    rate: f64,
    /// Also write budget.csv and a manifest here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_hex(s: &str) -> Result<u32, String> {
    let digits = s
        .trim_start_matches("0x")
        .trim_start_matches("0X")
        .replace('_', "");
    u32::from_str_radix(&digits, 16).map_err(|e| format!("{s:?}: {e}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BOARD_SIM_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    let result = match cli.command {
        Command::Bcm(a) => commands::bcm(&a.config, &a.out, a.seed, &argv),
        Command::Ident(a) => commands::ident(&a.config, &a.out, a.seed, &argv),
        Command::Predict(a) => commands::predict(&a.config, &a.out, a.seed, &argv),
        Command::Vme(a) => commands::vme(
            &a.config,
            &a.out,
            a.base,
            a.backing == BackingKind::Board,
            &argv,
        ),
        Command::Budget(a) => commands::budget(a.taps, a.topology, a.rate, a.out.as_deref(), &argv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("board-sim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
