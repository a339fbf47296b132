use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nusc::config::ModeSpec;
use nusc::harness::{self, format_summary};
use nusc::{ExperimentConfig, ExperimentKind, HarnessError, Loaded};

#[derive(Parser)]
#[command(name = "nusc", version, about = "Near-uniform source coding simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resolvability gap of random codebooks through a channel
    Resolve(RunArgs),
    /// Lossy coding with decoder side information
    Wz(RunArgs),
    /// Lossless distributed coding through the common part
    Sw(RunArgs),
    /// Distributed lossy coding by concatenation
    Dlc(RunArgs),
    /// Closed-form finite-n bounds
    Bounds(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overriding the config
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; the manifest goes to `<out>.manifest.json`
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<CliMode>,
    /// Source trials per codebook
    #[arg(long)]
    trials: Option<usize>,
    /// Do not print the summary
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CliMode {
    Exact,
    Mc,
}

fn execute(kind: ExperimentKind, args: RunArgs) -> Result<(), HarnessError> {
    let mut cfg = ExperimentConfig::read(&args.config)?;
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(m) = args.mode {
        cfg.mode = match m {
            CliMode::Exact => ModeSpec::Exact,
            CliMode::Mc => ModeSpec::Mc,
        };
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", kind.name())));
    let base = args.config.parent().unwrap_or(Path::new("."));
    let loaded = Loaded::new(kind, cfg, base)?;
    let output = harness::run(&loaded, base, None)?;
    harness::write_outputs(&output, &out)?;
    if !args.quiet {
        print!("{}", format_summary(&output.summary));
        println!("wrote {} rows to {}", output.rows.len(), out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Resolve(a) => (ExperimentKind::Resolve, a),
        Command::Wz(a) => (ExperimentKind::Wz, a),
        Command::Sw(a) => (ExperimentKind::Sw, a),
        Command::Dlc(a) => (ExperimentKind::Dlc, a),
        Command::Bounds(a) => (ExperimentKind::Bounds, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
