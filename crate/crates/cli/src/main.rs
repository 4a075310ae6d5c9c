//! Command-line front end for the fiber-loop C-NOT simulator.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl From<tmcnot::Error> for CliError {
    fn from(e: tmcnot::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "tmcnot", version, about = "Simulate a time-multiplexed fiber-loop C-NOT gate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Run configuration (JSON); flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Disable every imperfection.
    #[arg(long, global = true)]
    ideal: bool,
    /// Source indistinguishability V.
    #[arg(long, global = true)]
    visibility: Option<f64>,
    /// Tomography shots per setting; 0 gives exact probabilities.
    #[arg(long, global = true)]
    shots: Option<u64>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile the gate into a per-round switch schedule.
    Compile {
        /// Prepare this computational input (00, 01, 10 or 11).
        #[arg(long)]
        input: Option<String>,
        /// Reconfigure the first gate layer to a Hadamard.
        #[arg(long)]
        bell: bool,
        /// Append the all-pass separation round.
        #[arg(long)]
        separation: bool,
        /// Route idle pairs without the reflection phase.
        #[arg(long)]
        transparent: bool,
    },
    /// Post-selected output distribution for one input.
    Simulate {
        #[arg(long)]
        input: String,
        /// Evaluate through the bare mesh instead of the loop.
        #[arg(long)]
        path: bool,
    },
    /// Truth table and gate fidelity.
    TruthTable,
    /// Bell-state generation with the Hadamard variant.
    Bell {
        #[arg(long)]
        input: Option<String>,
        /// Drop the reflection phase of idle passes.
        #[arg(long)]
        drop_sigma_z: bool,
    },
    /// Two-qubit state tomography of a Bell output.
    Tomo {
        /// Gate input whose Bell output is the target.
        #[arg(long, default_value = "00")]
        input: String,
        /// Counts CSV with columns setting_a, setting_b, outcome, count.
        #[arg(long)]
        counts: Option<PathBuf>,
    },
    /// Error budget under multi-pair emission, distinguishability and loss.
    ErrorBudget,
    /// Two-photon interference on a balanced splitter.
    Hom,
}

fn settle(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = common.visibility {
        cfg.source.v = v;
    }
    if let Some(s) = common.seed {
        cfg.tomography.seed = s;
    }
    if let Some(s) = common.shots {
        cfg.tomography.shots = s;
    }
    if let Some(f) = common.format {
        cfg.output.format = f;
    }
    if let Some(o) = &common.out {
        cfg.output.path = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = settle(&cli.common)?;
    let ideal = cli.common.ideal;
    let body = match cli.command {
        Command::Compile { input, bell, separation, transparent } => {
            commands::compile(&cfg, input.as_deref(), bell, separation, transparent)?
        }
        Command::Simulate { input, path } => commands::simulate(&cfg, ideal, &input, path)?,
        Command::TruthTable => commands::truth_table(&cfg, ideal)?,
        Command::Bell { input, drop_sigma_z } => commands::bell(&cfg, ideal, input.as_deref(), drop_sigma_z)?,
        Command::Tomo { input, counts } => commands::tomo(&cfg, ideal, &input, counts.as_deref())?,
        Command::ErrorBudget => commands::error_budget(&cfg, ideal)?,
        Command::Hom => commands::hom(&cfg, ideal)?,
    };
    match &cfg.output.path {
        Some(p) => std::fs::write(p, body).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
