//! `switched`: certify, simulate, and design switching signals for
//! switched linear systems described by TOML documents.

mod commands;
mod document;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Stability toolkit for switched linear systems.
#[derive(Parser)]
#[command(name = "switched", version, max_term_width = 100)]
struct Cli {
    /// Print the machine-readable report on stdout instead of the human
    /// summary.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for the random-signal generator.
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a document and report findings.
    Validate { path: PathBuf },
    /// Evaluate the stability certificate for a document.
    Certify {
        path: PathBuf,
        /// Stabilizing set as comma-separated 1-based indices (continuous
        /// only). Defaults to the subsystems with c below one.
        #[arg(long, value_name = "INDICES")]
        set: Option<String>,
        /// Also check the fixed-ratio sufficient condition at this s
        /// (continuous only).
        #[arg(long, value_name = "S")]
        s_ratio: Option<f64>,
    },
    /// Integrate the system along its signal and emit a trajectory CSV.
    Simulate {
        path: PathBuf,
        /// Initial state, comma separated. Defaults to all ones.
        #[arg(long, value_name = "V", allow_hyphen_values = true)]
        x0: Option<String>,
        /// Time horizon. Defaults to the signal's own span for finite
        /// signals; required for periodic ones.
        #[arg(long, value_name = "T")]
        horizon: Option<f64>,
        /// Sampling step. Defaults to horizon/100.
        #[arg(long, value_name = "DT")]
        step: Option<f64>,
        /// Write the CSV here instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Check the switch-time norm bound along the trajectory
        /// (continuous only).
        #[arg(long)]
        verify_bound: bool,
        /// Ignore the document signal and simulate a seeded random periodic
        /// signal with this many tail segments (continuous only).
        #[arg(long, value_name = "COUNT")]
        random_signal: Option<usize>,
    },
    /// Design switching signals: duty-cycle stabilizer or dwell-time plan.
    #[command(subcommand)]
    Design(DesignCommand),
    /// Print induced norms and spectral summaries for every subsystem.
    Norms { path: PathBuf },
}

#[derive(Subcommand)]
enum DesignCommand {
    /// Repair a growing signal by duty-cycling an added damping subsystem.
    Stabilizer {
        path: PathBuf,
        /// Damping matrix; rows separated by ';', entries by ','.
        #[arg(long = "A0", alias = "a0", value_name = "MATRIX", allow_hyphen_values = true)]
        a0: String,
        /// Target norm for one damping segment.
        #[arg(long, default_value_t = 0.5, value_name = "V")]
        lambda: f64,
        /// Upper bound for the damping-time search.
        #[arg(long, value_name = "T")]
        scan_bound: Option<f64>,
        /// Write the repaired document here.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
    },
    /// Solve for per-subsystem dwell times meeting a decay margin.
    Dwell {
        path: PathBuf,
        /// Stable set as comma-separated 1-based indices. Defaults to the
        /// Hurwitz subsystems not pinned by --bad-dwell.
        #[arg(long, value_name = "INDICES")]
        stable: Option<String>,
        /// Pin a subsystem's dwell time, as index=duration. Repeatable.
        #[arg(long, value_name = "I=D")]
        bad_dwell: Vec<String>,
        /// Required log decay per cycle.
        #[arg(long, default_value_t = 0.05, value_name = "V")]
        margin: f64,
        /// Write a document with the designed cyclic signal here.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    let start = std::time::Instant::now();
    let outcome = run(cli);
    if !json {
        // Stdout stays byte-deterministic; timing goes to stderr only.
        eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    }
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<switched::Error>() {
                Some(switched::Error::Infeasible(_)) => 1,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Validate { path } => commands::cmd_validate(&path, cli.json),
        Command::Certify { path, set, s_ratio } => {
            commands::cmd_certify(&path, set.as_deref(), s_ratio, cli.json)
        }
        Command::Simulate { path, x0, horizon, step, out, verify_bound, random_signal } => {
            let opts = commands::SimulateOpts { x0, horizon, step, out, verify_bound, random_signal };
            commands::cmd_simulate(&path, &opts, cli.json, cli.seed)
        }
        Command::Design(DesignCommand::Stabilizer { path, a0, lambda, scan_bound, emit }) => {
            let opts = commands::StabilizerOpts { a0, lambda, scan_bound, emit };
            commands::cmd_design_stabilizer(&path, &opts, cli.json)
        }
        Command::Design(DesignCommand::Dwell { path, stable, bad_dwell, margin, emit }) => {
            let args = commands::DwellArgs { stable, bad_dwell, margin, emit };
            commands::cmd_design_dwell(&path, &args, cli.json)
        }
        Command::Norms { path } => commands::cmd_norms(&path, cli.json),
    }
}
