use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lucas_uzawa::commands::{cmd_compare, cmd_solve, cmd_sweep, cmd_verify, ExitStatus};
use lucas_uzawa::config::RunConfig;

/// Closed-form solver and numerical verifier for the Lucas-Uzawa model with
/// a human-capital externality.
///
/// Exit codes: 0 success, 1 invalid parameters or configuration, 2
/// calibration or solution failure, 3 a verification check failed, 4 I/O
/// failure.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Calibrate and write the closed-form trajectory and calibration.
    Solve(Common),
    /// Run the verification suite and write its report.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Debug hook: overwrite the calibrated initial control.
        #[arg(long, value_name = "U0", allow_negative_numbers = true)]
        force_u0: Option<f64>,
    },
    /// Write the control paths from every method side by side.
    Compare(Common),
    /// Summarise every point of the configured parameter grid.
    Sweep(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Solve(c) | Command::Compare(c) | Command::Sweep(c) => c,
        Command::Verify { common, .. } => common,
    };
    let result = RunConfig::load(&common.config).and_then(|config| {
        let out = common.out.clone().unwrap_or_else(|| config.output_dir.clone());
        match &cli.command {
            Command::Solve(_) => cmd_solve(&config, &out),
            Command::Verify { force_u0, .. } => cmd_verify(&config, &out, *force_u0),
            Command::Compare(_) => cmd_compare(&config, &out),
            Command::Sweep(_) => cmd_sweep(&config, &out),
        }
    });
    let status = match result {
        Ok(outcome) => {
            for path in &outcome.written {
                eprintln!("wrote {}", path.display());
            }
            eprintln!("{}", outcome.message);
            outcome.status
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitStatus::for_error(&err)
        }
    };
    ExitCode::from(status.code() as u8)
}
