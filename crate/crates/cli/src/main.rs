//! `qworkmeter`: runs work-statistics experiments described by JSON configs.

mod commands;
mod config;
mod error;
mod output;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::SweepParam;
use crate::config::{Overrides, ToleranceProfile, Tolerances};
use crate::error::{CliError, CliResult};
use crate::report::Checks;

#[derive(Parser)]
#[command(
    name = "qworkmeter",
    version,
    about = "Quantum work statistics: exact, Ramsey, detector and shot-level runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for shot sampling; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Integration steps per schedule segment; overrides the config.
    #[arg(long)]
    steps: Option<usize>,
    /// Directory for result files; overrides the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    tolerance_profile: Option<ToleranceProfile>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            steps: self.steps,
            out_dir: self.out_dir.as_ref().map(|p| p.display().to_string()),
            tolerance_profile: self.tolerance_profile,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact computation: writes dist.csv, chi.csv and report.json.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Shot-level simulation of the configured protocol.
    Sample {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Detector protocol over a grid of coupling times or pointer widths.
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Crooks and Jarzynski checks from forward and backward results.
    Verify {
        /// Forward result directory or its report.json.
        forward: PathBuf,
        /// Backward result directory or its report.json.
        backward: PathBuf,
        /// Expected inverse temperature; must match both results.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = ToleranceProfile::Default)]
        tolerance_profile: ToleranceProfile,
    },
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("QWORKMETER_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| {
        CliError::Validation(format!(
            "QWORKMETER_THREADS must be a positive integer, got `{value}`"
        ))
    })?;
    if threads == 0 {
        return Err(CliError::Validation(
            "QWORKMETER_THREADS must be at least 1".into(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Validation(format!("cannot size thread pool: {e}")))
}

fn numerical_outcome(checks: &Checks) -> CliResult<()> {
    let failed = checks.failures();
    if failed.is_empty() {
        return Ok(());
    }
    let names: Vec<String> = failed
        .iter()
        .map(|c| {
            format!(
                "{} = {:.3e} (tolerance {:.3e})",
                c.name, c.value, c.tolerance
            )
        })
        .collect();
    Err(CliError::Numerical(names.join("; ")))
}

fn execute(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Run { config, common } => {
            let exp = config::load(&config)?.resolve(&common.overrides())?;
            let report = commands::run(&exp)?;
            println!(
                "wrote {} to {}",
                report.files.join(", "),
                exp.config.out_dir
            );
            numerical_outcome(&report.checks)
        }
        Command::Sample { config, common } => {
            let exp = config::load(&config)?.resolve(&common.overrides())?;
            let report = commands::sample(&exp)?;
            println!(
                "wrote {} to {}",
                report.files.join(", "),
                exp.config.out_dir
            );
            numerical_outcome(&report.checks)
        }
        Command::Sweep {
            config,
            param,
            values,
            common,
        } => {
            let exp = config::load(&config)?.resolve(&common.overrides())?;
            let report = commands::sweep(&exp, param, &values)?;
            println!(
                "wrote {} to {}",
                report.files.join(", "),
                exp.config.out_dir
            );
            numerical_outcome(&report.checks)
        }
        Command::Verify {
            forward,
            backward,
            beta,
            out_dir,
            tolerance_profile,
        } => {
            let report = verify::verify(
                &forward,
                &backward,
                beta,
                Tolerances::for_profile(tolerance_profile),
                &out_dir,
            )?;
            println!(
                "beta {}: fitted slope {:.12}, fitted dF {:.12} +- {:.3e}, dF {:.12}",
                report.beta,
                report.fitted_beta,
                report.fitted_delta_f,
                report.fitted_delta_f_se,
                report.delta_f
            );
            numerical_outcome(&report.checks)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qworkmeter: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
