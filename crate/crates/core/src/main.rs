use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use singint::harness::{self, ExperimentConfig, Report};
use singint::Error;

/// Numerical experiments for Cauchy singular integrals on weighted variable
/// Lebesgue spaces.
#[derive(Parser)]
#[command(name = "singint", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; defaults to `[output] path` or standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Matuszewska–Orlicz indices against indices of powerlikeness.
    Indices,
    /// Carleson constant under refinement.
    Carleson,
    /// Luxemburg–Nakano norm of the configured function.
    Norm,
    /// Grid supremum of the Muckenhoupt-type constant.
    Apcheck,
    /// Grid supremum of the Hästö–Diening functional.
    Hdcheck,
    /// Weighted operator norm on the configured meshes.
    Opnorm,
    /// Khvedelidze boundary sweep over the (p, λ) grid.
    Sweep,
    /// Stability probe under w ↦ w^{1+ε}.
    Stability,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;

fn run(cli: &Cli) -> Result<Report, Error> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter { name: "config", reason: "--config is required".into() })?;
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config = config.with_seed(seed);
    }
    let report = match cli.command {
        Command::Indices => harness::run_indices(&config),
        Command::Carleson => harness::run_carleson(&config),
        Command::Norm => harness::run_norm(&config),
        Command::Apcheck => harness::run_apcheck(&config),
        Command::Hdcheck => harness::run_hdcheck(&config),
        Command::Opnorm => harness::run_opnorm(&config),
        Command::Sweep => harness::run_boundary_sweep(&config),
        Command::Stability => harness::run_stability_probe(&config),
    }?;
    let out = cli.out.clone().or(config.output.clone());
    match out {
        Some(p) => std::fs::write(&p, report.render())
            .map_err(|e| Error::Io { path: p.display().to_string(), message: e.to_string() })?,
        None => print!("{}", report.render()),
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) if report.nonconvergence => {
            eprintln!("warning: non-convergence flags present in the report");
            ExitCode::from(EXIT_NONCONVERGENCE)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse { .. } | Error::Io { .. } | Error::InvalidParameter { .. } => ExitCode::from(EXIT_CONFIG),
                Error::NonConvergence { .. } => ExitCode::from(EXIT_NONCONVERGENCE),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
