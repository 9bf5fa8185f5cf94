//! `gindex`: numerical experiments on Γ-indices of Heisenberg-elliptic
//! operators on the 3-torus.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::{CommandFactory, Parser, Subcommand};
use gindex_core::check::all_pass;

use crate::config::{Options, RunConfig};
use crate::error::CliError;
use crate::output::{emit, ResultRecord};

#[derive(Parser, Debug)]
#[command(name = "gindex", version, about = "Γ-index experiments on the 3-torus")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Run a property suite: spectral, bundle, contact, operator, cs, gamma, index or all
    #[arg(long, value_name = "NAME")]
    suite: Option<String>,

    #[command(flatten)]
    options: Options,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Chern number of the idempotent bundle and its convergence
    Chern,
    /// Contact condition and lifts of θ_k along the covers
    ContactCheck,
    /// Reeb fields and horizontal frames
    Reeb,
    /// Distance of f_l from the odd integers
    Ellipticity,
    /// Invariants of P_{k,l} and singular values of truncations
    OperatorDiagnostics,
    /// Topological index of P_{k,l}
    Index,
    /// Index consistency between the base and k-fold covers
    GammaCheck,
    /// Connes–Skandalis identities on random matrices
    CsSandbox,
    /// Γ-trace identities on block-circulant models
    GammaTraceSuite,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Chern => "chern",
            Command::ContactCheck => "contact-check",
            Command::Reeb => "reeb",
            Command::Ellipticity => "ellipticity",
            Command::OperatorDiagnostics => "operator-diagnostics",
            Command::Index => "index",
            Command::GammaCheck => "gamma-check",
            Command::CsSandbox => "cs-sandbox",
            Command::GammaTraceSuite => "gamma-trace-suite",
        }
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let start = Instant::now();
    let (cfg, outcome) = match (cli.command, &cli.suite) {
        (Some(cmd), None) => {
            let cfg = RunConfig::resolve(cmd.name(), &cli.options)?;
            let outcome = commands::run(&cfg)?;
            (cfg, outcome)
        }
        (None, Some(name)) => {
            let cfg = RunConfig::resolve(&format!("suite:{name}"), &cli.options)?;
            let outcome = commands::suite(name, &cfg)?;
            (cfg, outcome)
        }
        _ => unreachable!("checked by the caller"),
    };
    let pass = all_pass(&outcome.checks);
    for c in outcome.checks.iter().filter(|c| !c.pass) {
        log::warn!("check {} failed: measured {:e}, tolerance {:e}", c.name, c.measured, c.tolerance);
    }
    let record = ResultRecord {
        command: cfg.command.clone(),
        config: cfg,
        results: outcome.results,
        checks: outcome.checks,
        duration_ms: start.elapsed().as_millis() as u64,
        version: env!("CARGO_PKG_VERSION"),
    };
    emit(&record, outcome.table.as_ref())?;
    Ok(pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.command.is_some() == cli.suite.is_some() {
        Cli::command()
            .error(
                clap::error::ErrorKind::MissingSubcommand,
                "give exactly one of a subcommand or --suite",
            )
            .exit();
    }
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
