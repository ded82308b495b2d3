//! `extremal`: runs pointwise evaluations, Dirichlet solves, eigenvalue
//! brackets and the oracle suite from TOML configs.
//!
//! Exit codes: 0 ok, 2 config error, 3 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use config::Config;
use output::RunDir;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    /// Outputs were written but the run did not pass.
    Partial(Value, String),
}

impl From<extremal_core::Error> for CliError {
    fn from(e: extremal_core::Error) -> Self {
        use extremal_core::Error as E;
        match e {
            E::BadDims(_) | E::InvalidParameter(_) | E::Format(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Partial(..) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "extremal", version, about = "Nonlocal extremal operator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "extremal-run")]
    out: PathBuf,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Evaluate I_k^± at points.
    Eval,
    /// Solve a Dirichlet problem on a grid.
    Solve,
    /// Bracket a principal eigenvalue; optionally compute the eigenfunction.
    Eigen,
    /// Run the oracle identity suite.
    Verify,
    /// Time representative workloads.
    Profile,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Solve => "solve",
            Command::Eigen => "eigen",
            Command::Verify => "verify",
            Command::Profile => "profile",
        }
    }

    fn needs_config(self) -> bool {
        matches!(self, Command::Eval | Command::Solve | Command::Eigen)
    }
}

fn load(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None if cli.command.needs_config() => {
            return Err(CliError::Config(format!("{} needs --config", cli.command.name())))
        }
        None => Config {
            schema_version: config::SCHEMA_VERSION,
            s: 0.75,
            dim: 2,
            ..Config::default()
        },
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let name = cli.command.name();
    let mut out = RunDir::create(&cli.out)?;
    let cfg_json = serde_json::to_value(&cfg).expect("serializable");
    match commands::run(name, &cfg, &mut out) {
        Ok(summary) => out.finish(name, &cfg_json, summary),
        Err(CliError::Partial(summary, msg)) => {
            out.finish(name, &cfg_json, json!({ "result": summary, "error": msg }))?;
            Err(CliError::Numerical(msg))
        }
        Err(e) => {
            let msg = match &e {
                CliError::Config(m) | CliError::Numerical(m) => m.clone(),
                CliError::Partial(_, m) => m.clone(),
            };
            out.finish(name, &cfg_json, json!({ "error": msg }))?;
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Config(m) => eprintln!("config error: {m}"),
                CliError::Numerical(m) | CliError::Partial(_, m) => eprintln!("numerical failure: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
