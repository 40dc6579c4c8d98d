//! `transferlab`: batch front end for scenarios, exponents, family
//! verification, rate tables and the sampling and selection procedures.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::ExperimentConfig;
use crate::error::Result;

#[derive(Parser, Debug)]
#[command(name = "transferlab", version, about = "Transfer exponents, lower-bound families and transfer learning experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config file, or the name of a bundled config
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<String>,
    /// Master seed for every random draw [default: config seed, else 0]
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Write the main artifact here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads for Monte Carlo [default: available parallelism]
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Override a config field, e.g. --set grid.n_q=[16,64] (repeatable)
    #[arg(long = "set", global = true, value_name = "K=V")]
    sets: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// List bundled configs, describe a scenario, or emit its JSON document
    Scenario {
        #[arg(value_enum)]
        action: ScenarioAction,
    },
    /// Transfer, marginal and noise exponents of a scenario
    Exponent,
    /// Check every member of a lower-bound family
    VerifyFamily,
    /// Monte Carlo rate table as CSV
    Rates,
    /// Adaptive sampling under label costs
    Adaptive,
    /// Choose among several sources
    Select,
    /// Choose a reweighting of the source
    Reweight,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioAction {
    List,
    Describe,
    Emit,
}

fn write_artifact(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            r => r?,
        },
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Cmd::Scenario { action: ScenarioAction::List } = cli.cmd {
        return write_artifact(cli.common.out.as_deref(), &commands::scenario_list());
    }
    let cfg: ExperimentConfig = config::load(cli.common.config.as_deref(), &cli.common.sets)?;
    let seed = cli.common.seed.or(cfg.seed).unwrap_or(0);
    let out = cli.common.out.clone().or_else(|| cfg.out.clone());
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.jobs {
        if n == 0 {
            return Err(error::config_err("--jobs must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    pool.install(|| {
        let text = match cli.cmd {
            Cmd::Scenario { action: ScenarioAction::List } => unreachable!(),
            Cmd::Scenario { action: ScenarioAction::Describe } => commands::scenario_describe(&cfg)?,
            Cmd::Scenario { action: ScenarioAction::Emit } => commands::scenario_emit(&cfg)?,
            Cmd::Exponent => commands::exponent(&cfg)?,
            Cmd::VerifyFamily => commands::verify(&cfg)?,
            Cmd::Rates => commands::rates(&cfg, seed)?,
            Cmd::Adaptive => {
                let (summary, lines) = commands::adaptive(&cfg, seed)?;
                if let Some(p) = &cfg.transcript {
                    std::fs::write(p, lines)?;
                }
                summary
            }
            Cmd::Select => commands::select(&cfg, seed)?,
            Cmd::Reweight => commands::reweight(&cfg, seed)?,
        };
        write_artifact(out.as_deref(), &text)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
