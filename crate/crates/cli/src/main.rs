use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use wqc_cli::config::{default_config, parse_config, RunConfig};
use wqc_cli::run::{error_json, exit_code, Command, Run};
use wqc_core::{Error, Result};

/// Numerical laboratory for weakly chaotic billiards.
#[derive(Debug, Parser)]
#[command(name = "wqc", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML or JSON run configuration; defaults apply without one.
    #[arg(long, env = "WQC_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output`).
    #[arg(long, env = "WQC_OUT")]
    out: Option<PathBuf>,
    /// Concurrent sweep points.
    #[arg(long, env = "WQC_JOBS", default_value_t = 1)]
    jobs: usize,
    /// Master seed (overrides `seed`).
    #[arg(long, env = "WQC_SEED")]
    seed: Option<u64>,
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => parse_config(p)?,
        None => default_config()?,
    };
    if let Some(o) = &cli.out {
        cfg.output = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("{}", error_json(e));
    ExitCode::from(exit_code(e) as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&Error::Config(vec![e.to_string().trim().to_string()])),
    };
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let mut run = Run::new(cfg, cli.jobs);
    match run.execute(cli.command) {
        Ok(()) => {
            for a in &run.artifacts {
                println!("{}", a.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
