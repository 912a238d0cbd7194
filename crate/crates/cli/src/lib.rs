//! Command-line front end: every subcommand resolves a [`RunConfig`]
//! (defaults, then `--config`, then flags), runs, and writes a JSON report
//! `<out>/<command>.json` that is also echoed on stdout.

pub mod args;
pub mod config;

mod commands;
mod context;
mod report;

use std::time::Instant;

use anyhow::Result;

pub use args::Cli;
pub use config::RunConfig;
pub use report::{error_json, error_kind, error_message};

/// Defaults overlaid with the config file and the global flags.
pub fn base_config(global: &args::GlobalArgs) -> Result<RunConfig> {
    let mut cfg = match &global.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &global.out {
        cfg.out = out.clone();
    }
    if let Some(t) = global.threads {
        cfg.threads = Some(t);
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    let started = cli.global.timing.then(Instant::now);
    let cfg = base_config(&cli.global)?;
    if let Some(n) = cfg.threads {
        if n == 0 {
            anyhow::bail!("--threads must be positive");
        }
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    commands::execute(&cli.command, cfg, started)
}
