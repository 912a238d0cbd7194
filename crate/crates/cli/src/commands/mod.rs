mod boundary;
mod data;
mod mitigation;
mod sweeps;
mod train;

use std::fs;
use std::time::Instant;

use anyhow::{Context, Result};

use crate::args::{AuditArgs, Command};
use crate::config::RunConfig;
use crate::context::LoadedModel;
use crate::report::emit;

/// Finishes the configuration: seeds, then the output directory.
fn finalize(cfg: &mut RunConfig) -> Result<()> {
    cfg.propagate_seed();
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating output directory {}", cfg.out.display()))
}

/// Loads `--model` and switches the data section to the one the model was
/// trained on; data flags given on the command line still apply on top.
fn attach_model(cfg: &mut RunConfig, args: &AuditArgs) -> Result<LoadedModel> {
    let loaded = LoadedModel::read(&args.model.model)?;
    if let Some(p) = &loaded.provenance {
        cfg.data = p.data.clone();
        args.data.apply(cfg)?;
    }
    Ok(loaded)
}

fn apply_audit(cfg: &mut RunConfig, args: &AuditArgs) -> Result<()> {
    args.data.apply(cfg)?;
    args.audit.apply(cfg);
    Ok(())
}

pub fn execute(command: &Command, mut cfg: RunConfig, started: Option<Instant>) -> Result<()> {
    let name = command.name();
    match command {
        Command::GenData(a) => {
            a.data.apply(&mut cfg)?;
            finalize(&mut cfg)?;
            let results = data::gen_data(&cfg)?;
            emit(&cfg, name, results, started)
        }
        Command::Train(a) => {
            a.data.apply(&mut cfg)?;
            a.train.apply(&mut cfg);
            finalize(&mut cfg)?;
            let results = train::train(&cfg)?;
            emit(&cfg, name, results, started)
        }
        Command::Audit(a) => {
            apply_audit(&mut cfg, a)?;
            finalize(&mut cfg)?;
            let model = attach_model(&mut cfg, a)?;
            let results = mitigation::audit(&cfg, &model)?;
            emit(&cfg, name, results, started)
        }
        Command::Detect(a) => {
            apply_audit(&mut cfg, &a.audit)?;
            if let Some(b) = a.beta {
                cfg.detect.beta = b;
            }
            finalize(&mut cfg)?;
            let model = attach_model(&mut cfg, &a.audit)?;
            let results = mitigation::detect(&cfg, &model)?;
            emit(&cfg, name, results, started)
        }
        Command::Mitigate(a) => {
            apply_audit(&mut cfg, &a.detect.audit)?;
            if let Some(b) = a.detect.beta {
                cfg.detect.beta = b;
            }
            if let Some(m) = a.method() {
                cfg.mitigate.method = m;
            }
            if let Some(alphas) = &a.alphas {
                cfg.mitigate.alphas = Some(alphas.clone());
            }
            a.modify.apply(&mut cfg);
            finalize(&mut cfg)?;
            let model = attach_model(&mut cfg, &a.detect.audit)?;
            let results = mitigation::mitigate(&cfg, &model)?;
            emit(&cfg, name, results, started)
        }
        Command::SweepWs(a) => {
            a.data.apply(&mut cfg)?;
            a.train.apply(&mut cfg);
            a.audit.apply(&mut cfg);
            if let Some(n) = a.seeds {
                cfg.sweep.seeds = n;
            }
            if let Some(u) = a.ws_upper {
                cfg.sweep.ws_upper = u;
            }
            if let Some(p) = a.ws_points {
                cfg.sweep.ws_points = p;
            }
            if let Some(f) = &a.fair_features {
                cfg.sweep.fair_features = crate::config::FeatureChoice::parse(f, a.train.fair_threshold);
            }
            finalize(&mut cfg)?;
            let results = sweeps::sweep_ws(&cfg)?;
            emit(&cfg, name, results, started)
        }
        Command::SweepN(a) => {
            a.data.apply(&mut cfg)?;
            a.train.apply(&mut cfg);
            a.audit.apply(&mut cfg);
            if let Some(n) = a.seeds {
                cfg.sweep.seeds = n;
            }
            if let Some(ns) = &a.pair_counts {
                cfg.sweep.pair_counts = ns.clone();
            }
            if let Some(f) = &a.fair_features {
                cfg.sweep.fair_features = crate::config::FeatureChoice::parse(f, a.train.fair_threshold);
            }
            finalize(&mut cfg)?;
            let results = sweeps::sweep_n(&cfg)?;
            emit(&cfg, name, results, started)
        }
        Command::SweepPool(a) => {
            a.data.apply(&mut cfg)?;
            a.train.apply(&mut cfg);
            a.audit.apply(&mut cfg);
            if let Some(sizes) = &a.pool_sizes {
                cfg.sweep.pool_sizes = sizes.clone();
            }
            finalize(&mut cfg)?;
            let results = sweeps::sweep_pool(&cfg)?;
            emit(&cfg, name, results, started)
        }
        Command::Boundary(a) => {
            apply_audit(&mut cfg, &a.detect.audit)?;
            if let Some(b) = a.detect.beta {
                cfg.detect.beta = b;
            }
            if let Some(r) = a.resolution {
                cfg.boundary.resolution = r;
            }
            if let Some(m) = a.margin {
                cfg.boundary.margin = m;
            }
            a.modify.apply(&mut cfg);
            finalize(&mut cfg)?;
            let model = attach_model(&mut cfg, &a.detect.audit)?;
            let results = boundary::boundary(&cfg, &model)?;
            emit(&cfg, name, results, started)
        }
    }
}
