use std::fs;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Serialize)]
struct Timing {
    seconds: f64,
}

#[derive(Serialize)]
struct Envelope<'a, R> {
    version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    results: R,
    timing: Option<Timing>,
}

/// Writes `<out>/<command>.json` and echoes it on stdout.
pub fn emit<R: Serialize>(cfg: &RunConfig, command: &str, results: R, started: Option<Instant>) -> Result<()> {
    let env = Envelope {
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: cfg,
        results,
        timing: started.map(|t| Timing { seconds: t.elapsed().as_secs_f64() }),
    };
    let text = serde_json::to_string_pretty(&env)? + "\n";
    let path = cfg.out.join(format!("{command}.json"));
    fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    print!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    command: &'a str,
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct ErrorEnvelope<'a> {
    error: ErrorBody<'a>,
}

/// One-line JSON error record for stderr.
pub fn error_json(command: &str, kind: &str, message: String) -> String {
    serde_json::to_string(&ErrorEnvelope { error: ErrorBody { command, kind, message } })
        .expect("error record serializes")
}

/// The error chain joined with `: `, skipping causes whose text an outer
/// message already includes.
pub fn error_message(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if out.contains(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
    }
    out
}

/// Category of an error chain: the toolkit's own kind when present.
pub fn error_kind(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<procfair::Error>() {
            return e.kind();
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io";
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return "json";
        }
    }
    "usage"
}
