//! Report rendering: JSON with the run configuration, or CSV rows.

use std::path::Path;

use hypercube_ising::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::commands::{self, SimulateResult, SolveResult};
use crate::config::{CommandKind, Format, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Report<'a, R> {
    version: &'static str,
    config: &'a RunConfig,
    result: R,
}

#[derive(Deserialize)]
struct Embedded {
    config: RunConfig,
}

pub struct Run {
    pub text: String,
    pub status: u8,
}

fn json<R: Serialize>(cfg: &RunConfig, result: R) -> Result<String> {
    let report = Report {
        version: VERSION,
        config: cfg,
        result,
    };
    serde_json::to_string_pretty(&report)
        .map(|s| s + "\n")
        .map_err(|e| Error::Parameter(format!("cannot encode report: {e}")))
}

/// 17 significant digits, exponent notation.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

const HEADER: [&str; 5] = ["beta", "expected_hitting", "scaled_ratio", "residual_or_se", "events"];

fn csv_text(rows: Vec<[String; 5]>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Parameter(format!("cannot encode csv: {e}"));
    w.write_record(HEADER).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Parameter(format!("cannot encode csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

fn solve_csv(r: &SolveResult) -> Result<String> {
    csv_text(
        r.rows
            .iter()
            .map(|row| {
                [
                    row.beta.to_string(),
                    num(row.expected_hitting),
                    opt(row.scaled_ratio),
                    num(row.residual),
                    String::new(),
                ]
            })
            .collect(),
    )
}

fn simulate_csv(r: &SimulateResult) -> Result<String> {
    csv_text(
        r.rows
            .iter()
            .map(|row| {
                [
                    row.beta.to_string(),
                    num(row.stats.mean),
                    opt(row.scaled_ratio),
                    num(row.stats.std_error),
                    row.stats.events_total.to_string(),
                ]
            })
            .collect(),
    )
}

pub fn execute(cfg: &RunConfig) -> Result<Run> {
    cfg.validate()?;
    let ok = |text| Run { text, status: 0 };
    match (cfg.command, cfg.format) {
        (CommandKind::Analyze, _) => Ok(ok(json(cfg, commands::analyze(cfg)?)?)),
        (CommandKind::Verify, _) => {
            let r = commands::verify(cfg)?;
            let status = if r.passed { 0 } else { 1 };
            Ok(Run {
                text: json(cfg, r)?,
                status,
            })
        }
        (CommandKind::Solve, Format::Json) => Ok(ok(json(cfg, commands::solve(cfg)?)?)),
        (CommandKind::Solve, Format::Csv) => Ok(ok(solve_csv(&commands::solve(cfg)?)?)),
        (CommandKind::Simulate, Format::Json) => {
            Ok(ok(json(cfg, commands::simulate_cmd(cfg)?)?))
        }
        (CommandKind::Simulate, Format::Csv) => {
            Ok(ok(simulate_csv(&commands::simulate_cmd(cfg)?)?))
        }
    }
}

pub fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Parameter(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parameter(format!("cannot read {}: {e}", path.display())))?;
    let embedded: Embedded = serde_json::from_str(&text)
        .map_err(|e| Error::Parameter(format!("{} is not a JSON report: {e}", path.display())))?;
    Ok(embedded.config)
}
