//! CSV rows and the JSON run summary. Only the JSON carries timestamps, so
//! the CSV of a rerun is byte-identical.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::experiments::Outcome;
use crate::preflight::PreflightReport;

#[derive(Debug, Clone)]
pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
}

pub fn write_csv(path: &Path, outcome: &Outcome) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(&outcome.columns)?;
    for row in &outcome.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn summary_json(
    cfg: &ExperimentConfig,
    outcome: &Outcome,
    preflight: &PreflightReport,
    elapsed_seconds: f64,
) -> Value {
    let hash = cfg.hash();
    let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
    json!({
        "kind": cfg.kind,
        "name": cfg.stem(),
        "config_hash": hash,
        "run_id": format!("{}-{}", &hash[..12], now.as_nanos()),
        "timestamp_unix": now.as_secs_f64(),
        "elapsed_seconds": elapsed_seconds,
        "versions": {
            "adiabat": adiabat::VERSION,
            "adiabat-cli": env!("CARGO_PKG_VERSION"),
        },
        "rows": outcome.rows.len(),
        "config": cfg,
        "preflight": preflight,
        "summary": outcome.summary,
        "checks": outcome.checks,
        "passed": outcome.passed(),
    })
}

/// Writes `<stem>.csv` and `<stem>.json` under `dir`.
pub fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    outcome: &Outcome,
    preflight: &PreflightReport,
    elapsed_seconds: f64,
) -> anyhow::Result<Written> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv = dir.join(format!("{}.csv", cfg.stem()));
    let json = dir.join(format!("{}.json", cfg.stem()));
    write_csv(&csv, outcome)?;
    let summary = summary_json(cfg, outcome, preflight, elapsed_seconds);
    std::fs::write(&json, serde_json::to_string_pretty(&summary)? + "\n")
        .with_context(|| format!("writing {}", json.display()))?;
    Ok(Written { csv, json })
}
