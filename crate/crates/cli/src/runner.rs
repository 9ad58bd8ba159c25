//! The validate → preflight → run → write pipeline shared by subcommands.

use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::experiments::{Experiment, ExperimentRegistry, Outcome};
use crate::output::{write_outputs, Written};
use crate::preflight::{preflight, PreflightReport};

pub const DEFAULT_OUT_DIR: &str = "out";

/// Schema errors from the common and the kind-specific checks.
pub fn schema_errors(exp: &dyn Experiment, cfg: &ExperimentConfig) -> Vec<String> {
    let mut errors = cfg.validate_common();
    errors.extend(exp.validate(cfg));
    errors
}

pub fn check_schema(exp: &dyn Experiment, cfg: &ExperimentConfig) -> CliResult<()> {
    let errors = schema_errors(exp, cfg);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(errors.join("; ")))
    }
}

pub fn checked_preflight(exp: &dyn Experiment, cfg: &ExperimentConfig) -> CliResult<PreflightReport> {
    let report = preflight(exp, cfg)?;
    if report.passed() {
        Ok(report)
    } else {
        let names: Vec<String> = report.failures.iter().map(|f| format!("[{}] {}", f.name, f.message)).collect();
        Err(CliError::Preflight(names.join("; ")))
    }
}

pub struct Completed {
    pub config: ExperimentConfig,
    pub outcome: Outcome,
    pub written: Written,
}

/// Runs one config end to end. `write_lock` serializes file output when
/// several experiments share a pool.
pub fn run_config(
    registry: &ExperimentRegistry,
    cfg: &ExperimentConfig,
    out_dir: &Path,
    write_lock: &Mutex<()>,
) -> anyhow::Result<Completed> {
    let exp = registry.get(&cfg.kind)?;
    check_schema(exp.as_ref(), cfg)?;
    let report = checked_preflight(exp.as_ref(), cfg)?;
    let start = Instant::now();
    let outcome = exp.run(cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let written = {
        let _guard = write_lock.lock().unwrap_or_else(|e| e.into_inner());
        write_outputs(out_dir, cfg, &outcome, &report, elapsed)?
    };
    Ok(Completed {
        config: cfg.clone(),
        outcome,
        written,
    })
}

pub fn resolve_out_dir(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// All `*.toml` files under `dir`, sorted by name.
pub fn config_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Config(format!("no .toml configs in {}", dir.display())).into());
    }
    Ok(files)
}

/// Runs every config on a pool of `workers` threads. Results come back in
/// input order; the first error (by input order) is returned.
pub fn run_many(
    registry: &ExperimentRegistry,
    configs: &[(ExperimentConfig, PathBuf)],
    workers: usize,
) -> anyhow::Result<Vec<Completed>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
    let lock = Mutex::new(());
    let results: Vec<anyhow::Result<Completed>> = pool.install(|| {
        configs
            .par_iter()
            .map(|(cfg, out)| run_config(registry, cfg, out, &lock))
            .collect()
    });
    results.into_iter().collect()
}
