use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adiabat_cli::config::ExperimentConfig;
use adiabat_cli::error::CliError;
use adiabat_cli::experiments::ExperimentRegistry;
use adiabat_cli::preflight::preflight;
use adiabat_cli::runner::{self, Completed};
use anyhow::Context;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adiabat", version, about = "Run exact-diagonalization experiments from TOML configs")]
struct Cli {
    /// Experiment config (a directory of configs for `sweep`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Exit with code 4 when a contract check fails.
    #[arg(long, global = true)]
    assert: bool,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate, preflight and run one config.
    Run,
    /// Schema and physics preflight only; prints the report.
    Validate,
    /// Run a `filter-check` config and print the filter report.
    FilterCheck,
    /// Run a `kubo` config and print the response report.
    Kubo,
    /// Run every config in a directory on the worker pool.
    Sweep,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

fn config_path(cli: &Cli) -> anyhow::Result<&Path> {
    cli.config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()).into())
}

fn load(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(config_path(cli)?)?;
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    Ok(cfg)
}

fn workers(cli: &Cli, cfg: Option<&ExperimentConfig>) -> anyhow::Result<usize> {
    let n = cli
        .workers
        .or_else(|| cfg.and_then(|c| c.workers))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()).into());
    }
    Ok(n)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let registry = ExperimentRegistry::default();
    match cli.command {
        Command::Run => {
            let cfg = load(&cli)?;
            let done = run_one(&cli, &registry, cfg)?;
            finish(&cli, &[done])
        }
        Command::FilterCheck | Command::Kubo => {
            let expected = if matches!(cli.command, Command::Kubo) { "kubo" } else { "filter-check" };
            let cfg = load(&cli)?;
            if cfg.kind != expected {
                return Err(CliError::Config(format!("expected a {expected} config, got kind {:?}", cfg.kind)).into());
            }
            let done = run_one(&cli, &registry, cfg)?;
            let summary = &done.outcome.summary;
            let report = summary.get("filter").or_else(|| summary.get("responses"));
            println!("{}", serde_json::to_string_pretty(&serde_json::json!({
                "config_hash": done.config.hash(),
                "report": report,
                "checks": done.outcome.checks,
            }))?);
            finish(&cli, &[done])
        }
        Command::Validate => validate(&cli, &registry),
        Command::Sweep => {
            let dir = config_path(&cli)?;
            let configs = runner::config_files(dir)?
                .into_iter()
                .map(|p| {
                    let cfg = ExperimentConfig::load(&p)?;
                    let out = runner::resolve_out_dir(cli.out.as_deref(), &cfg);
                    Ok((cfg, out))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let done = runner::run_many(&registry, &configs, workers(&cli, None)?)?;
            finish(&cli, &done)
        }
    }
}

fn run_one(cli: &Cli, registry: &ExperimentRegistry, cfg: ExperimentConfig) -> anyhow::Result<Completed> {
    let n = workers(cli, Some(&cfg))?;
    let out = runner::resolve_out_dir(cli.out.as_deref(), &cfg);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().context("starting worker pool")?;
    let lock = std::sync::Mutex::new(());
    pool.install(|| runner::run_config(registry, &cfg, &out, &lock))
}

/// Reports check results; under `--assert` any failure exits with code 4.
fn finish(cli: &Cli, done: &[Completed]) -> anyhow::Result<()> {
    let mut failed = Vec::new();
    for d in done {
        for c in &d.outcome.checks {
            let verdict = if c.passed { "ok" } else { "FAILED" };
            eprintln!("[{}] {verdict}: {} = {:.4e} ({})", d.config.stem(), c.name, c.value, c.bound);
            if !c.passed {
                failed.push(format!("{}: {}", d.config.stem(), c.name));
            }
        }
        eprintln!("wrote {} and {}", d.written.csv.display(), d.written.json.display());
    }
    if cli.assert && !failed.is_empty() {
        return Err(CliError::Contract(failed.join("; ")).into());
    }
    Ok(())
}

/// Prints the preflight report. Schema errors exit with 2 and preflight
/// failures with 3; the report is printed either way.
fn validate(cli: &Cli, registry: &ExperimentRegistry) -> anyhow::Result<()> {
    let cfg = ExperimentConfig::load(config_path(cli)?)?;
    let exp = registry.get(&cfg.kind)?;
    let schema = runner::schema_errors(exp.as_ref(), &cfg);
    if !schema.is_empty() {
        print_report(&cfg, &schema, None)?;
        return Err(CliError::Config(schema.join("; ")).into());
    }
    let report = preflight(exp.as_ref(), &cfg)?;
    print_report(&cfg, &[], Some(&report))?;
    if !report.passed() {
        let names: Vec<&str> = report.failures.iter().map(|f| f.name.as_str()).collect();
        return Err(CliError::Preflight(format!("failed checks: {}", names.join(", "))).into());
    }
    Ok(())
}

fn print_report(
    cfg: &ExperimentConfig,
    schema: &[String],
    report: Option<&adiabat_cli::preflight::PreflightReport>,
) -> anyhow::Result<()> {
    let failures: Vec<serde_json::Value> = schema
        .iter()
        .map(|m| serde_json::json!({"name": "schema", "message": m}))
        .chain(report.into_iter().flat_map(|r| r.failures.iter().map(|f| serde_json::to_value(f).unwrap())))
        .collect();
    println!("{}", serde_json::to_string_pretty(&serde_json::json!({
        "kind": cfg.kind,
        "config_hash": cfg.hash(),
        "memory_gib": report.map(|r| r.memory_gib),
        "gaps": report.map(|r| &r.gaps),
        "failures": failures,
    }))?);
    Ok(())
}
