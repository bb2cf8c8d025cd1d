mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

use config::{Experiment, ExperimentConfig};
use experiments::{Context, Outcome, RunError};

/// Runs a named experiment on a 2D wave equation with potential and writes
/// CSV tables plus a JSON run report.
#[derive(Debug, Parser)]
#[command(name = "dispwave2d", version)]
struct Args {
    /// regularity, propagate, decay, strichartz, kernel-integral, semilinear or selfcheck
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Print what each emitted column verifies.
    #[arg(long)]
    paper_refs: bool,
}

#[derive(Debug, Serialize)]
struct RunReport<'a> {
    experiment: &'static str,
    seed: u64,
    config: &'a ExperimentConfig,
    verdicts: &'a std::collections::BTreeMap<String, String>,
    tables: Vec<String>,
    wall_time_seconds: f64,
    warnings: &'a [String],
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("dispwave2d: {message}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let Some(experiment) = Experiment::parse(&args.experiment) else {
        let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
        return fail(2, format!("unknown experiment `{}`; expected one of {}", args.experiment, names.join(", ")));
    };
    if args.paper_refs {
        println!("{}", experiments::paper_refs(experiment));
    }
    let (cfg, base) = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(2, format!("{}: {e}", args.config.display())),
    };
    let started = Instant::now();
    let mut warnings = Vec::new();
    if let Some(named) = cfg.experiment {
        if named != experiment {
            warnings.push(format!("config names experiment `{}`; running `{}`", named.name(), experiment.name()));
        }
    }
    let pot = match cfg.potential(&base) {
        Ok(p) => p,
        Err(e) => return fail(2, format!("{}: {e}", args.config.display())),
    };
    let seed = args.seed.unwrap_or(cfg.seed);
    let ctx = Context { cfg: &cfg, pot, seed };
    let outcome: Outcome = match experiments::run(experiment, &ctx) {
        Ok(o) => o,
        Err(e) => return fail(e.exit_code() as u8, e),
    };
    warnings.extend(outcome.warnings.iter().cloned());

    let dir = args.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return fail(2, format!("cannot create {}: {e}", dir.display()));
    }
    for t in &outcome.tables {
        if let Err(e) = t.write(&dir) {
            return fail(2, format!("cannot write {}: {e}", dir.join(t.file_name()).display()));
        }
    }
    let report = RunReport {
        experiment: experiment.name(),
        seed,
        config: &cfg,
        verdicts: &outcome.verdicts,
        tables: outcome.tables.iter().map(|t| t.file_name()).collect(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        warnings: &warnings,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Err(e) = std::fs::write(dir.join("report.json"), json + "\n") {
        return fail(2, format!("cannot write report: {e}"));
    }
    for (k, v) in &outcome.verdicts {
        println!("{k}: {v}");
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if !outcome.failed.is_empty() {
        return fail(4, RunError::Validation(outcome.failed.clone()));
    }
    ExitCode::SUCCESS
}
