//! CLI harness: `run` one experiment config, `sweep` a parameter grid, or
//! `verify` the built-in suite. Parallelism across trials is controlled by
//! the `PCQR_PARALLELISM` environment variable (default: all cores).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use pcqr::engine::{derive_agnostic_params, derive_cutoff, derive_subsamp_params};
use pcqr::harness::{
    run_trial, sweep_and_report, verify_suite, ExperimentConfig, Mode, SweepConfig, TrialResult,
};
use pcqr::{PrivacyBudget, Result};

#[derive(Parser)]
#[command(
    name = "pcqr",
    version,
    about = "Private classification-query release: simulation harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config; writes results.jsonl and manifest.json.
    Run {
        /// Experiment config (flat key-value TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write per-query trace.jsonl.
        #[arg(long)]
        trace: bool,
    },
    /// Run a sweep grid; writes sweep.csv and manifest.json.
    Sweep {
        /// Sweep config (flat TOML; n, m, alpha, noise_rate may be arrays).
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the built-in verification suite; exit code 0 iff every check passes.
    Verify {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("PCQR_PARALLELISM") {
        if let Ok(threads) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build_global();
        }
    }
}

/// Derived-parameter snapshot for the run manifest: the canonical
/// (scale_factor = 1) engine constants next to the effective ones.
fn derived_manifest(cfg: &ExperimentConfig) -> Result<serde_json::Value> {
    let budget = cfg.budget()?;
    let target = cfg.accuracy()?;
    let snapshot = |m: usize| -> Result<serde_json::Value> {
        let (engine_budget, agnostic) = match cfg.mode {
            Mode::Subsamp => (budget, None),
            _ => {
                let p = derive_agnostic_params(&budget, &target, m, cfg.n)?;
                (PrivacyBudget::new(p.eps_hat, p.delta_hat)?, Some(p))
            }
        };
        let cutoff = agnostic
            .map(|p| p.cutoff)
            .unwrap_or_else(|| derive_cutoff(m, &target));
        let scaled = derive_subsamp_params(cutoff, &engine_budget, cfg.beta, m, cfg.scale_factor)?;
        let canonical = derive_subsamp_params(cutoff, &engine_budget, cfg.beta, m, 1.0)?;
        Ok(serde_json::json!({
            "agnostic": agnostic,
            "engine_scaled": scaled,
            "engine_canonical": canonical,
        }))
    };
    match cfg.mode {
        Mode::RelabelOnly => Ok(serde_json::json!({
            "n_prime": cfg.n,
        })),
        Mode::Universal => {
            let family = cfg.family()?;
            let m_o = pcqr::universal_phase_length(&family, &target);
            let m_prime = m_o.min(cfg.m);
            Ok(serde_json::json!({
                "m_o": m_o,
                "phase_switch": m_prime,
                "phase_one": snapshot(m_prime)?,
            }))
        }
        _ => snapshot(cfg.m),
    }
}

fn write_manifest(
    out: &Path,
    command: &str,
    config_json: serde_json::Value,
    derived: serde_json::Value,
) -> Result<()> {
    let manifest = serde_json::json!({
        "schema_version": pcqr::harness::SCHEMA_VERSION,
        "command": command,
        "config": config_json,
        "derived": derived,
    });
    fs::write(
        out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(())
}

fn cmd_run(config_path: &Path, out: &Path, trace: bool) -> Result<()> {
    let text = fs::read_to_string(config_path)?;
    let cfg = ExperimentConfig::from_toml_str(&text)?;
    fs::create_dir_all(out)?;
    write_manifest(out, "run", serde_json::to_value(&cfg)?, derived_manifest(&cfg)?)?;

    let outputs: Result<Vec<_>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(&cfg, t, trace))
        .collect();
    let mut outputs = outputs?;
    outputs.sort_by_key(|o| o.result.trial);

    let mut results = fs::File::create(out.join("results.jsonl"))?;
    for o in &outputs {
        writeln!(results, "{}", serde_json::to_string(&o.result)?)?;
    }
    if trace {
        let mut tf = fs::File::create(out.join("trace.jsonl"))?;
        for o in &outputs {
            for line in &o.trace {
                writeln!(tf, "{line}")?;
            }
        }
    }

    let results_only: Vec<TrialResult> = outputs.into_iter().map(|o| o.result).collect();
    let stats = pcqr::harness::sweep::aggregate(&results_only, cfg.alpha);
    println!(
        "mode {} | trials {} | mean error {:.4} | mean excess {:.4} | excess <= alpha in {:.0}% | results in {}",
        cfg.mode,
        stats.trials,
        stats.mean_error,
        stats.mean_excess,
        stats.frac_within_alpha * 100.0,
        out.display()
    );
    Ok(())
}

fn cmd_sweep(config_path: &Path, out: &Path) -> Result<()> {
    let text = fs::read_to_string(config_path)?;
    let sweep = SweepConfig::from_toml_str(&text)?;
    fs::create_dir_all(out)?;
    write_manifest(
        out,
        "sweep",
        serde_json::to_value(&sweep)?,
        serde_json::json!({ "cells": sweep.expand().len() }),
    )?;

    let report = sweep_and_report(&sweep);
    fs::write(out.join("sweep.csv"), report.to_csv()?)?;
    fs::write(
        out.join("report.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    for line in &report.monotonicity {
        println!("{line}");
    }
    let failed = report.cells.iter().filter(|c| c.error.is_some()).count();
    println!(
        "{} cells ({} failed) | table in {}",
        report.cells.len(),
        failed,
        out.join("sweep.csv").display()
    );
    if failed > 0 {
        for cell in report.cells.iter().filter(|c| c.error.is_some()) {
            eprintln!(
                "cell (n={}, m={}, alpha={}, gamma={}): {}",
                cell.n,
                cell.m,
                cell.alpha,
                cell.gamma,
                cell.error.as_deref().unwrap_or("")
            );
        }
    }
    Ok(())
}

fn cmd_verify(seed: u64) -> Result<bool> {
    let report = verify_suite(seed);
    print!("{report}");
    Ok(report.passed())
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let outcome: Result<bool> = match &cli.command {
        Command::Run { config, out, trace } => cmd_run(config, out, *trace).map(|()| true),
        Command::Sweep { config, out } => cmd_sweep(config, out).map(|()| true),
        Command::Verify { seed } => cmd_verify(*seed),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
