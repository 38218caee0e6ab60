//! Parameter sweeps: expand a grid over {n, m, alpha, gamma}, run every cell's
//! trials, aggregate, and emit a CSV table plus a median-excess monotonicity
//! report against n.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, Mode, SCHEMA_VERSION};
use crate::harness::trial::{run_trial, TrialResult};

/// A scalar or a list; lets sweep files write `n = 1000` or `n = [1000, 2000]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(vs) => vs.clone(),
        }
    }
}

/// Sweep file: the scalar experiment keys plus grids over n, m, alpha, and
/// noise_rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub mode: Mode,
    pub family: String,
    #[serde(default = "default_marginal")]
    pub marginal: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_hi: Option<f64>,
    pub noise_rate: OneOrMany<f64>,
    pub n: OneOrMany<usize>,
    pub m: OneOrMany<usize>,
    pub epsilon: f64,
    pub delta: f64,
    pub alpha: OneOrMany<f64>,
    pub beta: f64,
    #[serde(default = "default_scale")]
    pub scale_factor: f64,
    pub trials: u32,
    pub seed: u64,
}

fn default_marginal() -> String {
    "uniform".to_string()
}

fn default_scale() -> f64 {
    1.0
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        if cfg.expand().is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        Ok(cfg)
    }

    /// Cartesian product of the grid axes, in (n, m, alpha, gamma) nesting
    /// order.
    pub fn expand(&self) -> Vec<ExperimentConfig> {
        let mut cells = Vec::new();
        for &n in &self.n.values() {
            for &m in &self.m.values() {
                for &alpha in &self.alpha.values() {
                    for &gamma in &self.noise_rate.values() {
                        cells.push(ExperimentConfig {
                            schema_version: self.schema_version,
                            mode: self.mode,
                            family: self.family.clone(),
                            marginal: self.marginal.clone(),
                            truth: self.truth,
                            truth_lo: self.truth_lo,
                            truth_hi: self.truth_hi,
                            noise_rate: gamma,
                            n,
                            m,
                            epsilon: self.epsilon,
                            delta: self.delta,
                            alpha,
                            beta: self.beta,
                            scale_factor: self.scale_factor,
                            trials: self.trials,
                            seed: self.seed,
                        });
                    }
                }
            }
        }
        cells
    }
}

/// Per-cell aggregates over trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub trials: u32,
    pub mean_error: f64,
    pub mean_excess: f64,
    pub median_excess: f64,
    /// Fraction of trials with excess <= alpha.
    pub frac_within_alpha: f64,
    pub excess_q10: f64,
    pub excess_q90: f64,
    pub mean_unstable: f64,
    pub max_unstable: u64,
    pub halted_trials: u32,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Aggregate trial results. Order-independent: results are sorted internally,
/// so any completion order yields identical statistics.
pub fn aggregate(results: &[TrialResult], alpha: f64) -> SummaryStats {
    assert!(!results.is_empty());
    let mut excesses: Vec<f64> = results.iter().map(|r| r.excess).collect();
    excesses.sort_by(f64::total_cmp);
    let n = results.len() as f64;
    SummaryStats {
        trials: results.len() as u32,
        mean_error: results.iter().map(|r| r.avg_error).sum::<f64>() / n,
        mean_excess: excesses.iter().sum::<f64>() / n,
        median_excess: quantile(&excesses, 0.5),
        frac_within_alpha: excesses.iter().filter(|&&e| e <= alpha).count() as f64 / n,
        excess_q10: quantile(&excesses, 0.1),
        excess_q90: quantile(&excesses, 0.9),
        mean_unstable: results.iter().map(|r| r.unstable_count as f64).sum::<f64>() / n,
        max_unstable: results.iter().map(|r| r.unstable_count).max().unwrap_or(0),
        halted_trials: results.iter().filter(|r| r.halted_at.is_some()).count() as u32,
    }
}

/// One sweep cell outcome; failures are recorded and the sweep continues.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub stats: Option<SummaryStats>,
    pub error: Option<String>,
}

/// Whole-sweep outcome.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    /// One line per (m, alpha, gamma) group describing whether the median
    /// excess is non-increasing in n (one inversion tolerated).
    pub monotonicity: Vec<String>,
}

impl SweepReport {
    /// CSV table, one row per cell.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "n",
            "m",
            "alpha",
            "gamma",
            "trials",
            "mean_error",
            "mean_excess",
            "median_excess",
            "frac_within_alpha",
            "excess_q10",
            "excess_q90",
            "mean_unstable",
            "max_unstable",
            "halted_trials",
            "status",
        ])?;
        for c in &self.cells {
            let mut row = vec![
                c.n.to_string(),
                c.m.to_string(),
                c.alpha.to_string(),
                c.gamma.to_string(),
            ];
            match (&c.stats, &c.error) {
                (Some(s), _) => {
                    row.extend([
                        s.trials.to_string(),
                        s.mean_error.to_string(),
                        s.mean_excess.to_string(),
                        s.median_excess.to_string(),
                        s.frac_within_alpha.to_string(),
                        s.excess_q10.to_string(),
                        s.excess_q90.to_string(),
                        s.mean_unstable.to_string(),
                        s.max_unstable.to_string(),
                        s.halted_trials.to_string(),
                        "ok".to_string(),
                    ]);
                }
                (None, Some(err)) => {
                    row.extend(std::iter::repeat_n(String::new(), 10));
                    row.push(format!("error: {err}"));
                }
                (None, None) => unreachable!("cell has neither stats nor error"),
            }
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

/// Run every cell of the sweep. Trials within a cell run in parallel on the
/// global rayon pool; results are aggregated in trial-index order.
pub fn sweep_and_report(sweep: &SweepConfig) -> SweepReport {
    use rayon::prelude::*;

    let cells: Vec<SweepCell> = sweep
        .expand()
        .into_iter()
        .map(|cfg| {
            let outcome: Result<Vec<TrialResult>> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(&cfg, t, false).map(|o| o.result))
                .collect();
            match outcome {
                Ok(mut results) => {
                    results.sort_by_key(|r| r.trial);
                    SweepCell {
                        n: cfg.n,
                        m: cfg.m,
                        alpha: cfg.alpha,
                        gamma: cfg.noise_rate,
                        stats: Some(aggregate(&results, cfg.alpha)),
                        error: None,
                    }
                }
                Err(e) => SweepCell {
                    n: cfg.n,
                    m: cfg.m,
                    alpha: cfg.alpha,
                    gamma: cfg.noise_rate,
                    stats: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let monotonicity = monotonicity_report(&cells);
    SweepReport {
        cells,
        monotonicity,
    }
}

fn monotonicity_report(cells: &[SweepCell]) -> Vec<String> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(usize, String, String), Vec<(usize, f64)>> = BTreeMap::new();
    for c in cells {
        if let Some(s) = &c.stats {
            groups
                .entry((c.m, format!("{}", c.alpha), format!("{}", c.gamma)))
                .or_default()
                .push((c.n, s.median_excess));
        }
    }
    let mut lines = Vec::new();
    for ((m, alpha, gamma), mut pts) in groups {
        if pts.len() < 2 {
            continue;
        }
        pts.sort_by_key(|&(n, _)| n);
        let inversions = pts.windows(2).filter(|w| w[1].1 > w[0].1).count();
        let verdict = if inversions <= 1 { "ok" } else { "violated" };
        lines.push(format!(
            "median excess vs n at (m={m}, alpha={alpha}, gamma={gamma}): {verdict} ({inversions} inversions over {} points)",
            pts.len()
        ));
    }
    lines
}
