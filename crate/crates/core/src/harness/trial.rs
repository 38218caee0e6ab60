//! Single-trial execution: generate the private sample and the paired query
//! stream, run the configured algorithm, and score the answers against the
//! hidden labels.
//!
//! The engines only ever see feature points; hidden labels stay on the
//! harness side and enter only the final mismatch count.

use std::time::Instant;

use serde::Serialize;

use crate::data::{DatasetOrigin, Example, Feature, LabeledDataset};
use crate::engine::{derive_cutoff, run_agnostic_pcqr, run_subsamp, AnswerRecord, ErmLearner};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, Mode};
use crate::hypothesis::{erm, expected_error, SyntheticDistribution};
use crate::relabel::relabel;
use crate::rng::RandomSource;
use crate::semiprivate::run_universal;

/// Draw `n` i.i.d. examples: `x ~ D_X`, label `h*(x)` flipped independently
/// with probability `gamma`.
pub fn gen_synthetic(
    d: &SyntheticDistribution,
    n: usize,
    rng: &mut RandomSource,
) -> Result<LabeledDataset> {
    if n < 1 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    let mut items = Vec::with_capacity(n);
    for _ in 0..n {
        let x = d.marginal().sample(rng);
        let mut y = d.truth().evaluate(x)?;
        if rng.uniform() < d.noise_rate() {
            y = y.flipped();
        }
        items.push(Example { x, y });
    }
    Ok(LabeledDataset::new(items, DatasetOrigin::Raw))
}

/// One per-query trace line (JSON object per line).
#[derive(Debug, Clone, Serialize)]
pub struct TraceLine {
    pub trial: u32,
    pub j: usize,
    pub x: Feature,
    pub y_true: u8,
    pub y_priv: u8,
    pub stable: bool,
    pub post_halt: bool,
    pub c: u64,
    pub dist: Option<u64>,
}

/// Engine summary attached to each trial result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineSummary {
    pub n: usize,
    pub n_prime: usize,
    #[serde(rename = "T")]
    pub cutoff: u64,
    pub lambda: f64,
    pub k: usize,
    pub w: f64,
    pub halted_at: Option<usize>,
    pub unstable_count: u64,
    pub avg_error: f64,
    pub scale_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_o: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_switch_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cover_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_priv: Option<String>,
}

/// Result of one trial. Reproducible from `(config, trial index)` alone;
/// equality ignores wall-clock timing.
#[derive(Debug, Clone, Serialize)]
pub struct TrialResult {
    pub trial: u32,
    pub seed: u64,
    pub mode: Mode,
    /// Average mismatch against the hidden true labels (engine modes), or the
    /// exact expected error of the relabeling hypothesis (relabel-only).
    pub avg_error: f64,
    /// `avg_error - gamma` for engine modes; the relabeling hypothesis's
    /// excess over ERM for relabel-only.
    pub excess: f64,
    pub unstable_count: u64,
    pub halted_at: Option<usize>,
    pub elapsed_ms: f64,
    pub summary: serde_json::Value,
}

impl PartialEq for TrialResult {
    fn eq(&self, other: &Self) -> bool {
        self.trial == other.trial
            && self.seed == other.seed
            && self.mode == other.mode
            && self.avg_error == other.avg_error
            && self.excess == other.excess
            && self.unstable_count == other.unstable_count
            && self.halted_at == other.halted_at
            && self.summary == other.summary
    }
}

/// A trial result plus its per-query trace lines (empty unless requested).
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub result: TrialResult,
    pub trace: Vec<String>,
}

fn mismatch_rate(answers: &[AnswerRecord], hidden: &LabeledDataset) -> f64 {
    debug_assert_eq!(answers.len(), hidden.len());
    let wrong = answers
        .iter()
        .zip(hidden.iter())
        .filter(|(a, e)| a.label != e.y)
        .count();
    wrong as f64 / answers.len().max(1) as f64
}

fn trace_lines(trial: u32, answers: &[AnswerRecord], hidden: &LabeledDataset) -> Vec<String> {
    answers
        .iter()
        .zip(hidden.iter())
        .map(|(a, e)| {
            let line = TraceLine {
                trial,
                j: a.index,
                x: a.query,
                y_true: e.y.as_u8(),
                y_priv: a.label.as_u8(),
                stable: a.stable,
                post_halt: a.post_halt,
                c: a.unstable_count,
                dist: a.margin,
            };
            serde_json::to_string(&line).expect("trace line serializes")
        })
        .collect()
}

fn noise_lines(trial: u32, draws: &[crate::engine::NoiseDraw]) -> Vec<String> {
    draws
        .iter()
        .map(|d| {
            serde_json::json!({
                "trial": trial,
                "stage": d.stage,
                "scale": d.scale,
                "value": d.value,
            })
            .to_string()
        })
        .collect()
}

fn relabel_line(trial: u32, run: &crate::engine::PipelineRun) -> String {
    serde_json::json!({
        "trial": trial,
        "stage": "relabel",
        "cover_size": run.cover_size,
        "chosen": run.chosen.descriptor(),
        "error_before": run.relabel_error_before,
        "error_after": run.relabel_error_after,
    })
    .to_string()
}

/// Run one trial of the configured mode. Deterministic in `(config, trial)`:
/// the sample, query stream, and algorithm draw from independent child
/// streams keyed by the trial index and a stage name.
pub fn run_trial(config: &ExperimentConfig, trial: u32, want_trace: bool) -> Result<TrialOutput> {
    config.validate()?;
    let started = Instant::now();
    let family = config.family()?;
    let d = config.distribution()?;
    let budget = config.budget()?;
    let target = config.accuracy()?;
    let learner = ErmLearner {
        family: family.clone(),
    };

    let root = RandomSource::new(config.seed);
    let mut data_rng = root.child(u64::from(trial), "train-data");
    let mut query_rng = root.child(u64::from(trial), "query-data");
    let mut algo_rng = root.child(u64::from(trial), "algorithm");

    let s = gen_synthetic(&d, config.n, &mut data_rng)?;

    let (avg_error, excess, unstable, halted_at, summary, trace) = match config.mode {
        Mode::RelabelOnly => {
            let res = relabel(&s, &family, &mut algo_rng)?;
            let err_chosen = expected_error(&res.chosen, &d)?;
            let err_erm = expected_error(&erm(&family, &s)?, &d)?;
            let summary = serde_json::json!({
                "n": config.n,
                "cover_size": res.cover_size,
                "chosen": res.chosen.descriptor(),
                "err_chosen": err_chosen,
                "err_erm": err_erm,
            });
            (err_chosen, err_chosen - err_erm, 0, None, summary, vec![])
        }
        Mode::Subsamp => {
            let v = gen_synthetic(&d, config.m, &mut query_rng)?;
            let queries = v.unlabeled();
            // The cutoff setting comes from the same formula the agnostic
            // pipeline uses; the engine itself treats T as an input.
            let cutoff = derive_cutoff(config.m, &target);
            let run = run_subsamp(
                &s,
                &queries,
                &learner,
                cutoff,
                &budget,
                target.beta(),
                config.scale_factor,
                &mut algo_rng,
            )?;
            let avg = mismatch_rate(&run.answers, &v);
            let summary = serde_json::to_value(EngineSummary {
                n: config.n,
                n_prime: config.n,
                cutoff: run.params.cutoff,
                lambda: run.params.lambda,
                k: run.params.k,
                w: run.params.width,
                halted_at: run.halted_at,
                unstable_count: run.unstable_count,
                avg_error: avg,
                scale_factor: run.params.scale_factor,
                m_o: None,
                phase_switch_index: None,
                cover_size: None,
                h_priv: None,
            })?;
            let trace = if want_trace {
                let mut lines = noise_lines(trial, &run.noise_log);
                lines.extend(trace_lines(trial, &run.answers, &v));
                lines
            } else {
                vec![]
            };
            (
                avg,
                avg - d.noise_rate(),
                run.unstable_count,
                run.halted_at,
                summary,
                trace,
            )
        }
        Mode::Agnostic => {
            let v = gen_synthetic(&d, config.m, &mut query_rng)?;
            let queries = v.unlabeled();
            let run = run_agnostic_pcqr(
                &s,
                &queries,
                &family,
                &learner,
                &budget,
                &target,
                config.scale_factor,
                &mut algo_rng,
            )?;
            let avg = mismatch_rate(&run.engine.answers, &v);
            let summary = serde_json::to_value(EngineSummary {
                n: config.n,
                n_prime: run.params.n_prime,
                cutoff: run.engine.params.cutoff,
                lambda: run.engine.params.lambda,
                k: run.engine.params.k,
                w: run.engine.params.width,
                halted_at: run.engine.halted_at,
                unstable_count: run.engine.unstable_count,
                avg_error: avg,
                scale_factor: run.engine.params.scale_factor,
                m_o: None,
                phase_switch_index: None,
                cover_size: None,
                h_priv: None,
            })?;
            let trace = if want_trace {
                let mut lines = vec![relabel_line(trial, &run)];
                lines.extend(noise_lines(trial, &run.engine.noise_log));
                lines.extend(trace_lines(trial, &run.engine.answers, &v));
                lines
            } else {
                vec![]
            };
            (
                avg,
                avg - d.noise_rate(),
                run.engine.unstable_count,
                run.engine.halted_at,
                summary,
                trace,
            )
        }
        Mode::Universal => {
            let v = gen_synthetic(&d, config.m, &mut query_rng)?;
            let queries = v.unlabeled();
            let run = run_universal(
                &s,
                &queries,
                &family,
                &learner,
                &budget,
                &target,
                config.scale_factor,
                &mut algo_rng,
            )?;
            let avg = mismatch_rate(&run.answers, &v);
            let summary = serde_json::to_value(EngineSummary {
                n: config.n,
                n_prime: run.pipeline.params.n_prime,
                cutoff: run.pipeline.engine.params.cutoff,
                lambda: run.pipeline.engine.params.lambda,
                k: run.pipeline.engine.params.k,
                w: run.pipeline.engine.params.width,
                halted_at: run.pipeline.engine.halted_at,
                unstable_count: run.pipeline.engine.unstable_count,
                avg_error: avg,
                scale_factor: run.pipeline.engine.params.scale_factor,
                m_o: Some(run.m_o),
                phase_switch_index: Some(run.phase_switch),
                cover_size: run.cover_size,
                h_priv: run.h_priv.as_ref().map(|h| h.descriptor()),
            })?;
            let trace = if want_trace {
                let mut lines = vec![relabel_line(trial, &run.pipeline)];
                lines.extend(noise_lines(trial, &run.pipeline.engine.noise_log));
                lines.extend(trace_lines(trial, &run.answers, &v));
                lines
            } else {
                vec![]
            };
            (
                avg,
                avg - d.noise_rate(),
                run.pipeline.engine.unstable_count,
                run.pipeline.engine.halted_at,
                summary,
                trace,
            )
        }
    };

    Ok(TrialOutput {
        result: TrialResult {
            trial,
            seed: config.seed,
            mode: config.mode,
            avg_error,
            excess,
            unstable_count: unstable,
            halted_at,
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
            summary,
        },
        trace,
    })
}
