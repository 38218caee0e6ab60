//! Query-release engines: the realizable engine (subsample-and-aggregate
//! voting gated by a sparse-vector stability accountant) and the full agnostic
//! pipeline (subsample, relabel, resample, engine), including every parameter
//! derivation.
//!
//! Parameter formulas are transcribed verbatim; all logarithms are natural.
//! The canonical constants put desk-scale runs out of reach (`k` lands in the
//! thousands and the required sample in the millions), so `scale_factor`
//! multiplies the noise scale, ensemble count, and threshold width after the
//! exact values are computed. Canonical values are always computed and carried
//! alongside, and a run with `scale_factor != 1` is marked non-canonical.

use serde::Serialize;

use crate::data::{
    resample_with_replacement, sample_without_replacement, AccuracyTarget, Feature, Label,
    LabeledDataset, PrivacyBudget, UnlabeledDataset,
};
use crate::error::{Error, Result};
use crate::hypothesis::{erm, Hypothesis, HypothesisFamily};
use crate::mechanisms::{laplace_sample, stability_test_traced, StabilityOutcome, StabilityQuery};
use crate::relabel::relabel;
use crate::rng::RandomSource;

/// Parameters derived by the agnostic pipeline before any data is touched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgnosticParams {
    /// Working sample size `floor(eps * n / 56)`.
    pub n_prime: usize,
    /// Unstable-query cutoff `T`, ceiled after
    /// `max(1, m*alpha/8 + sqrt(3 m alpha ln(m/beta))/4)`.
    pub cutoff: u64,
    /// `alpha * max(1, sqrt(m * alpha))`.
    pub eps_prime: f64,
    /// Engine privacy parameter `min(1, eps') / ln(2/delta)`.
    pub eps_hat: f64,
    /// Engine failure parameter `delta / (2 e^{min(1, eps')} ln(2/delta))`.
    pub delta_hat: f64,
}

/// Unstable-query cutoff `T`: the max with 1 is taken before the ceiling.
pub fn derive_cutoff(m: usize, target: &AccuracyTarget) -> u64 {
    let ma = m as f64 * target.alpha();
    let raw = (ma / 8.0 + 0.25 * (3.0 * ma * (m as f64 / target.beta()).ln()).sqrt()).max(1.0);
    raw.ceil() as u64
}

/// Derive the agnostic pipeline parameters for `m` queries and a private
/// sample of size `n`.
pub fn derive_agnostic_params(
    budget: &PrivacyBudget,
    target: &AccuracyTarget,
    m: usize,
    n: usize,
) -> Result<AgnosticParams> {
    if m < 1 {
        return Err(Error::invalid("need at least one query"));
    }
    let n_prime = (budget.epsilon() * n as f64 / 56.0).floor() as usize;
    if n_prime < 1 {
        let needed = (56.0 / budget.epsilon()).ceil() as usize;
        return Err(Error::infeasible(format!(
            "working sample floor(eps*n/56) is empty at n = {n}; need n >= {needed}"
        )));
    }
    let alpha = target.alpha();
    let ma = m as f64 * alpha;
    let eps_prime = alpha * 1f64.max(ma.sqrt());
    let eps_star = eps_prime.min(1.0);
    let log_two_over_delta = (2.0 / budget.delta()).ln();
    Ok(AgnosticParams {
        n_prime,
        cutoff: derive_cutoff(m, target),
        eps_prime,
        eps_hat: eps_star / log_two_over_delta,
        delta_hat: budget.delta() / (2.0 * eps_star.exp() * log_two_over_delta),
    })
}

/// Parameters of the realizable engine. `lambda`, `k`, and `width` hold the
/// effective (possibly scaled) values; the `canonical_*` fields keep the exact
/// formula outputs at `scale_factor = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubSampParams {
    pub cutoff: u64,
    /// Noise scale for the stability accountant.
    pub lambda: f64,
    /// Ensemble size (number of disjoint training blocks), ceiled.
    pub k: usize,
    /// Threshold width `w`.
    pub width: f64,
    pub scale_factor: f64,
    pub canonical_lambda: f64,
    /// Canonical `k` before ceiling.
    pub canonical_k: f64,
    pub canonical_width: f64,
}

impl SubSampParams {
    pub fn is_canonical(&self) -> bool {
        self.scale_factor == 1.0
    }
}

/// Derive the engine parameters:
/// `lambda = sqrt(32 T ln(2/delta)) / eps`,
/// `k = ceil(34 sqrt(2) lambda ln(4 m T / min(delta, beta/2)))`,
/// `w = 2 lambda ln(2 m / delta)`,
/// each multiplied by `scale_factor` after exact computation.
pub fn derive_subsamp_params(
    cutoff: u64,
    budget: &PrivacyBudget,
    beta: f64,
    m: usize,
    scale_factor: f64,
) -> Result<SubSampParams> {
    if cutoff < 1 {
        return Err(Error::invalid("cutoff T must be at least 1"));
    }
    if m < 1 {
        return Err(Error::invalid("need at least one query"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid(format!("beta must lie in (0, 1), got {beta}")));
    }
    if !scale_factor.is_finite() || scale_factor <= 0.0 {
        return Err(Error::invalid(format!(
            "scale factor must be a positive real, got {scale_factor}"
        )));
    }
    let eps = budget.epsilon();
    let delta = budget.delta();
    let t = cutoff as f64;
    let lambda_c = (32.0 * t * (2.0 / delta).ln()).sqrt() / eps;
    let k_c = 34.0 * std::f64::consts::SQRT_2
        * lambda_c
        * (4.0 * m as f64 * t / delta.min(beta / 2.0)).ln();
    let width_c = 2.0 * lambda_c * (2.0 * m as f64 / delta).ln();
    let k = (k_c * scale_factor).ceil() as usize;
    Ok(SubSampParams {
        cutoff,
        lambda: lambda_c * scale_factor,
        k,
        width: width_c * scale_factor,
        scale_factor,
        canonical_lambda: lambda_c,
        canonical_k: k_c,
        canonical_width: width_c,
    })
}

/// Oracle access to a non-private PAC learner.
pub trait Learner {
    fn learn(&self, sample: &LabeledDataset) -> Result<Hypothesis>;
}

/// ERM over a fixed family; a valid agnostic and realizable PAC learner that
/// is exactly computable for the built-in families.
#[derive(Debug, Clone)]
pub struct ErmLearner {
    pub family: HypothesisFamily,
}

impl Learner for ErmLearner {
    fn learn(&self, sample: &LabeledDataset) -> Result<Hypothesis> {
        erm(&self.family, sample)
    }
}

/// Split `s_hat` in index order into `k` blocks of `floor(|S|/k)` records
/// (remainder records dropped) and train one hypothesis per block. Blocks are
/// pairwise disjoint by construction.
pub fn train_ensemble(
    s_hat: &LabeledDataset,
    k: usize,
    learner: &dyn Learner,
) -> Result<Vec<Hypothesis>> {
    if k < 1 {
        return Err(Error::invalid("ensemble size k must be at least 1"));
    }
    let block = s_hat.len() / k;
    if block == 0 {
        return Err(Error::infeasible(format!(
            "cannot split {} records into k = {k} nonempty blocks; need |S| >= {k}",
            s_hat.len()
        )));
    }
    let mut ensemble = Vec::with_capacity(k);
    for j in 0..k {
        let items = s_hat.items()[j * block..(j + 1) * block].to_vec();
        let sub = LabeledDataset::new(items, s_hat.origin());
        ensemble.push(learner.learn(&sub)?);
    }
    Ok(ensemble)
}

/// One logged noise draw, for the harness's trace output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseDraw {
    pub stage: &'static str,
    pub scale: f64,
    pub value: f64,
}

/// One answered query.
#[derive(Debug, Clone, PartialEq)]
pub struct AnswerRecord {
    pub index: usize,
    pub query: Feature,
    pub label: Label,
    /// Whether the stability test released the majority vote.
    pub stable: bool,
    /// Set once the unstable budget is exhausted; such labels are uniform.
    pub post_halt: bool,
    /// Vote margin `|ct(0) - ct(1)|`; absent for post-halt answers.
    pub margin: Option<u64>,
    /// Unstable counter after this answer.
    pub unstable_count: u64,
}

/// Online state of the realizable engine over one query stream.
#[derive(Debug, Clone)]
pub struct EngineState {
    ensemble: Vec<Hypothesis>,
    cutoff: u64,
    lambda: f64,
    width: f64,
    noisy_threshold: f64,
    unstable_count: u64,
    halted: bool,
    answered: usize,
    noise_log: Vec<NoiseDraw>,
}

impl EngineState {
    /// Build the state, drawing the initial noisy threshold `w + Lap(lambda)`.
    pub fn new(
        ensemble: Vec<Hypothesis>,
        params: &SubSampParams,
        rng: &mut RandomSource,
    ) -> Result<Self> {
        let noise = laplace_sample(rng, params.lambda)?;
        let mut state = Self::with_initial_threshold(ensemble, params, params.width + noise)?;
        state.noise_log.push(NoiseDraw {
            stage: "initial-threshold",
            scale: params.lambda,
            value: noise,
        });
        Ok(state)
    }

    pub fn with_initial_threshold(
        ensemble: Vec<Hypothesis>,
        params: &SubSampParams,
        initial_threshold: f64,
    ) -> Result<Self> {
        if ensemble.is_empty() {
            return Err(Error::invalid("engine needs a nonempty ensemble"));
        }
        Ok(Self {
            ensemble,
            cutoff: params.cutoff,
            lambda: params.lambda,
            width: params.width,
            noisy_threshold: initial_threshold,
            unstable_count: 0,
            halted: false,
            answered: 0,
            noise_log: Vec::new(),
        })
    }

    pub fn halted(&self) -> bool {
        self.halted
    }

    pub fn unstable_count(&self) -> u64 {
        self.unstable_count
    }

    pub fn answered(&self) -> usize {
        self.answered
    }

    pub fn ensemble(&self) -> &[Hypothesis] {
        &self.ensemble
    }

    /// Noise draws made so far: (stage, scale, value) per Laplace sample.
    pub fn noise_log(&self) -> &[NoiseDraw] {
        &self.noise_log
    }

    /// Ensemble vote counts `(ct(0), ct(1))` at a query point.
    pub fn votes(&self, x: Feature) -> Result<(u64, u64)> {
        let mut ones = 0u64;
        for h in &self.ensemble {
            if h.evaluate(x)?.bit() {
                ones += 1;
            }
        }
        Ok((self.ensemble.len() as u64 - ones, ones))
    }

    /// Answer the next query. Before the cutoff is exhausted this is the
    /// majority vote gated by the stability test (an unstable query emits a
    /// uniform label, bumps the counter, and redraws the noisy threshold);
    /// afterwards every answer is a uniform label flagged `post_halt`.
    pub fn answer(&mut self, x: Feature, rng: &mut RandomSource) -> Result<AnswerRecord> {
        let index = self.answered;
        self.answered += 1;

        if self.halted {
            return Ok(AnswerRecord {
                index,
                query: x,
                label: Label::from_bit(rng.coin()),
                stable: false,
                post_halt: true,
                margin: None,
                unstable_count: self.unstable_count,
            });
        }

        let (ct0, ct1) = self.votes(x)?;
        // Majority with ties to label 0; a tie has margin 0 and is maximally
        // unstable regardless of the label choice.
        let majority = Label::from_bit(ct1 > ct0);
        let margin = ct0.abs_diff(ct1);
        let (outcome, test_noise) = stability_test_traced(
            &StabilityQuery {
                value: majority,
                dist: margin as f64,
                threshold: self.noisy_threshold,
                eps_stab: 1.0 / (2.0 * self.lambda),
            },
            rng,
        )?;
        self.noise_log.push(NoiseDraw {
            stage: "stability-test",
            scale: 2.0 * self.lambda,
            value: test_noise,
        });
        let (label, stable) = match outcome {
            StabilityOutcome::Stable(l) => (l, true),
            StabilityOutcome::Unstable => {
                self.unstable_count += 1;
                let redraw = laplace_sample(rng, self.lambda)?;
                self.noisy_threshold = self.width + redraw;
                self.noise_log.push(NoiseDraw {
                    stage: "threshold-redraw",
                    scale: self.lambda,
                    value: redraw,
                });
                if self.unstable_count > self.cutoff {
                    self.halted = true;
                }
                (Label::from_bit(rng.coin()), false)
            }
        };
        Ok(AnswerRecord {
            index,
            query: x,
            label,
            stable,
            post_halt: false,
            margin: Some(margin),
            unstable_count: self.unstable_count,
        })
    }
}

/// Outcome of one engine run over a query stream.
#[derive(Debug, Clone)]
pub struct EngineRun {
    pub params: SubSampParams,
    pub answers: Vec<AnswerRecord>,
    /// Index of the query whose unstable answer exhausted the cutoff, if any.
    pub halted_at: Option<usize>,
    pub unstable_count: u64,
    /// Laplace draws in order: initial threshold, per-query stability noise,
    /// per-unstable redraws.
    pub noise_log: Vec<NoiseDraw>,
}

/// Run the realizable engine: derive parameters, draw the initial noisy
/// threshold, train the ensemble on disjoint blocks, then answer the stream in
/// order. Always returns exactly one record per query.
#[allow(clippy::too_many_arguments)]
pub fn run_subsamp(
    s: &LabeledDataset,
    queries: &UnlabeledDataset,
    learner: &dyn Learner,
    cutoff: u64,
    budget: &PrivacyBudget,
    beta: f64,
    scale_factor: f64,
    rng: &mut RandomSource,
) -> Result<EngineRun> {
    // An empty stream still derives parameters (as if m = 1) so the run can
    // report them; no query consumes them.
    let m = queries.len().max(1);
    let params = derive_subsamp_params(cutoff, budget, beta, m, scale_factor)?;
    let ensemble = train_ensemble(s, params.k, learner)?;
    let mut state = EngineState::new(ensemble, &params, rng)?;

    let mut answers = Vec::with_capacity(queries.len());
    let mut halted_at = None;
    for &x in queries.points() {
        let was_halted = state.halted();
        let rec = state.answer(x, rng)?;
        if !was_halted && state.halted() {
            halted_at = Some(rec.index);
        }
        answers.push(rec);
    }
    let unstable_count = state.unstable_count();
    Ok(EngineRun {
        params,
        answers,
        halted_at,
        unstable_count,
        noise_log: state.noise_log,
    })
}

/// Outcome of the full agnostic pipeline.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub params: AgnosticParams,
    /// Size of the dichotomy cover the relabel selection ran over.
    pub cover_size: usize,
    /// The relabeling hypothesis.
    pub chosen: Hypothesis,
    /// Empirical error of the chosen hypothesis before and after relabeling;
    /// the latter is exactly zero.
    pub relabel_error_before: f64,
    pub relabel_error_after: f64,
    pub engine: EngineRun,
    /// Stage names in execution order, for trace-order assertions.
    pub stage_order: Vec<&'static str>,
}

/// The full agnostic pipeline: derive parameters, subsample the working set,
/// relabel it, resample with replacement, and hand the result to the
/// realizable engine with privacy parameters `(eps_hat, delta_hat)`.
#[allow(clippy::too_many_arguments)]
pub fn run_agnostic_pcqr(
    s: &LabeledDataset,
    queries: &UnlabeledDataset,
    family: &HypothesisFamily,
    learner: &dyn Learner,
    budget: &PrivacyBudget,
    target: &AccuracyTarget,
    scale_factor: f64,
    rng: &mut RandomSource,
) -> Result<PipelineRun> {
    if queries.is_empty() {
        return Err(Error::invalid("need at least one query"));
    }
    let params = derive_agnostic_params(budget, target, queries.len(), s.len())?;
    let mut stage_order = Vec::with_capacity(4);

    stage_order.push("subsample");
    let s_prime = sample_without_replacement(s, params.n_prime, rng)?;

    stage_order.push("relabel");
    let relabeled = relabel(&s_prime, family, rng)?;

    stage_order.push("resample");
    let s_hat = resample_with_replacement(&relabeled.relabeled, params.n_prime, rng)?;

    stage_order.push("engine");
    let engine_budget = PrivacyBudget::new(params.eps_hat, params.delta_hat)?;
    let engine = run_subsamp(
        &s_hat,
        queries,
        learner,
        params.cutoff,
        &engine_budget,
        target.beta(),
        scale_factor,
        rng,
    )?;

    Ok(PipelineRun {
        params,
        cover_size: relabeled.cover_size,
        chosen: relabeled.chosen,
        relabel_error_before: relabeled.error_before,
        relabel_error_after: relabeled.error_after,
        engine,
        stage_order,
    })
}
