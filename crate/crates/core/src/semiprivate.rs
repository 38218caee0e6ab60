//! Semi-private learning over a public unlabeled cover, and the universal
//! wrapper that answers any number of queries: the first `m_o` answers come
//! from the agnostic engine, after which the query points themselves (public
//! by problem definition) seed a dichotomy cover from which a hypothesis is
//! selected once and reused for every remaining query.

use crate::data::{AccuracyTarget, LabeledDataset, PrivacyBudget, UnlabeledDataset};
use crate::engine::{run_agnostic_pcqr, AnswerRecord, Learner, PipelineRun};
use crate::error::{Error, Result};
use crate::hypothesis::{
    batch_empirical_error, enumerate_dichotomies, DichotomyCover, Hypothesis, HypothesisFamily,
};
use crate::mechanisms::{exponential_mechanism_index, ScoredCandidateSet};
use crate::rng::RandomSource;

/// Outcome of the semi-private cover learner.
#[derive(Debug, Clone)]
pub struct CoverLearnerResult {
    /// The selected hypothesis; always a member of the constructed cover.
    pub h_priv: Hypothesis,
    pub cover_size: usize,
}

/// Build the dichotomy cover of `family` on the distinct points of the public
/// set. When the public set is large enough this is an alpha-cover of the
/// family under the distribution the points were drawn from.
pub fn build_cover(
    family: &HypothesisFamily,
    t_pub: &UnlabeledDataset,
) -> Result<DichotomyCover> {
    if t_pub.is_empty() {
        return Err(Error::invalid("public unlabeled set must be nonempty"));
    }
    enumerate_dichotomies(family, t_pub)
}

/// Semi-private learner: enumerate the cover on the public points, then select
/// from it with the exponential mechanism scored by negated empirical error on
/// the private sample (sensitivity `1/|S|`).
pub fn sspp_learn(
    s: &LabeledDataset,
    t_pub: &UnlabeledDataset,
    family: &HypothesisFamily,
    em_epsilon: f64,
    rng: &mut RandomSource,
) -> Result<CoverLearnerResult> {
    if s.is_empty() {
        return Err(Error::invalid("private sample must be nonempty"));
    }
    let cover = build_cover(family, t_pub)?;
    let errors = batch_empirical_error(cover.representatives(), s)?;
    let set = ScoredCandidateSet::from_errors(
        cover.representatives().to_vec(),
        &errors,
        s.len(),
        em_epsilon,
    )?;
    let idx = exponential_mechanism_index(&set, rng)?;
    Ok(CoverLearnerResult {
        h_priv: set.candidates()[idx].clone(),
        cover_size: cover.len(),
    })
}

/// Number of engine-phase queries: `ceil(32 (d ln(1/alpha) + ln(1/beta)) / alpha)`.
pub fn universal_phase_length(family: &HypothesisFamily, target: &AccuracyTarget) -> usize {
    let d = f64::from(family.vc_dimension());
    let alpha = target.alpha();
    let beta = target.beta();
    (32.0 * (d * (1.0 / alpha).ln() + (1.0 / beta).ln()) / alpha).ceil() as usize
}

/// Outcome of the universal wrapper.
#[derive(Debug, Clone)]
pub struct UniversalRun {
    /// Engine-phase length `m_o`.
    pub m_o: usize,
    /// Queries actually answered by the engine: `min(m_o, m)`.
    pub phase_switch: usize,
    /// The agnostic pipeline run that served phase one.
    pub pipeline: PipelineRun,
    /// Cover size of the tail-phase learner, when the tail phase ran.
    pub cover_size: Option<usize>,
    /// Tail-phase hypothesis, when the tail phase ran.
    pub h_priv: Option<Hypothesis>,
    /// All `m` answers in stream order.
    pub answers: Vec<AnswerRecord>,
}

/// Answer an arbitrarily long query stream. The first `min(m_o, m)` queries go
/// through the agnostic pipeline; if the stream reaches `m_o`, those query
/// points become the public cover support, one hypothesis is learned
/// semi-privately from the full private sample, and every later query is
/// answered by it deterministically.
///
/// The tail-phase selection uses an independent child stream of `rng`, so a
/// stream shorter than `m_o` behaves record-for-record like the bare agnostic
/// pipeline under coupled seeds.
#[allow(clippy::too_many_arguments)]
pub fn run_universal(
    s: &LabeledDataset,
    queries: &UnlabeledDataset,
    family: &HypothesisFamily,
    learner: &dyn Learner,
    budget: &PrivacyBudget,
    target: &AccuracyTarget,
    scale_factor: f64,
    rng: &mut RandomSource,
) -> Result<UniversalRun> {
    if queries.is_empty() {
        return Err(Error::invalid("need at least one query"));
    }
    let m = queries.len();
    let m_o = universal_phase_length(family, target);
    let m_prime = m_o.min(m);

    let head = UnlabeledDataset::new(queries.points()[..m_prime].to_vec());
    let pipeline = run_agnostic_pcqr(
        s, &head, family, learner, budget, target, scale_factor, rng,
    )?;
    let mut answers = pipeline.engine.answers.clone();

    let mut cover_size = None;
    let mut h_priv = None;
    if m_prime == m_o {
        let t_pub = UnlabeledDataset::new(queries.points()[..m_o].to_vec());
        let mut tail_rng = rng.child(0, "sspp");
        let learned = sspp_learn(s, &t_pub, family, budget.epsilon(), &mut tail_rng)?;
        let final_unstable = pipeline.engine.unstable_count;
        for (offset, &x) in queries.points()[m_o..].iter().enumerate() {
            answers.push(AnswerRecord {
                index: m_o + offset,
                query: x,
                label: learned.h_priv.evaluate(x)?,
                stable: true,
                post_halt: false,
                margin: None,
                unstable_count: final_unstable,
            });
        }
        cover_size = Some(learned.cover_size);
        h_priv = Some(learned.h_priv);
    }

    Ok(UniversalRun {
        m_o,
        phase_switch: m_prime,
        pipeline,
        cover_size,
        h_priv,
        answers,
    })
}
