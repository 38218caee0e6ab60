//! The agnostic-to-realizable reduction: pick a low-error hypothesis from a
//! dichotomy cover via the exponential mechanism and relabel the sample with
//! it. The output dataset is realizable by the chosen hypothesis exactly,
//! which is what lets the downstream engine assume the realizable setting.

use crate::data::{DatasetOrigin, Example, LabeledDataset};
use crate::error::{Error, Result};
use crate::hypothesis::{scored_cover, Hypothesis, HypothesisFamily};
use crate::mechanisms::{exponential_mechanism_index, ScoredCandidateSet};
use crate::rng::RandomSource;

/// The selection privacy parameter is pinned to 1; the surrounding privacy
/// analysis depends on it, so it is deliberately not a knob.
const RELABEL_EM_EPSILON: f64 = 1.0;

/// Outcome of the relabel stage.
#[derive(Debug, Clone)]
pub struct RelabelResult {
    /// The relabeled dataset; same points and order as the input.
    pub relabeled: LabeledDataset,
    /// The hypothesis whose labels the output carries.
    pub chosen: Hypothesis,
    /// Size of the dichotomy cover the selection ran over.
    pub cover_size: usize,
    /// Empirical error of the chosen hypothesis on the input labels.
    pub error_before: f64,
    /// Empirical error of the chosen hypothesis on the relabeled output;
    /// exactly zero by construction.
    pub error_after: f64,
}

/// Relabel `s_prime` with a hypothesis selected by the exponential mechanism
/// over the family's dichotomy cover on the sample's points, scored by
/// negated empirical error with sensitivity `1/|S'|`.
///
/// Duplicated feature points are kept as-is for scoring; enumeration operates
/// on the distinct points, where a dichotomy is necessarily consistent on
/// duplicates.
pub fn relabel(
    s_prime: &LabeledDataset,
    family: &HypothesisFamily,
    rng: &mut RandomSource,
) -> Result<RelabelResult> {
    if s_prime.is_empty() {
        return Err(Error::invalid("relabel needs a nonempty input sample"));
    }
    let scored = scored_cover(family, s_prime)?;
    let cover_size = scored.cover.len();
    let set = ScoredCandidateSet::from_errors(
        scored.cover.representatives().to_vec(),
        &scored.errors,
        s_prime.len(),
        RELABEL_EM_EPSILON,
    )?;
    let chosen_idx = exponential_mechanism_index(&set, rng)?;
    let chosen = set.candidates()[chosen_idx].clone();
    let error_before = -set.scores()[chosen_idx];

    let mut items = Vec::with_capacity(s_prime.len());
    for e in s_prime.iter() {
        items.push(Example {
            x: e.x,
            y: chosen.evaluate(e.x)?,
        });
    }
    let relabeled = LabeledDataset::new(items, DatasetOrigin::Relabeled);
    let error_after = crate::data::empirical_error(&chosen, &relabeled)?;
    Ok(RelabelResult {
        relabeled,
        chosen,
        cover_size,
        error_before,
        error_after,
    })
}
