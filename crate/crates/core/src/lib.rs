//! Private classification-query release.
//!
//! Answers an online stream of classification queries from a private training
//! set under differential privacy, in the agnostic PAC setting. The pipeline
//! relabels a subsample with a hypothesis chosen by the exponential mechanism
//! (reducing the agnostic problem to a realizable one), resamples it, and
//! feeds the result to a subsample-and-aggregate voting engine whose privacy
//! budget is charged only on unstable queries via a sparse-vector accountant.
//! A universal wrapper answers arbitrarily many queries by learning one
//! hypothesis semi-privately from the first answered query points.
//!
//! The crate ships the algorithms, exact test oracles for their mechanisms,
//! and a seeded simulation harness with a CLI (`run`, `sweep`, `verify`) that
//! checks the accuracy contract and the structural privacy invariants at desk
//! scale.

pub mod data;
pub mod engine;
pub mod error;
pub mod harness;
pub mod hypothesis;
pub mod mechanisms;
pub mod relabel;
pub mod rng;
pub mod semiprivate;

pub use data::{
    empirical_disagreement, empirical_error, resample_with_replacement,
    sample_without_replacement, AccuracyTarget, DatasetOrigin, Example, Feature, Label,
    LabeledDataset, PrivacyBudget, UnlabeledDataset,
};
pub use engine::{
    derive_agnostic_params, derive_cutoff, derive_subsamp_params, run_agnostic_pcqr, run_subsamp,
    train_ensemble, AgnosticParams, AnswerRecord, EngineRun, EngineState, ErmLearner, Learner,
    NoiseDraw, PipelineRun, SubSampParams,
};
pub use error::{Error, Result};
pub use hypothesis::{
    batch_empirical_error, enumerate_dichotomies, erm, expected_disagreement, expected_error,
    scored_cover, DichotomyCover, FiniteFamily, Hypothesis, HypothesisFamily, Marginal,
    ScoredCover, SyntheticDistribution,
};
pub use mechanisms::{
    exact_em_distribution, exponential_mechanism, exponential_mechanism_index, laplace_sample,
    stability_test, stability_test_traced, ScoredCandidateSet, StabilityOutcome, StabilityQuery,
};
pub use relabel::{relabel, RelabelResult};
pub use rng::RandomSource;
pub use semiprivate::{
    build_cover, run_universal, sspp_learn, universal_phase_length, CoverLearnerResult,
    UniversalRun,
};
