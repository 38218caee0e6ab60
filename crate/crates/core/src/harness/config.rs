//! Experiment configuration: a flat key-value TOML file with a versioned
//! schema. See the repository README for the documented schema.

use serde::{Deserialize, Serialize};

use crate::data::{AccuracyTarget, PrivacyBudget};
use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, HypothesisFamily, Marginal, SyntheticDistribution};

/// Config schema version accepted by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// Which algorithm the trial exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Realizable engine only, fed the raw sample.
    Subsamp,
    /// Full agnostic pipeline.
    Agnostic,
    /// Universal wrapper (engine phase, then the cover learner).
    Universal,
    /// Relabel stage only; reports the relabeling hypothesis's excess error.
    RelabelOnly,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Mode::Subsamp => "subsamp",
            Mode::Agnostic => "agnostic",
            Mode::Universal => "universal",
            Mode::RelabelOnly => "relabel-only",
        };
        f.write_str(s)
    }
}

fn default_marginal() -> String {
    "uniform".to_string()
}

fn default_scale() -> f64 {
    1.0
}

/// One experiment cell: distribution, sizes, parameters, trial count, seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub mode: Mode,
    /// Hypothesis family: "threshold" or "interval".
    pub family: String,
    /// Feature marginal; only "uniform" is config-addressable.
    #[serde(default = "default_marginal")]
    pub marginal: String,
    /// Truth parameter for a threshold family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<f64>,
    /// Truth parameters for an interval family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_hi: Option<f64>,
    /// Label-flip rate gamma in [0, 1/2).
    pub noise_rate: f64,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Engine constant scaling; 1 means canonical formula values.
    #[serde(default = "default_scale")]
    pub scale_factor: f64,
    pub trials: u32,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n < 1 || self.m < 1 {
            return Err(Error::Config("n and m must be at least 1".into()));
        }
        self.budget()?;
        self.accuracy()?;
        self.family()?;
        self.distribution()?;
        if !self.scale_factor.is_finite() || self.scale_factor <= 0.0 {
            return Err(Error::Config(format!(
                "scale_factor must be a positive real, got {}",
                self.scale_factor
            )));
        }
        Ok(())
    }

    pub fn budget(&self) -> Result<PrivacyBudget> {
        PrivacyBudget::new(self.epsilon, self.delta)
    }

    pub fn accuracy(&self) -> Result<AccuracyTarget> {
        AccuracyTarget::new(self.alpha, self.beta)
    }

    pub fn family(&self) -> Result<HypothesisFamily> {
        match self.family.as_str() {
            "threshold" => Ok(HypothesisFamily::Threshold),
            "interval" => Ok(HypothesisFamily::Interval),
            other => Err(Error::Config(format!(
                "unknown family `{other}`; config files support `threshold` and `interval`"
            ))),
        }
    }

    fn truth_hypothesis(&self) -> Result<Hypothesis> {
        match self.family()? {
            HypothesisFamily::Threshold => {
                let t = self.truth.ok_or_else(|| {
                    Error::Config("threshold family needs a `truth` key".into())
                })?;
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::Config(format!("truth {t} outside [0, 1]")));
                }
                Ok(Hypothesis::threshold(t))
            }
            HypothesisFamily::Interval => {
                let (lo, hi) = match (self.truth_lo, self.truth_hi) {
                    (Some(lo), Some(hi)) => (lo, hi),
                    _ => {
                        return Err(Error::Config(
                            "interval family needs `truth_lo` and `truth_hi` keys".into(),
                        ))
                    }
                };
                if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                    return Err(Error::Config(format!(
                        "interval truth [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1"
                    )));
                }
                Ok(Hypothesis::interval(lo, hi))
            }
            HypothesisFamily::FiniteExplicit(_) => unreachable!("not config-addressable"),
        }
    }

    pub fn distribution(&self) -> Result<SyntheticDistribution> {
        if self.marginal != "uniform" {
            return Err(Error::Config(format!(
                "unknown marginal `{}`; config files support `uniform`",
                self.marginal
            )));
        }
        SyntheticDistribution::new(Marginal::Uniform01, self.truth_hypothesis()?, self.noise_rate)
    }
}
