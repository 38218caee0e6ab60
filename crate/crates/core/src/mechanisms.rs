//! Differential-privacy primitives: Laplace noise, the exponential mechanism
//! with its exact-distribution oracle, and the distance-to-instability test.
//!
//! The exponential mechanism selects candidate `i` with probability
//! proportional to `exp(eps * q_i / (2 * sensitivity))`. Sampling runs in
//! log space via the Gumbel-max trick; with the empirical-error score and
//! thousands of records the naive weights `exp(eps * n / 2)` overflow.

use crate::data::Label;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::rng::RandomSource;

/// Laplace inverse CDF with the given scale, evaluated at `u` in (0, 1).
/// `u = 0.5` maps to exactly 0.
pub fn laplace_inverse_cdf(u: f64, scale: f64) -> f64 {
    debug_assert!(u > 0.0 && u < 1.0 && scale > 0.0);
    if u < 0.5 {
        scale * (2.0 * u).ln()
    } else {
        -scale * (2.0 * (1.0 - u)).ln()
    }
}

/// Draw from the Laplace distribution with density `exp(-|z|/b) / (2b)`,
/// via inverse CDF on a uniform from the open interval (0, 1).
pub fn laplace_sample(rng: &mut RandomSource, scale: f64) -> Result<f64> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::invalid(format!(
            "Laplace scale must be a positive real, got {scale}"
        )));
    }
    Ok(laplace_inverse_cdf(rng.uniform(), scale))
}

/// A finite candidate set with parallel scores, the score sensitivity, and the
/// selection privacy parameter.
#[derive(Debug, Clone)]
pub struct ScoredCandidateSet {
    candidates: Vec<Hypothesis>,
    scores: Vec<f64>,
    sensitivity: f64,
    em_epsilon: f64,
}

impl ScoredCandidateSet {
    pub fn new(
        candidates: Vec<Hypothesis>,
        scores: Vec<f64>,
        sensitivity: f64,
        em_epsilon: f64,
    ) -> Result<Self> {
        if candidates.is_empty() || candidates.len() != scores.len() {
            return Err(Error::invalid(format!(
                "need matching nonempty candidate/score lists, got {} and {}",
                candidates.len(),
                scores.len()
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("scores must all be finite"));
        }
        if !sensitivity.is_finite() || sensitivity <= 0.0 {
            return Err(Error::invalid(format!(
                "score sensitivity must be a positive real, got {sensitivity}"
            )));
        }
        if !em_epsilon.is_finite() || em_epsilon <= 0.0 {
            return Err(Error::invalid(format!(
                "selection epsilon must be a positive real, got {em_epsilon}"
            )));
        }
        Ok(Self {
            candidates,
            scores,
            sensitivity,
            em_epsilon,
        })
    }

    /// Candidate set scored by negated empirical error on a dataset of
    /// `n_prime` records; the error score has sensitivity `1/n_prime`.
    pub fn from_errors(
        candidates: Vec<Hypothesis>,
        errors: &[f64],
        n_prime: usize,
        em_epsilon: f64,
    ) -> Result<Self> {
        if n_prime == 0 {
            return Err(Error::invalid("n_prime must be positive"));
        }
        let scores = errors.iter().map(|e| -e).collect();
        Self::new(candidates, scores, 1.0 / n_prime as f64, em_epsilon)
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn candidates(&self) -> &[Hypothesis] {
        &self.candidates
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Log-weights `eps * q_i / (2 * sensitivity)`.
    fn exponents(&self) -> impl Iterator<Item = f64> + '_ {
        self.scores
            .iter()
            .map(move |q| self.em_epsilon * q / (2.0 * self.sensitivity))
    }
}

/// Index drawn by the exponential mechanism (Gumbel-max over the log-weights).
pub fn exponential_mechanism_index(
    set: &ScoredCandidateSet,
    rng: &mut RandomSource,
) -> Result<usize> {
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for (i, exponent) in set.exponents().enumerate() {
        let gumbel = -(-rng.uniform().ln()).ln();
        let perturbed = exponent + gumbel;
        if perturbed > best_score {
            best_score = perturbed;
            best = i;
        }
    }
    Ok(best)
}

/// Candidate drawn by the exponential mechanism.
pub fn exponential_mechanism(
    set: &ScoredCandidateSet,
    rng: &mut RandomSource,
) -> Result<Hypothesis> {
    let idx = exponential_mechanism_index(set, rng)?;
    Ok(set.candidates[idx].clone())
}

/// Exact selection distribution of the exponential mechanism on `set`,
/// computed with log-sum-exp normalization.
pub fn exact_em_distribution(set: &ScoredCandidateSet) -> Result<Vec<f64>> {
    let exponents: Vec<f64> = set.exponents().collect();
    let max = exponents.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let weights: Vec<f64> = exponents.iter().map(|e| (e - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Inputs to the distance-to-instability test: the proposed stable answer, its
/// distance to instability, the (noisy) threshold to beat, and the privacy
/// parameter of the test.
#[derive(Debug, Clone, Copy)]
pub struct StabilityQuery {
    pub value: Label,
    pub dist: f64,
    pub threshold: f64,
    pub eps_stab: f64,
}

/// Outcome of the stability test. `Unstable` is the engine-level bottom; it is
/// not a data label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityOutcome {
    Stable(Label),
    Unstable,
}

/// Distance-to-instability test: releases the proposed value iff
/// `dist + Lap(1/eps_stab)` strictly exceeds the threshold.
pub fn stability_test(q: &StabilityQuery, rng: &mut RandomSource) -> Result<StabilityOutcome> {
    stability_test_traced(q, rng).map(|(outcome, _)| outcome)
}

/// As [`stability_test`], also returning the noise value it drew, for callers
/// that log noise draws.
pub fn stability_test_traced(
    q: &StabilityQuery,
    rng: &mut RandomSource,
) -> Result<(StabilityOutcome, f64)> {
    if !q.eps_stab.is_finite() || q.eps_stab <= 0.0 {
        return Err(Error::invalid(format!(
            "stability epsilon must be a positive real, got {}",
            q.eps_stab
        )));
    }
    if q.dist.is_nan() || q.dist < 0.0 {
        return Err(Error::invalid(format!(
            "distance to instability must be nonnegative, got {}",
            q.dist
        )));
    }
    let noise = laplace_sample(rng, 1.0 / q.eps_stab)?;
    let outcome = if q.dist + noise > q.threshold {
        StabilityOutcome::Stable(q.value)
    } else {
        StabilityOutcome::Unstable
    };
    Ok((outcome, noise))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn threshold_candidates(k: usize) -> Vec<Hypothesis> {
        (0..k)
            .map(|i| Hypothesis::threshold(i as f64 / k as f64))
            .collect()
    }

    #[test]
    fn laplace_median_is_exactly_zero() {
        assert_eq!(laplace_inverse_cdf(0.5, 1.0), 0.0);
        assert_eq!(laplace_inverse_cdf(0.5, 37.5), 0.0);
    }

    #[test]
    fn laplace_moments() {
        let mut rng = RandomSource::new(404);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let z = laplace_sample(&mut rng, 1.0).unwrap();
            sum += z;
            sum_sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() <= 0.005, "mean {mean}");
        assert!((var - 2.0).abs() <= 0.05, "variance {var}");
    }

    #[test]
    fn laplace_tail_probability() {
        // P(Z > 4) at scale 2 is 0.5 * exp(-2) ~= 0.0677.
        let mut rng = RandomSource::new(405);
        let n = 1_000_000usize;
        let mut hits = 0usize;
        for _ in 0..n {
            if laplace_sample(&mut rng, 2.0).unwrap() > 4.0 {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        let want = 0.5 * (-2.0f64).exp();
        assert!((p - want).abs() <= 0.002, "tail {p} want {want}");
    }

    #[test]
    fn laplace_rejects_bad_scale() {
        let mut rng = RandomSource::new(0);
        assert!(laplace_sample(&mut rng, 0.0).is_err());
        assert!(laplace_sample(&mut rng, -1.0).is_err());
    }

    #[test]
    fn em_exact_distribution_worked_example() {
        // errors (0, 0.2, 0.5), n' = 10, eps = 1 -> exponents (0, -1, -2.5).
        let set = ScoredCandidateSet::from_errors(
            threshold_candidates(3),
            &[0.0, 0.2, 0.5],
            10,
            1.0,
        )
        .unwrap();
        let p = exact_em_distribution(&set).unwrap();
        let want = [0.6897, 0.2537, 0.0566];
        for (got, want) in p.iter().zip(want.iter()) {
            assert!((got - want).abs() < 5e-5, "{got} vs {want}");
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn em_empirical_matches_exact() {
        let set = ScoredCandidateSet::from_errors(
            threshold_candidates(3),
            &[0.0, 0.2, 0.5],
            10,
            1.0,
        )
        .unwrap();
        let exact = exact_em_distribution(&set).unwrap();
        let mut rng = RandomSource::new(406);
        let draws = 100_000usize;
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            counts[exponential_mechanism_index(&set, &mut rng).unwrap()] += 1;
        }
        for (c, e) in counts.iter().zip(exact.iter()) {
            let freq = *c as f64 / draws as f64;
            assert!((freq - e).abs() <= 0.01, "freq {freq} exact {e}");
        }
    }

    #[test]
    fn em_uniform_when_scores_equal() {
        let set = ScoredCandidateSet::from_errors(
            threshold_candidates(3),
            &[0.3, 0.3, 0.3],
            10,
            1.0,
        )
        .unwrap();
        let exact = exact_em_distribution(&set).unwrap();
        for p in &exact {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
        let mut rng = RandomSource::new(407);
        let draws = 100_000usize;
        let mut counts = vec![0usize; 3];
        for _ in 0..draws {
            counts[exponential_mechanism_index(&set, &mut rng).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 1.0 / 3.0).abs() <= 0.01);
        }
    }

    #[test]
    fn em_single_candidate_is_forced() {
        let set =
            ScoredCandidateSet::from_errors(threshold_candidates(1), &[0.4], 10, 1.0).unwrap();
        let mut rng = RandomSource::new(1);
        for _ in 0..100 {
            assert_eq!(exponential_mechanism_index(&set, &mut rng).unwrap(), 0);
        }
        assert_eq!(exact_em_distribution(&set).unwrap(), vec![1.0]);
    }

    #[test]
    fn em_two_point_closed_form() {
        // scores gap g and c = eps * n' / 2 give P(best) = 1 / (1 + exp(-c g)).
        for (gap, n_prime, eps) in [(0.1, 20, 1.0), (0.35, 8, 0.5), (0.02, 400, 2.0)] {
            let set = ScoredCandidateSet::from_errors(
                threshold_candidates(2),
                &[0.1, 0.1 + gap],
                n_prime,
                eps,
            )
            .unwrap();
            let p = exact_em_distribution(&set).unwrap();
            let c = eps * n_prime as f64 / 2.0;
            let want = 1.0 / (1.0 + (-c * gap).exp());
            assert!((p[0] - want).abs() < 1e-12);
            assert!((p[1] - (1.0 - want)).abs() < 1e-12);
        }
    }

    #[test]
    fn em_monotone_in_score() {
        let mut scores = vec![-0.4, -0.2, -0.7, -0.1];
        let base = ScoredCandidateSet::new(
            threshold_candidates(4),
            scores.clone(),
            0.05,
            1.0,
        )
        .unwrap();
        let p0 = exact_em_distribution(&base).unwrap();
        scores[0] += 0.15;
        let raised =
            ScoredCandidateSet::new(threshold_candidates(4), scores, 0.05, 1.0).unwrap();
        let p1 = exact_em_distribution(&raised).unwrap();
        assert!(p1[0] >= p0[0]);
    }

    #[test]
    fn em_rejects_invalid_sets() {
        assert!(ScoredCandidateSet::new(vec![], vec![], 0.1, 1.0).is_err());
        assert!(
            ScoredCandidateSet::new(threshold_candidates(2), vec![0.0], 0.1, 1.0).is_err()
        );
        assert!(ScoredCandidateSet::new(
            threshold_candidates(1),
            vec![f64::NAN],
            0.1,
            1.0
        )
        .is_err());
        assert!(
            ScoredCandidateSet::new(threshold_candidates(1), vec![0.0], 0.0, 1.0).is_err()
        );
        assert!(
            ScoredCandidateSet::new(threshold_candidates(1), vec![0.0], 0.1, 0.0).is_err()
        );
    }

    #[test]
    fn error_score_sensitivity_is_one_over_n() {
        // Changing one record moves every candidate's empirical error by at most 1/n.
        use crate::data::{empirical_error, DatasetOrigin, Example, Feature, LabeledDataset};
        let mut rng = RandomSource::new(88);
        for _ in 0..50 {
            let n = 40usize;
            let mut items: Vec<Example> = (0..n)
                .map(|_| Example {
                    x: Feature::Real(rng.uniform()),
                    y: Label::from_bit(rng.coin()),
                })
                .collect();
            let s1 = LabeledDataset::new(items.clone(), DatasetOrigin::Raw);
            let swap = rng.below(n as u64) as usize;
            items[swap] = Example {
                x: Feature::Real(rng.uniform()),
                y: Label::from_bit(rng.coin()),
            };
            let s2 = LabeledDataset::new(items, DatasetOrigin::Raw);
            for i in 0..10 {
                let h = Hypothesis::threshold(i as f64 / 10.0);
                let d = (empirical_error(&h, &s1).unwrap() - empirical_error(&h, &s2).unwrap())
                    .abs();
                assert!(d <= 1.0 / n as f64 + 1e-15, "sensitivity violated: {d}");
            }
        }
    }

    #[test]
    fn stability_large_margin_probability() {
        // dist 10, threshold 2, eps 0.5 (scale 2): P(stable) = 1 - 0.5 e^{-4}.
        let q = StabilityQuery {
            value: Label::One,
            dist: 10.0,
            threshold: 2.0,
            eps_stab: 0.5,
        };
        let mut rng = RandomSource::new(501);
        let runs = 100_000usize;
        let mut stable = 0usize;
        for _ in 0..runs {
            if matches!(
                stability_test(&q, &mut rng).unwrap(),
                StabilityOutcome::Stable(_)
            ) {
                stable += 1;
            }
        }
        let p = stable as f64 / runs as f64;
        let want = 1.0 - 0.5 * (-4.0f64).exp();
        assert!((p - want).abs() <= 0.003, "{p} vs {want}");
    }

    #[test]
    fn stability_zero_margin_is_a_coin() {
        let q = StabilityQuery {
            value: Label::Zero,
            dist: 0.0,
            threshold: 0.0,
            eps_stab: 1.0,
        };
        let mut rng = RandomSource::new(502);
        let runs = 100_000usize;
        let mut stable = 0usize;
        for _ in 0..runs {
            if matches!(
                stability_test(&q, &mut rng).unwrap(),
                StabilityOutcome::Stable(_)
            ) {
                stable += 1;
            }
        }
        let p = stable as f64 / runs as f64;
        assert!((p - 0.5).abs() <= 0.005, "{p}");
    }

    #[test]
    fn stability_infinite_threshold_never_passes() {
        let q = StabilityQuery {
            value: Label::One,
            dist: 1e9,
            threshold: f64::INFINITY,
            eps_stab: 1.0,
        };
        let mut rng = RandomSource::new(503);
        for _ in 0..1000 {
            assert_eq!(
                stability_test(&q, &mut rng).unwrap(),
                StabilityOutcome::Unstable
            );
        }
    }

    #[test]
    fn stability_depends_only_on_margin_minus_threshold() {
        // Couple seeds: shifting dist and threshold by the same constant gives
        // the identical decision sequence.
        let mut a = RandomSource::new(504);
        let mut b = RandomSource::new(504);
        for shift in [0.0f64, 3.5, -1.25, 100.0] {
            for _ in 0..2000 {
                let qa = StabilityQuery {
                    value: Label::One,
                    dist: 1.5,
                    threshold: 1.0,
                    eps_stab: 0.7,
                };
                let qb = StabilityQuery {
                    value: Label::One,
                    dist: 1.5 + shift.max(0.0),
                    threshold: 1.0 + shift.max(0.0),
                    eps_stab: 0.7,
                };
                let ra = matches!(stability_test(&qa, &mut a).unwrap(), StabilityOutcome::Stable(_));
                let rb = matches!(stability_test(&qb, &mut b).unwrap(), StabilityOutcome::Stable(_));
                assert_eq!(ra, rb);
            }
        }
    }

    #[test]
    fn stability_rejects_bad_inputs() {
        let mut rng = RandomSource::new(0);
        let q = StabilityQuery {
            value: Label::One,
            dist: -1.0,
            threshold: 0.0,
            eps_stab: 1.0,
        };
        assert!(stability_test(&q, &mut rng).is_err());
        let q = StabilityQuery {
            value: Label::One,
            dist: 1.0,
            threshold: 0.0,
            eps_stab: 0.0,
        };
        assert!(stability_test(&q, &mut rng).is_err());
    }
}
