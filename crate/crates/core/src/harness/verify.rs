//! Built-in verification suite: exact-distribution goodness-of-fit for the
//! exponential mechanism, the uniform-convergence check for disagreement
//! rates, a neighboring-run influence probe, Sauer-bound assertions on the
//! enumerators, and exact relabel realizability.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::data::{empirical_error, DatasetOrigin, Example, Feature, Label, LabeledDataset};
use crate::engine::{derive_subsamp_params, train_ensemble, EngineState, ErmLearner};
use crate::error::Result;
use crate::hypothesis::{
    enumerate_dichotomies, FiniteFamily, Hypothesis, HypothesisFamily, Marginal,
    SyntheticDistribution,
};
use crate::mechanisms::{exact_em_distribution, exponential_mechanism_index, ScoredCandidateSet};
use crate::relabel::relabel;
use crate::rng::RandomSource;
use crate::data::PrivacyBudget;

/// One sub-check outcome.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Suite outcome; `passed()` gates the CLI exit code.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {}: {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Chi-square goodness-of-fit p-value of observed counts against expected
/// probabilities.
pub fn chi_square_p_value(counts: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(counts.len(), probs.len());
    let total: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let expected = total as f64 * p;
            (c as f64 - expected).powi(2) / expected
        })
        .sum();
    let df = (counts.len() - 1) as f64;
    let dist = ChiSquared::new(df).expect("df >= 1");
    1.0 - dist.cdf(stat)
}

/// Fixed exponential-mechanism test instances: (errors, n', epsilon).
pub fn em_test_instances() -> Vec<(Vec<f64>, usize, f64)> {
    vec![
        (vec![0.0, 0.2, 0.5], 10, 1.0),
        (vec![0.3, 0.3, 0.3, 0.3], 10, 1.0),
        (vec![0.05, 0.2], 20, 1.0),
        ((0..10).map(|i| i as f64 * 0.03).collect(), 10, 1.0),
        (vec![0.05, 0.1, 0.2, 0.4, 0.45], 8, 2.0),
        (vec![0.1, 0.3, 0.35], 40, 0.5),
    ]
}

/// Draw `draws` samples from the mechanism and return the per-candidate counts.
pub fn em_sample_counts(
    set: &ScoredCandidateSet,
    draws: usize,
    rng: &mut RandomSource,
) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; set.len()];
    for _ in 0..draws {
        counts[exponential_mechanism_index(set, rng)?] += 1;
    }
    Ok(counts)
}

fn check_em_distribution(seed: u64) -> CheckResult {
    let mut rng = RandomSource::new(seed).child(0, "verify-em");
    let draws = 100_000usize;
    let mut min_p: f64 = 1.0;
    let mut worst = String::new();
    for (errors, n_prime, eps) in em_test_instances() {
        let candidates: Vec<Hypothesis> = (0..errors.len())
            .map(|i| Hypothesis::threshold(i as f64 / errors.len() as f64))
            .collect();
        let set = ScoredCandidateSet::from_errors(candidates, &errors, n_prime, eps)
            .expect("fixed instance is valid");
        let exact = exact_em_distribution(&set).expect("finite scores");
        let counts = em_sample_counts(&set, draws, &mut rng).expect("sampling");
        let p = chi_square_p_value(&counts, &exact);
        if p < min_p {
            min_p = p;
            worst = format!("errors {errors:?}, n'={n_prime}, eps={eps}");
        }
    }
    CheckResult {
        name: "em-exact-distribution".into(),
        pass: min_p > 0.001,
        detail: format!("min chi-square p-value {min_p:.4} (worst instance: {worst})"),
    }
}

/// Empirical disagreement between two thresholds on a sorted sample, via
/// binary search: the disagreement set is `[min(t1,t2), max(t1,t2))`.
fn threshold_pair_empirical_dis(sorted: &[f64], t1: f64, t2: f64) -> f64 {
    let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
    let a = sorted.partition_point(|&x| x < lo);
    let b = sorted.partition_point(|&x| x < hi);
    (b - a) as f64 / sorted.len() as f64
}

fn check_disagreement_convergence(seed: u64) -> CheckResult {
    // d = 1 thresholds, alpha = 0.2, beta' = 0.1:
    // n_o = ceil(50 (d ln(1/alpha) + ln(1/beta')) / alpha^2) = 4891.
    let alpha = 0.2f64;
    let beta_prime = 0.1f64;
    let n_o = (50.0 * ((1.0 / alpha).ln() + (1.0 / beta_prime).ln()) / (alpha * alpha)).ceil()
        as usize;
    let grid: Vec<f64> = (0..25).map(|i| i as f64 / 24.0).collect();
    let mut pairs = Vec::new();
    'outer: for i in 0..grid.len() {
        for j in (i + 1)..grid.len() {
            pairs.push((grid[i], grid[j]));
            if pairs.len() == 200 {
                break 'outer;
            }
        }
    }
    let root = RandomSource::new(seed);
    let trials = 100usize;
    let mut ok = 0usize;
    let mut worst_sup: f64 = 0.0;
    for t in 0..trials {
        let mut rng = root.child(t as u64, "verify-disagreement");
        let mut xs: Vec<f64> = (0..n_o).map(|_| rng.uniform()).collect();
        xs.sort_by(f64::total_cmp);
        let sup = pairs
            .iter()
            .map(|&(t1, t2)| {
                (threshold_pair_empirical_dis(&xs, t1, t2) - (t2 - t1).abs()).abs()
            })
            .fold(0.0f64, f64::max);
        worst_sup = worst_sup.max(sup);
        if sup <= alpha {
            ok += 1;
        }
    }
    CheckResult {
        name: "disagreement-uniform-convergence".into(),
        pass: ok >= 90,
        detail: format!(
            "sup |expected - empirical| <= {alpha} in {ok}/{trials} trials at n_o = {n_o} (worst sup {worst_sup:.4})"
        ),
    }
}

fn check_influence_probe(seed: u64) -> CheckResult {
    let root = RandomSource::new(seed);
    let learner = ErmLearner {
        family: HypothesisFamily::Threshold,
    };
    let budget = PrivacyBudget::new(1.0, 0.05).expect("valid");
    let params = derive_subsamp_params(1, &budget, 0.1, 50, 0.002).expect("valid");
    let mut max_l1 = 0u64;
    for t in 0..20u64 {
        let mut rng = root.child(t, "verify-influence");
        let truth = Hypothesis::threshold(rng.uniform());
        let items: Vec<Example> = (0..300)
            .map(|_| {
                let x = Feature::Real(rng.uniform());
                Example {
                    x,
                    y: truth.evaluate(x).unwrap(),
                }
            })
            .collect();
        let mut swapped = items.clone();
        let at = rng.below(items.len() as u64) as usize;
        swapped[at] = Example {
            x: Feature::Real(rng.uniform()),
            y: Label::from_bit(rng.coin()),
        };
        let s1 = LabeledDataset::new(items, DatasetOrigin::Raw);
        let s2 = LabeledDataset::new(swapped, DatasetOrigin::Raw);
        let e1 = train_ensemble(&s1, params.k, &learner).expect("feasible");
        let e2 = train_ensemble(&s2, params.k, &learner).expect("feasible");
        let st1 = EngineState::with_initial_threshold(e1, &params, 0.0).expect("nonempty");
        let st2 = EngineState::with_initial_threshold(e2, &params, 0.0).expect("nonempty");
        for q in 0..50 {
            let x = Feature::Real((q as f64 + 0.5) / 50.0);
            let (a0, a1) = st1.votes(x).expect("real point");
            let (b0, b1) = st2.votes(x).expect("real point");
            max_l1 = max_l1.max(a0.abs_diff(b0) + a1.abs_diff(b1));
        }
    }
    CheckResult {
        name: "neighboring-influence-probe".into(),
        pass: max_l1 <= 2,
        detail: format!("max per-query vote-count L1 difference {max_l1} (bound 2)"),
    }
}

fn check_sauer(seed: u64) -> CheckResult {
    let mut rng = RandomSource::new(seed).child(0, "verify-sauer");
    let mut detail = Vec::new();
    let mut pass = true;
    for n in [1usize, 2, 5, 10, 25, 40] {
        let pts: Vec<Feature> = (0..n).map(|_| Feature::Real(rng.uniform())).collect();
        let su = crate::data::UnlabeledDataset::new(pts);
        let thr = enumerate_dichotomies(&HypothesisFamily::Threshold, &su).expect("enumerable");
        if thr.len() != su.distinct_sorted().len() + 1 {
            pass = false;
            detail.push(format!("threshold count off at n = {n}"));
        }
        let ivl = enumerate_dichotomies(&HypothesisFamily::Interval, &su).expect("enumerable");
        let nd = su.distinct_sorted().len();
        if ivl.len() != nd * (nd + 1) / 2 + 1 {
            pass = false;
            detail.push(format!("interval count off at n = {n}"));
        }
    }
    // finite family: count can never exceed the family size or 2^n
    let fam = FiniteFamily::new(
        (0..8)
            .map(|i| (0..3).map(|j| Label::from_bit(i >> j & 1 == 1)).collect())
            .collect(),
        3,
    )
    .expect("valid family");
    let su = crate::data::UnlabeledDataset::new(vec![
        Feature::Token(0),
        Feature::Token(1),
        Feature::Token(2),
    ]);
    let cover = enumerate_dichotomies(&HypothesisFamily::FiniteExplicit(fam), &su)
        .expect("enumerable");
    if cover.len() > 8 {
        pass = false;
        detail.push("finite cover exceeds family size".into());
    }
    CheckResult {
        name: "sauer-assertions".into(),
        pass,
        detail: if detail.is_empty() {
            "dichotomy counts exact and within the Sauer bound".into()
        } else {
            detail.join("; ")
        },
    }
}

fn check_relabel_realizability(seed: u64) -> CheckResult {
    let root = RandomSource::new(seed);
    let gammas = [0.1, 0.2, 0.3];
    let mut failures = 0usize;
    let trials = 200usize;
    for t in 0..trials {
        let gamma = gammas[t % 3];
        let d = SyntheticDistribution::new(
            Marginal::Uniform01,
            Hypothesis::threshold(0.2 + 0.6 * (t as f64 / trials as f64)),
            gamma,
        )
        .expect("valid");
        let mut data_rng = root.child(t as u64, "verify-relabel-data");
        let s = crate::harness::trial::gen_synthetic(&d, 60, &mut data_rng).expect("n >= 1");
        let mut em_rng = root.child(t as u64, "verify-relabel-em");
        let res = relabel(&s, &HypothesisFamily::Threshold, &mut em_rng).expect("valid input");
        if empirical_error(&res.chosen, &res.relabeled).expect("nonempty") != 0.0 {
            failures += 1;
        }
    }
    CheckResult {
        name: "relabel-realizability".into(),
        pass: failures == 0,
        detail: format!("{}/{trials} runs exactly realizable", trials - failures),
    }
}

/// Run the full verification suite with a fixed seed.
pub fn verify_suite(seed: u64) -> VerifyReport {
    VerifyReport {
        checks: vec![
            check_em_distribution(seed),
            check_disagreement_convergence(seed),
            check_influence_probe(seed),
            check_sauer(seed),
            check_relabel_realizability(seed),
        ],
    }
}
