//! Browser demo bindings. Exposes three interactive views of the query-release
//! machinery: the exponential-mechanism selection distribution, the stability
//! test's pass probability, and a full seeded pipeline run.
//!
//! All exports take and return plain numbers, arrays, or JSON strings so the
//! page needs no framework; build with
//! `wasm-pack build crates/demo --target web --out-dir www/pkg`.

use wasm_bindgen::prelude::*;

use pcqr::{
    exact_em_distribution, exponential_mechanism_index, run_agnostic_pcqr, stability_test,
    AccuracyTarget, ErmLearner, Hypothesis, HypothesisFamily, Label, Marginal, PrivacyBudget,
    RandomSource, ScoredCandidateSet, StabilityOutcome, StabilityQuery, SyntheticDistribution,
    UnlabeledDataset,
};

fn js_err(e: pcqr::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn candidate_set(errors: &[f64], n_prime: u32, epsilon: f64) -> Result<ScoredCandidateSet, JsError> {
    let candidates: Vec<Hypothesis> = (0..errors.len())
        .map(|i| Hypothesis::threshold(i as f64 / errors.len().max(1) as f64))
        .collect();
    ScoredCandidateSet::from_errors(candidates, errors, n_prime as usize, epsilon).map_err(js_err)
}

/// Exact selection probabilities of the exponential mechanism for candidates
/// with the given empirical errors, score sensitivity `1/n_prime`, and
/// privacy parameter `epsilon`.
#[wasm_bindgen]
pub fn em_exact(errors: Vec<f64>, n_prime: u32, epsilon: f64) -> Result<Vec<f64>, JsError> {
    let set = candidate_set(&errors, n_prime, epsilon)?;
    exact_em_distribution(&set).map_err(js_err)
}

/// Empirical selection frequencies over `draws` seeded samples.
#[wasm_bindgen]
pub fn em_frequencies(
    errors: Vec<f64>,
    n_prime: u32,
    epsilon: f64,
    draws: u32,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    if draws == 0 || draws > 2_000_000 {
        return Err(JsError::new("draws must lie in 1..=2000000"));
    }
    let set = candidate_set(&errors, n_prime, epsilon)?;
    let mut rng = RandomSource::new(u64::from(seed));
    let mut counts = vec![0u32; errors.len()];
    for _ in 0..draws {
        counts[exponential_mechanism_index(&set, &mut rng).map_err(js_err)?] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|c| f64::from(c) / f64::from(draws))
        .collect())
}

/// Exact pass probability of the stability test against a fixed threshold at
/// its mean `w`: `P(margin + Lap(2 lambda) > w)`.
#[wasm_bindgen]
pub fn stability_pass_exact(margin: f64, lambda: f64, width: f64) -> f64 {
    let z = width - margin;
    let b = 2.0 * lambda;
    if z < 0.0 {
        1.0 - 0.5 * (z / b).exp()
    } else {
        0.5 * (-z / b).exp()
    }
}

/// Simulated pass rate with the threshold redrawn as `w + Lap(lambda)` per
/// run, matching the engine's accounting.
#[wasm_bindgen]
pub fn stability_pass_simulated(
    margin: f64,
    lambda: f64,
    width: f64,
    runs: u32,
    seed: u32,
) -> Result<f64, JsError> {
    if runs == 0 || runs > 2_000_000 {
        return Err(JsError::new("runs must lie in 1..=2000000"));
    }
    let mut rng = RandomSource::new(u64::from(seed));
    let mut stable = 0u32;
    for _ in 0..runs {
        let threshold = width + pcqr::laplace_sample(&mut rng, lambda).map_err(js_err)?;
        let q = StabilityQuery {
            value: Label::One,
            dist: margin,
            threshold,
            eps_stab: 1.0 / (2.0 * lambda),
        };
        if matches!(
            stability_test(&q, &mut rng).map_err(js_err)?,
            StabilityOutcome::Stable(_)
        ) {
            stable += 1;
        }
    }
    Ok(f64::from(stable) / f64::from(runs))
}

/// Run one seeded trial of the full agnostic pipeline on the threshold family
/// (truth at 0.5) and return a JSON summary with the per-query running
/// mismatch curve.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn run_pipeline_demo(
    gamma: f64,
    alpha: f64,
    beta: f64,
    epsilon: f64,
    delta: f64,
    n: u32,
    m: u32,
    scale_factor: f64,
    seed: u32,
) -> Result<String, JsError> {
    if n > 2_000_000 {
        return Err(JsError::new("n must be at most 2000000 in the demo"));
    }
    if m == 0 || m > 10_000 {
        return Err(JsError::new("m must lie in 1..=10000 in the demo"));
    }
    let budget = PrivacyBudget::new(epsilon, delta).map_err(js_err)?;
    let target = AccuracyTarget::new(alpha, beta).map_err(js_err)?;
    let d = SyntheticDistribution::new(Marginal::Uniform01, Hypothesis::threshold(0.5), gamma)
        .map_err(js_err)?;

    let root = RandomSource::new(u64::from(seed));
    let mut data_rng = root.child(0, "train-data");
    let mut query_rng = root.child(0, "query-data");
    let mut algo_rng = root.child(0, "algorithm");

    let s = pcqr::harness::gen_synthetic(&d, n as usize, &mut data_rng).map_err(js_err)?;
    let v = pcqr::harness::gen_synthetic(&d, m as usize, &mut query_rng).map_err(js_err)?;
    let queries: UnlabeledDataset = v.unlabeled();

    let learner = ErmLearner {
        family: HypothesisFamily::Threshold,
    };
    let run = run_agnostic_pcqr(
        &s,
        &queries,
        &HypothesisFamily::Threshold,
        &learner,
        &budget,
        &target,
        scale_factor,
        &mut algo_rng,
    )
    .map_err(js_err)?;

    let mut wrong = 0usize;
    let mut curve = Vec::with_capacity(m as usize);
    let mut unstable_at = Vec::new();
    for (a, e) in run.engine.answers.iter().zip(v.iter()) {
        if a.label != e.y {
            wrong += 1;
        }
        curve.push(wrong as f64 / (a.index + 1) as f64);
        if !a.stable && !a.post_halt {
            unstable_at.push(a.index);
        }
    }
    let avg_error = wrong as f64 / m as f64;

    let payload = serde_json::json!({
        "n": n,
        "n_prime": run.params.n_prime,
        "T": run.engine.params.cutoff,
        "eps_hat": run.params.eps_hat,
        "delta_hat": run.params.delta_hat,
        "lambda": run.engine.params.lambda,
        "k": run.engine.params.k,
        "w": run.engine.params.width,
        "scale_factor": run.engine.params.scale_factor,
        "cover_size": run.cover_size,
        "chosen": run.chosen.descriptor(),
        "gamma": gamma,
        "alpha": alpha,
        "avg_error": avg_error,
        "excess": avg_error - gamma,
        "unstable_count": run.engine.unstable_count,
        "halted_at": run.engine.halted_at,
        "unstable_at": unstable_at,
        "cumulative_error": curve,
    });
    Ok(payload.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn em_exports_agree_with_exact() {
        let exact = em_exact(vec![0.0, 0.2, 0.5], 10, 1.0).unwrap();
        let freq = em_frequencies(vec![0.0, 0.2, 0.5], 10, 1.0, 100_000, 7).unwrap();
        for (e, f) in exact.iter().zip(freq.iter()) {
            assert!((e - f).abs() <= 0.01);
        }
    }

    #[test]
    fn stability_exports_are_consistent() {
        let exact = stability_pass_exact(10.0, 1.0, 4.0);
        assert!((exact - (1.0 - 0.5 * (-3.0f64).exp())).abs() < 1e-12);
        let sim = stability_pass_simulated(10.0, 1.0, 4.0, 100_000, 11).unwrap();
        assert!((sim - exact).abs() <= 0.02, "sim {sim} exact {exact}");
    }

    #[test]
    fn pipeline_demo_returns_well_formed_json() {
        let out = run_pipeline_demo(0.2, 0.2, 0.1, 1.0, 0.05, 40_000, 200, 0.002, 42).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["cumulative_error"].as_array().unwrap().len(), 200);
        assert!(v["avg_error"].as_f64().unwrap() <= 1.0);
        // deterministic in the seed
        let again = run_pipeline_demo(0.2, 0.2, 0.1, 1.0, 0.05, 40_000, 200, 0.002, 42).unwrap();
        assert_eq!(out, again);
    }
}
