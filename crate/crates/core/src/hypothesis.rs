//! Hypothesis families, dichotomy enumeration, ERM, and exact expected
//! error/disagreement against synthetic distributions.
//!
//! Three family kinds are built in:
//!
//! * thresholds on [0, 1] (predict 1 iff `x >= t`), VC dimension 1;
//! * intervals on [0, 1] (predict 1 iff `lo <= x <= hi`), VC dimension 2;
//! * finite-explicit families over an integer token domain, with a declared
//!   VC dimension checked against `log2(|family|)` at registration.
//!
//! Dichotomy enumeration returns one canonical representative per label
//! vector realizable on the (distinct) support points. Representatives are
//! canonical so that every downstream selection step is deterministic: for
//! thresholds, the midpoint of the realizing gap, with the unbounded sides
//! mapped to the domain minimum and to just above the domain maximum; for
//! intervals, midpoints of both realizing gaps; for finite families, the
//! lowest-index member inducing the dichotomy.

use std::fmt;
use std::sync::Arc;

use crate::data::{Feature, Label, LabeledDataset, UnlabeledDataset};
use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// An evaluable binary predictor.
#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    /// Predict 1 iff `x >= t`.
    Threshold { t: f64 },
    /// Predict 1 iff `lo <= x <= hi`.
    Interval { lo: f64, hi: f64 },
    /// Explicit label table over the token domain `0..labels.len()`.
    Explicit { id: usize, labels: Arc<[Label]> },
}

impl Hypothesis {
    pub fn threshold(t: f64) -> Self {
        assert!(!t.is_nan(), "threshold parameter must not be NaN");
        Hypothesis::Threshold { t }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        assert!(!lo.is_nan() && !hi.is_nan() && lo <= hi, "need lo <= hi");
        Hypothesis::Interval { lo, hi }
    }

    /// Deterministic binary label for a point of the family's domain.
    pub fn evaluate(&self, x: Feature) -> Result<Label> {
        match self {
            Hypothesis::Threshold { t } => {
                let r = real_in_unit(x)?;
                Ok(Label::from_bit(r >= *t))
            }
            Hypothesis::Interval { lo, hi } => {
                let r = real_in_unit(x)?;
                Ok(Label::from_bit(*lo <= r && r <= *hi))
            }
            Hypothesis::Explicit { labels, .. } => match x {
                Feature::Token(v) if (v as usize) < labels.len() => Ok(labels[v as usize]),
                Feature::Token(v) => Err(Error::invalid(format!(
                    "token {v} outside domain 0..{}",
                    labels.len()
                ))),
                Feature::Real(r) => Err(Error::invalid(format!(
                    "explicit-table hypothesis expects a token, got real {r}"
                ))),
            },
        }
    }

    /// Structured text record used in result logs, e.g. `{family: "threshold", t: 0.4}`.
    pub fn descriptor(&self) -> String {
        match self {
            Hypothesis::Threshold { t } => format!("{{family: \"threshold\", t: {t}}}"),
            Hypothesis::Interval { lo, hi } => {
                format!("{{family: \"interval\", lo: {lo}, hi: {hi}}}")
            }
            Hypothesis::Explicit { id, .. } => format!("{{family: \"explicit\", id: {id}}}"),
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

fn real_in_unit(x: Feature) -> Result<f64> {
    match x {
        Feature::Real(r) if (0.0..=1.0).contains(&r) => Ok(r),
        Feature::Real(r) => Err(Error::invalid(format!(
            "feature point {r} outside the [0, 1] domain"
        ))),
        Feature::Token(v) => Err(Error::invalid(format!(
            "continuous-family hypothesis expects a real point, got token {v}"
        ))),
    }
}

/// A finite, explicitly listed hypothesis family over a token domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteFamily {
    tables: Vec<Arc<[Label]>>,
    domain_size: usize,
    vc_dimension: u32,
}

impl FiniteFamily {
    /// Register a finite family. The declared VC dimension is trusted by the
    /// Sauer assertions downstream, so registration checks `d <= log2(|family|)`.
    pub fn new(tables: Vec<Vec<Label>>, vc_dimension: u32) -> Result<Self> {
        if tables.is_empty() {
            return Err(Error::invalid("finite family must contain a hypothesis"));
        }
        let domain_size = tables[0].len();
        if domain_size == 0 {
            return Err(Error::invalid("finite-family domain must be nonempty"));
        }
        if tables.iter().any(|t| t.len() != domain_size) {
            return Err(Error::invalid(
                "all label tables in a finite family must cover the same domain",
            ));
        }
        if vc_dimension < 1 {
            return Err(Error::invalid("vc_dimension must be a positive integer"));
        }
        let log2_bound = (tables.len() as f64).log2();
        if f64::from(vc_dimension) > log2_bound {
            return Err(Error::invalid(format!(
                "declared vc_dimension {vc_dimension} exceeds log2(|family|) = {log2_bound:.4}"
            )));
        }
        Ok(Self {
            tables: tables.into_iter().map(Arc::from).collect(),
            domain_size,
            vc_dimension,
        })
    }

    /// The two constant hypotheses over a token domain; VC dimension 1.
    pub fn constants(domain_size: usize) -> Result<Self> {
        Self::new(
            vec![
                vec![Label::Zero; domain_size],
                vec![Label::One; domain_size],
            ],
            1,
        )
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn hypothesis(&self, id: usize) -> Option<Hypothesis> {
        self.tables.get(id).map(|labels| Hypothesis::Explicit {
            id,
            labels: labels.clone(),
        })
    }
}

/// A hypothesis family with a known VC dimension and a dichotomy enumerator.
#[derive(Debug, Clone, PartialEq)]
pub enum HypothesisFamily {
    Threshold,
    Interval,
    FiniteExplicit(FiniteFamily),
}

impl HypothesisFamily {
    pub fn vc_dimension(&self) -> u32 {
        match self {
            HypothesisFamily::Threshold => 1,
            HypothesisFamily::Interval => 2,
            HypothesisFamily::FiniteExplicit(f) => f.vc_dimension,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            HypothesisFamily::Threshold => "threshold",
            HypothesisFamily::Interval => "interval",
            HypothesisFamily::FiniteExplicit(_) => "finite-explicit",
        }
    }
}

/// One canonical representative per dichotomy realizable on `support`.
#[derive(Debug, Clone)]
pub struct DichotomyCover {
    representatives: Vec<Hypothesis>,
    support: UnlabeledDataset,
}

impl DichotomyCover {
    pub fn representatives(&self) -> &[Hypothesis] {
        &self.representatives
    }

    /// The distinct support points the cover was built on, in ascending order.
    pub fn support(&self) -> &UnlabeledDataset {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }
}

/// Sauer bound on the dichotomy count: `(e*n/d)^d` for `n >= d`, else `2^n`.
fn sauer_bound(n: usize, d: u32) -> f64 {
    if n as f64 >= f64::from(d) {
        (std::f64::consts::E * n as f64 / f64::from(d)).powi(d as i32)
    } else {
        2f64.powi(n as i32)
    }
}

fn distinct_reals(points: &[Feature]) -> Result<Vec<f64>> {
    let mut xs = Vec::with_capacity(points.len());
    for &p in points {
        xs.push(real_in_unit(p)?);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    Ok(xs)
}

fn distinct_tokens(points: &[Feature], domain_size: usize) -> Result<Vec<u64>> {
    let mut ts = Vec::with_capacity(points.len());
    for &p in points {
        match p {
            Feature::Token(v) if (v as usize) < domain_size => ts.push(v),
            Feature::Token(v) => {
                return Err(Error::invalid(format!(
                    "token {v} outside domain 0..{domain_size}"
                )))
            }
            Feature::Real(r) => {
                return Err(Error::invalid(format!(
                    "finite family expects token points, got real {r}"
                )))
            }
        }
    }
    ts.sort_unstable();
    ts.dedup();
    Ok(ts)
}

/// Midpoint of `(a, b)` guarded against rounding onto `a`; the result `t`
/// always satisfies `a < t <= b`, so a threshold at `t` separates the two.
fn gap_midpoint(a: f64, b: f64) -> f64 {
    let mid = a + (b - a) / 2.0;
    if mid > a && mid <= b {
        mid
    } else {
        b
    }
}

/// Threshold representatives on sorted distinct points, in ascending parameter
/// order. Representative `i` labels the first `i` points 0 and the rest 1.
fn threshold_representatives(xs: &[f64]) -> Vec<Hypothesis> {
    let n = xs.len();
    let mut reps = Vec::with_capacity(n + 1);
    reps.push(Hypothesis::threshold(0.0));
    for i in 1..n {
        reps.push(Hypothesis::threshold(gap_midpoint(xs[i - 1], xs[i])));
    }
    if n >= 1 {
        reps.push(Hypothesis::threshold(f64::next_up(1.0)));
    }
    reps
}

/// Interval representatives on sorted distinct points: one per contiguous run
/// `i..=j` of points labeled 1 (in lexicographic `(i, j)` order), plus the
/// all-zero dichotomy last. Returns the run index ranges aligned with the
/// representatives; the all-zero entry has no run.
fn interval_representatives(xs: &[f64]) -> (Vec<Option<(usize, usize)>>, Vec<Hypothesis>) {
    let n = xs.len();
    let mut runs = Vec::new();
    let mut reps = Vec::new();
    for i in 0..n {
        let lo = if i == 0 {
            0.0
        } else {
            let m = gap_midpoint(xs[i - 1], xs[i]);
            debug_assert!(m > xs[i - 1] && m <= xs[i]);
            m
        };
        for j in i..n {
            let hi = if j == n - 1 {
                1.0
            } else {
                // Need xs[j] <= hi < xs[j+1].
                let m = xs[j] + (xs[j + 1] - xs[j]) / 2.0;
                if m >= xs[j] && m < xs[j + 1] {
                    m
                } else {
                    xs[j]
                }
            };
            runs.push(Some((i, j)));
            reps.push(Hypothesis::interval(lo, hi));
        }
    }
    let above = f64::next_up(1.0);
    runs.push(None);
    reps.push(Hypothesis::interval(above, above));
    (runs, reps)
}

/// First-index representative per distinct induced label vector.
fn finite_dichotomies(fam: &FiniteFamily, tokens: &[u64]) -> Vec<(usize, Vec<Label>)> {
    let mut seen: std::collections::BTreeSet<Vec<u8>> = Default::default();
    let mut out = Vec::new();
    for (id, table) in fam.tables.iter().enumerate() {
        let vec: Vec<Label> = tokens.iter().map(|&t| table[t as usize]).collect();
        let key: Vec<u8> = vec.iter().map(|l| l.as_u8()).collect();
        if seen.insert(key) {
            out.push((id, vec));
        }
    }
    out
}

/// Enumerate the dichotomies of `family` on the distinct points of `s_u`,
/// returning one canonical representative per realizable label vector.
pub fn enumerate_dichotomies(
    family: &HypothesisFamily,
    s_u: &UnlabeledDataset,
) -> Result<DichotomyCover> {
    if s_u.is_empty() {
        return Err(Error::invalid(
            "dichotomy enumeration needs at least one support point",
        ));
    }
    let (reps, support) = match family {
        HypothesisFamily::Threshold => {
            let xs = distinct_reals(s_u.points())?;
            let reps = threshold_representatives(&xs);
            (reps, xs.into_iter().map(Feature::Real).collect::<Vec<_>>())
        }
        HypothesisFamily::Interval => {
            let xs = distinct_reals(s_u.points())?;
            let (_, reps) = interval_representatives(&xs);
            (reps, xs.into_iter().map(Feature::Real).collect::<Vec<_>>())
        }
        HypothesisFamily::FiniteExplicit(fam) => {
            let tokens = distinct_tokens(s_u.points(), fam.domain_size)?;
            let reps = finite_dichotomies(fam, &tokens)
                .into_iter()
                .map(|(id, _)| fam.hypothesis(id).expect("id from enumeration"))
                .collect();
            (reps, tokens.into_iter().map(Feature::Token).collect())
        }
    };
    let count = reps.len();
    let bound = sauer_bound(support.len(), family.vc_dimension());
    assert!(
        count as f64 <= bound,
        "dichotomy count {count} violates the Sauer bound {bound} (n = {}, d = {})",
        support.len(),
        family.vc_dimension()
    );
    Ok(DichotomyCover {
        representatives: reps,
        support: UnlabeledDataset::new(support),
    })
}

/// A dichotomy cover together with the empirical error of each representative
/// on the dataset the cover was built from.
#[derive(Debug, Clone)]
pub struct ScoredCover {
    pub cover: DichotomyCover,
    /// Empirical error of `cover.representatives()[i]` on the scored dataset.
    pub errors: Vec<f64>,
}

/// Distinct sorted feature points of `s` with per-point label counts.
struct GroupedCounts {
    points: Vec<Feature>,
    zeros: Vec<u64>,
    ones: Vec<u64>,
}

fn group_counts(s: &LabeledDataset) -> GroupedCounts {
    let mut items: Vec<(Feature, Label)> = s.iter().map(|e| (e.x, e.y)).collect();
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut points = Vec::new();
    let mut zeros = Vec::new();
    let mut ones = Vec::new();
    for (x, y) in items {
        let is_new = points
            .last()
            .is_none_or(|p: &Feature| p.total_cmp(&x) != std::cmp::Ordering::Equal);
        if is_new {
            points.push(x);
            zeros.push(0);
            ones.push(0);
        }
        match y {
            Label::Zero => *zeros.last_mut().unwrap() += 1,
            Label::One => *ones.last_mut().unwrap() += 1,
        }
    }
    GroupedCounts {
        points,
        zeros,
        ones,
    }
}

/// Enumerate the dichotomy cover of `family` on `s` and score every
/// representative with its empirical error on `s`, in one pass.
///
/// Scoring is incremental for thresholds (adjacent dichotomies differ at one
/// support point) and prefix-sum based for intervals, so the whole candidate
/// set is scored in `O(n log n + |cover|)`.
pub fn scored_cover(family: &HypothesisFamily, s: &LabeledDataset) -> Result<ScoredCover> {
    if s.is_empty() {
        return Err(Error::invalid("cannot score candidates on an empty dataset"));
    }
    let n = s.len() as f64;
    let g = group_counts(s);
    let cover = enumerate_dichotomies(family, &s.unlabeled())?;
    debug_assert_eq!(cover.support().points(), g.points.as_slice());

    let errors = match family {
        HypothesisFamily::Threshold => {
            // Representative i labels the first i distinct points 0.
            let total_zeros: u64 = g.zeros.iter().sum();
            let mut errs = Vec::with_capacity(cover.len());
            let mut wrong = total_zeros; // all-ones representative
            errs.push(wrong as f64 / n);
            for i in 0..g.points.len() {
                wrong = wrong + g.ones[i] - g.zeros[i];
                errs.push(wrong as f64 / n);
            }
            debug_assert_eq!(errs.len(), cover.len());
            errs
        }
        HypothesisFamily::Interval => {
            let xs: Vec<f64> = g
                .points
                .iter()
                .map(|p| match p {
                    Feature::Real(r) => *r,
                    Feature::Token(_) => unreachable!("interval cover is over reals"),
                })
                .collect();
            let (runs, _) = interval_representatives(&xs);
            let mut ones_pfx = vec![0u64; xs.len() + 1];
            let mut zeros_pfx = vec![0u64; xs.len() + 1];
            for i in 0..xs.len() {
                ones_pfx[i + 1] = ones_pfx[i] + g.ones[i];
                zeros_pfx[i + 1] = zeros_pfx[i] + g.zeros[i];
            }
            let total_ones = ones_pfx[xs.len()];
            runs.iter()
                .map(|run| match run {
                    Some((i, j)) => {
                        let ones_in = ones_pfx[j + 1] - ones_pfx[*i];
                        let zeros_in = zeros_pfx[j + 1] - zeros_pfx[*i];
                        ((total_ones - ones_in) + zeros_in) as f64 / n
                    }
                    None => total_ones as f64 / n,
                })
                .collect()
        }
        HypothesisFamily::FiniteExplicit(fam) => {
            let tokens: Vec<u64> = g
                .points
                .iter()
                .map(|p| match p {
                    Feature::Token(t) => *t,
                    Feature::Real(_) => unreachable!("finite cover is over tokens"),
                })
                .collect();
            finite_dichotomies(fam, &tokens)
                .into_iter()
                .map(|(_, vec)| {
                    let mut wrong = 0u64;
                    for (idx, lab) in vec.iter().enumerate() {
                        wrong += match lab {
                            Label::One => g.zeros[idx],
                            Label::Zero => g.ones[idx],
                        };
                    }
                    wrong as f64 / n
                })
                .collect()
        }
    };
    Ok(ScoredCover { cover, errors })
}

/// Empirical risk minimization over `family` on `s`. Among minimizers, ties
/// break to the first representative in canonical enumeration order, i.e. the
/// lexicographically smallest canonical parameter vector.
///
/// This doubles as the non-private PAC learner oracle used by the engines.
pub fn erm(family: &HypothesisFamily, s: &LabeledDataset) -> Result<Hypothesis> {
    let sc = scored_cover(family, s)?;
    let mut best = 0usize;
    for (i, &e) in sc.errors.iter().enumerate() {
        if e < sc.errors[best] {
            best = i;
        }
    }
    Ok(sc.cover.representatives()[best].clone())
}

/// Empirical error of every hypothesis in `hyps` on `s`, with fast paths for
/// homogeneous threshold/interval candidate lists.
pub fn batch_empirical_error(hyps: &[Hypothesis], s: &LabeledDataset) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Err(Error::invalid("cannot score candidates on an empty dataset"));
    }
    let all_continuous = hyps
        .iter()
        .all(|h| matches!(h, Hypothesis::Threshold { .. } | Hypothesis::Interval { .. }));
    if !all_continuous || hyps.len() < 8 {
        return hyps
            .iter()
            .map(|h| crate::data::empirical_error(h, s))
            .collect();
    }
    let g = group_counts(s);
    let xs: Vec<f64> = g
        .points
        .iter()
        .map(|p| match p {
            Feature::Real(r) => Ok(*r),
            Feature::Token(v) => Err(Error::invalid(format!(
                "continuous-family hypothesis expects a real point, got token {v}"
            ))),
        })
        .collect::<Result<_>>()?;
    let mut ones_pfx = vec![0u64; xs.len() + 1];
    let mut zeros_pfx = vec![0u64; xs.len() + 1];
    for i in 0..xs.len() {
        ones_pfx[i + 1] = ones_pfx[i] + g.ones[i];
        zeros_pfx[i + 1] = zeros_pfx[i] + g.zeros[i];
    }
    let total_ones = ones_pfx[xs.len()];
    let total_zeros = zeros_pfx[xs.len()];
    let n = s.len() as f64;
    let wrong = |h: &Hypothesis| -> u64 {
        match *h {
            Hypothesis::Threshold { t } => {
                // Points with x < t are labeled 0, the rest 1.
                let cut = xs.partition_point(|&x| x < t);
                ones_pfx[cut] + (total_zeros - zeros_pfx[cut])
            }
            Hypothesis::Interval { lo, hi } => {
                let a = xs.partition_point(|&x| x < lo);
                let b = xs.partition_point(|&x| x <= hi);
                let ones_in = ones_pfx[b].saturating_sub(ones_pfx[a]);
                let zeros_in = zeros_pfx[b].saturating_sub(zeros_pfx[a]);
                (total_ones - ones_in) + zeros_in
            }
            Hypothesis::Explicit { .. } => unreachable!("filtered above"),
        }
    };
    Ok(hyps.iter().map(|h| wrong(h) as f64 / n).collect())
}

/// Marginal distribution over the feature domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    /// Uniform on [0, 1].
    Uniform01,
    /// Explicit weights over a finite point set.
    Discrete {
        points: Vec<Feature>,
        weights: Vec<f64>,
    },
}

impl Marginal {
    pub fn discrete(points: Vec<Feature>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::invalid(
                "discrete marginal needs matching nonempty points and weights",
            ));
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::invalid("discrete weights must be nonnegative reals"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "discrete weights must sum to 1, got {sum}"
            )));
        }
        Ok(Marginal::Discrete { points, weights })
    }

    /// Draw one feature point.
    pub fn sample(&self, rng: &mut RandomSource) -> Feature {
        match self {
            Marginal::Uniform01 => Feature::Real(rng.uniform()),
            Marginal::Discrete { points, weights } => {
                let u = rng.uniform();
                let mut acc = 0.0;
                for (p, w) in points.iter().zip(weights) {
                    acc += w;
                    if u <= acc {
                        return *p;
                    }
                }
                *points.last().unwrap()
            }
        }
    }
}

/// A synthetic data distribution: a marginal over features, a truth hypothesis
/// `h*`, and an independent label-flip rate `gamma < 1/2`. With `h*` in the
/// family, the least expected error over the family equals `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDistribution {
    marginal: Marginal,
    truth: Hypothesis,
    noise_rate: f64,
}

impl SyntheticDistribution {
    pub fn new(marginal: Marginal, truth: Hypothesis, noise_rate: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&noise_rate) {
            return Err(Error::invalid(format!(
                "noise rate must lie in [0, 1/2), got {noise_rate}"
            )));
        }
        Ok(Self {
            marginal,
            truth,
            noise_rate,
        })
    }

    pub fn marginal(&self) -> &Marginal {
        &self.marginal
    }

    pub fn truth(&self) -> &Hypothesis {
        &self.truth
    }

    pub fn noise_rate(&self) -> f64 {
        self.noise_rate
    }
}

/// The subset of [0, 1] a continuous hypothesis labels 1, as an interval.
fn ones_region(h: &Hypothesis) -> Result<Option<(f64, f64)>> {
    match *h {
        Hypothesis::Threshold { t } => {
            if t > 1.0 {
                Ok(None)
            } else {
                Ok(Some((t.max(0.0), 1.0)))
            }
        }
        Hypothesis::Interval { lo, hi } => {
            let a = lo.max(0.0);
            let b = hi.min(1.0);
            if a <= b {
                Ok(Some((a, b)))
            } else {
                Ok(None)
            }
        }
        Hypothesis::Explicit { .. } => Err(Error::unsupported(
            "explicit-table hypotheses have no closed form on the uniform marginal",
        )),
    }
}

/// Exact expected disagreement between two hypotheses under the marginal of
/// `d`: the measure of their symmetric-difference set for the uniform
/// marginal, or an exact weighted sum for discrete marginals.
pub fn expected_disagreement(
    h1: &Hypothesis,
    h2: &Hypothesis,
    d: &SyntheticDistribution,
) -> Result<f64> {
    match d.marginal() {
        Marginal::Uniform01 => {
            let a = ones_region(h1)?;
            let b = ones_region(h2)?;
            let len = |r: Option<(f64, f64)>| r.map_or(0.0, |(lo, hi)| hi - lo);
            let inter = match (a, b) {
                (Some((a0, a1)), Some((b0, b1))) => (a1.min(b1) - a0.max(b0)).max(0.0),
                _ => 0.0,
            };
            Ok((len(a) + len(b) - 2.0 * inter).max(0.0))
        }
        Marginal::Discrete { points, weights } => {
            let mut dis = 0.0;
            for (&p, &w) in points.iter().zip(weights) {
                if h1.evaluate(p)? != h2.evaluate(p)? {
                    dis += w;
                }
            }
            Ok(dis)
        }
    }
}

/// Exact expected error of `h` under the noise model:
/// `(1 - gamma) * dis(h, h*) + gamma * (1 - dis(h, h*))`.
pub fn expected_error(h: &Hypothesis, d: &SyntheticDistribution) -> Result<f64> {
    let dis = expected_disagreement(h, d.truth(), d)?;
    let g = d.noise_rate();
    Ok((1.0 - g) * dis + g * (1.0 - dis))
}
