//! Domain data model: labels, feature points, labeled/unlabeled datasets,
//! parameter bundles, and the dataset manipulation primitives shared by every
//! pipeline stage.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::rng::RandomSource;

/// Binary label. There is no third "abstain" value at the data level; the
/// engine's unstable outcome lives in [`crate::mechanisms::StabilityOutcome`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Zero,
    One,
}

impl Label {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Label::One
        } else {
            Label::Zero
        }
    }

    pub fn bit(self) -> bool {
        self == Label::One
    }

    pub fn as_u8(self) -> u8 {
        self.bit() as u8
    }

    pub fn flipped(self) -> Self {
        Label::from_bit(!self.bit())
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

/// A feature point: a real scalar on [0, 1] for the continuous families, or an
/// opaque integer token for finite-explicit families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Feature {
    Real(f64),
    Token(u64),
}

impl Feature {
    /// Total order used for sorting and deduplication. Reals sort before
    /// tokens; reals use IEEE total order.
    pub fn total_cmp(&self, other: &Feature) -> std::cmp::Ordering {
        use Feature::*;
        match (self, other) {
            (Real(a), Real(b)) => a.total_cmp(b),
            (Token(a), Token(b)) => a.cmp(b),
            (Real(_), Token(_)) => std::cmp::Ordering::Less,
            (Token(_), Real(_)) => std::cmp::Ordering::Greater,
        }
    }
}

/// One labeled record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example {
    pub x: Feature,
    pub y: Label,
}

/// Provenance tag for a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetOrigin {
    Raw,
    Subsampled,
    Relabeled,
    Resampled,
}

/// Ordered multiset of labeled records. Order is stable (index `i` addresses
/// record `i`) and duplicates are permitted; resampling creates them.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    items: Vec<Example>,
    origin: DatasetOrigin,
}

impl LabeledDataset {
    pub fn new(items: Vec<Example>, origin: DatasetOrigin) -> Self {
        Self { items, origin }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn origin(&self) -> DatasetOrigin {
        self.origin
    }

    pub fn items(&self) -> &[Example] {
        &self.items
    }

    pub fn get(&self, index: usize) -> Option<&Example> {
        self.items.get(index)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Example> {
        self.items.iter()
    }

    /// The unlabeled version: feature points in record order.
    pub fn unlabeled(&self) -> UnlabeledDataset {
        UnlabeledDataset::new(self.items.iter().map(|e| e.x).collect())
    }

    /// Serialize to CSV with header `x,y`. Real features round-trip bit-exactly
    /// (shortest representation that reparses to the same f64). Token features
    /// are an in-memory construct and are not covered by the CSV interface.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y"])?;
        for e in &self.items {
            let x = match e.x {
                Feature::Real(r) => format!("{r}"),
                Feature::Token(_) => {
                    return Err(Error::unsupported(
                        "CSV serialization is defined for real-valued features only",
                    ))
                }
            };
            w.write_record([x, e.y.as_u8().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, origin: DatasetOrigin) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "y" {
            return Err(Error::invalid(format!(
                "expected CSV header `x,y`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut items = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let x: f64 = rec[0]
                .parse()
                .map_err(|_| Error::invalid(format!("bad feature value `{}`", &rec[0])))?;
            let y = match &rec[1] {
                "0" => Label::Zero,
                "1" => Label::One,
                other => return Err(Error::invalid(format!("bad label `{other}`, want 0 or 1"))),
            };
            items.push(Example {
                x: Feature::Real(x),
                y,
            });
        }
        Ok(Self::new(items, origin))
    }
}

/// Ordered list of unlabeled feature points.
#[derive(Debug, Clone, PartialEq)]
pub struct UnlabeledDataset {
    points: Vec<Feature>,
}

impl UnlabeledDataset {
    pub fn new(points: Vec<Feature>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Feature] {
        &self.points
    }

    /// Distinct points in ascending order.
    pub fn distinct_sorted(&self) -> Vec<Feature> {
        let mut pts = self.points.clone();
        pts.sort_by(Feature::total_cmp);
        pts.dedup_by(|a, b| a.total_cmp(b) == std::cmp::Ordering::Equal);
        pts
    }
}

/// Differential-privacy parameter bundle (epsilon, delta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrivacyBudget {
    epsilon: f64,
    delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::invalid(format!(
                "epsilon must be a positive real, got {epsilon}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Accuracy parameter bundle (alpha, beta), both strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccuracyTarget {
    alpha: f64,
    beta: f64,
}

impl AccuracyTarget {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::invalid(format!(
                "beta must lie in (0, 1), got {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Uniformly sample `n_prime` records from `s` without replacement, via a
/// partial Fisher-Yates shuffle of indices. Every size-`n_prime` subset is
/// equally likely; record contents are copied exactly.
pub fn sample_without_replacement(
    s: &LabeledDataset,
    n_prime: usize,
    rng: &mut RandomSource,
) -> Result<LabeledDataset> {
    if n_prime < 1 || n_prime > s.len() {
        return Err(Error::invalid(format!(
            "subsample size must satisfy 1 <= n_prime <= |S|; got n_prime = {n_prime}, |S| = {}",
            s.len()
        )));
    }
    let n = s.len();
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..n_prime {
        let j = i + rng.below((n - i) as u64) as usize;
        idx.swap(i, j);
    }
    let items = idx[..n_prime].iter().map(|&i| s.items[i]).collect();
    Ok(LabeledDataset::new(items, DatasetOrigin::Subsampled))
}

/// Sample `count` records from `s` uniformly with replacement (`count`
/// independent uniform index draws).
pub fn resample_with_replacement(
    s: &LabeledDataset,
    count: usize,
    rng: &mut RandomSource,
) -> Result<LabeledDataset> {
    if s.is_empty() {
        return Err(Error::invalid("cannot resample from an empty dataset"));
    }
    if count < 1 {
        return Err(Error::invalid(format!(
            "resample count must be positive, got {count}"
        )));
    }
    let n = s.len() as u64;
    let items = (0..count).map(|_| s.items[rng.below(n) as usize]).collect();
    Ok(LabeledDataset::new(items, DatasetOrigin::Resampled))
}

/// Empirical error of `h` on `s`: the fraction of records where `h(x) != y`.
pub fn empirical_error(h: &Hypothesis, s: &LabeledDataset) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::invalid(
            "empirical error is undefined on an empty dataset",
        ));
    }
    let mut wrong = 0usize;
    for e in s.iter() {
        if h.evaluate(e.x)? != e.y {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / s.len() as f64)
}

/// Empirical disagreement between `h1` and `h2` on an unlabeled set: the
/// fraction of points where they predict different labels.
pub fn empirical_disagreement(
    h1: &Hypothesis,
    h2: &Hypothesis,
    s_u: &UnlabeledDataset,
) -> Result<f64> {
    if s_u.is_empty() {
        return Err(Error::invalid(
            "empirical disagreement is undefined on an empty dataset",
        ));
    }
    let mut diff = 0usize;
    for &x in s_u.points() {
        if h1.evaluate(x)? != h2.evaluate(x)? {
            diff += 1;
        }
    }
    Ok(diff as f64 / s_u.len() as f64)
}
