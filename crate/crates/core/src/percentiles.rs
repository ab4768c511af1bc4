//! Percentile ranks over a reference set, evaluation-scheme classes, I3 and
//! top-k% proportions.
//!
//! Quantiles use the mid-rank convention: a paper with `L` members strictly
//! below its count and `T` members tied with it (itself included) sits at
//! `100 * (L + T/2) / N`. The rank numerator `2L + T` is kept as an integer
//! so class boundaries and top-k thresholds are decided exactly, and so the
//! mean-50 identity (`sum of numerators == N^2`) can be checked without
//! rounding.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::ReferenceSet;

/// Class lower bounds (in quantile units) with one weight per class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationScheme {
    boundaries: Vec<f64>,
    weights: Vec<f64>,
}

impl EvaluationScheme {
    pub fn new(boundaries: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if boundaries.is_empty() {
            return Err(Error::InvalidScheme("no classes".into()));
        }
        if boundaries.len() != weights.len() {
            return Err(Error::InvalidScheme(format!("{} boundaries but {} weights", boundaries.len(), weights.len())));
        }
        if boundaries[0] != 0.0 {
            return Err(Error::InvalidScheme("first boundary must be 0".into()));
        }
        if boundaries.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less)) {
            return Err(Error::InvalidScheme("boundaries must be strictly increasing".into()));
        }
        if boundaries.iter().any(|b| b.partial_cmp(&100.0) != Some(Ordering::Less)) {
            return Err(Error::InvalidScheme("boundaries must lie below 100".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidScheme("weights must be positive".into()));
        }
        Ok(EvaluationScheme { boundaries, weights })
    }

    /// Six classes: bottom-50%, top-50%, top-25%, top-10%, top-5%, top-1%,
    /// weighted 1..6.
    pub fn nsb() -> Self {
        EvaluationScheme {
            boundaries: vec![0.0, 50.0, 75.0, 90.0, 95.0, 99.0],
            weights: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        }
    }

    /// Reads `lower_bound,weight` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut boundaries = Vec::new();
        let mut weights = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Parse { line: i as u64 + 1, message: format!("expected lower_bound,weight: {line:?}") };
            let (b, w) = line.split_once(',').ok_or_else(bad)?;
            boundaries.push(b.trim().parse::<f64>().map_err(|_| bad())?);
            weights.push(w.trim().parse::<f64>().map_err(|_| bad())?);
        }
        EvaluationScheme::new(boundaries, weights)
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_classes(&self) -> usize {
        self.boundaries.len()
    }

    /// Index of the highest boundary not above `quantile`.
    pub fn classify(&self, quantile: f64) -> usize {
        self.boundaries.iter().rposition(|b| *b <= quantile).unwrap_or(0)
    }

    /// Same as `classify` for quantile `100 * numerator / (2n)`, decided on
    /// `100 * numerator >= bound * 2n` to avoid the rounded division.
    fn classify_rank(&self, numerator: u64, n: usize) -> usize {
        let lhs = 100.0 * numerator as f64;
        let scale = 2.0 * n as f64;
        self.boundaries.iter().rposition(|b| lhs >= b * scale).unwrap_or(0)
    }
}

impl Default for EvaluationScheme {
    fn default() -> Self {
        EvaluationScheme::nsb()
    }
}

pub fn classify(quantile: f64, scheme: &EvaluationScheme) -> usize {
    scheme.classify(quantile)
}

/// The six classes of the default scheme, numbered 1..6 from the bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Pr6Class {
    Bottom50 = 1,
    Top50 = 2,
    Top25 = 3,
    Top10 = 4,
    Top5 = 5,
    Top1 = 6,
}

impl Pr6Class {
    pub const ALL: [Pr6Class; 6] =
        [Pr6Class::Bottom50, Pr6Class::Top50, Pr6Class::Top25, Pr6Class::Top10, Pr6Class::Top5, Pr6Class::Top1];

    /// Maps a 0-based class index of the default scheme.
    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Pr6Class::Bottom50 => "bottom50",
            Pr6Class::Top50 => "top50",
            Pr6Class::Top25 => "top25",
            Pr6Class::Top10 => "top10",
            Pr6Class::Top5 => "top5",
            Pr6Class::Top1 => "top1",
        }
    }
}

impl fmt::Display for Pr6Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercentileAssignment {
    pub paper_id: String,
    pub citations: f64,
    pub quantile: f64,
    /// 0-based class index in the active scheme.
    pub class: usize,
    /// `2L + T`; `quantile == 100 * rank_numerator / (2N)`.
    pub rank_numerator: u64,
}

impl PercentileAssignment {
    /// Only meaningful under a six-class scheme.
    pub fn pr6_class(&self) -> Option<Pr6Class> {
        Pr6Class::from_index(self.class)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercentileDistribution {
    /// Ordered by ascending paper_id.
    assignments: Vec<PercentileAssignment>,
    class_counts: Vec<usize>,
    scheme: EvaluationScheme,
    #[serde(skip)]
    position: HashMap<String, usize>,
}

impl PercentileDistribution {
    /// Ranks arbitrary `(paper_id, count)` pairs. Counts must be finite and
    /// non-negative; ids must be unique.
    pub fn from_counts<I>(counts: I, scheme: &EvaluationScheme) -> Result<Self>
    where
        I: IntoIterator<Item = (String, f64)>,
    {
        let mut entries: Vec<(String, f64)> = counts.into_iter().collect();
        if entries.is_empty() {
            return Err(Error::EmptyReferenceSet);
        }
        if let Some((id, _)) = entries.iter().find(|(_, c)| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidArgument(format!("invalid citation count for {id}")));
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicatePaper(w[0].0.clone()));
        }

        let n = entries.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| entries[a].1.total_cmp(&entries[b].1));
        let mut numerators = vec![0u64; n];
        let mut start = 0;
        while start < n {
            let value = entries[order[start]].1;
            let mut end = start + 1;
            while end < n && entries[order[end]].1 == value {
                end += 1;
            }
            let numerator = (2 * start + (end - start)) as u64;
            for &i in &order[start..end] {
                numerators[i] = numerator;
            }
            start = end;
        }

        let denom = 2.0 * n as f64;
        let mut class_counts = vec![0usize; scheme.n_classes()];
        let mut position = HashMap::with_capacity(n);
        let assignments = entries
            .into_iter()
            .zip(numerators)
            .enumerate()
            .map(|(i, ((paper_id, citations), rank_numerator))| {
                let class = scheme.classify_rank(rank_numerator, n);
                class_counts[class] += 1;
                position.insert(paper_id.clone(), i);
                PercentileAssignment {
                    paper_id,
                    citations,
                    quantile: 100.0 * rank_numerator as f64 / denom,
                    class,
                    rank_numerator,
                }
            })
            .collect();
        Ok(PercentileDistribution { assignments, class_counts, scheme: scheme.clone(), position })
    }

    pub fn assignments(&self) -> &[PercentileAssignment] {
        &self.assignments
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn scheme(&self) -> &EvaluationScheme {
        &self.scheme
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn get(&self, paper_id: &str) -> Option<&PercentileAssignment> {
        self.position.get(paper_id).map(|&i| &self.assignments[i])
    }

    /// False when every member holds the same count (all quantiles are 50).
    pub fn is_discriminating(&self) -> bool {
        let first = self.assignments[0].citations;
        self.assignments.iter().any(|a| a.citations != first)
    }

    fn subset(&self, ids: &BTreeSet<String>) -> Result<Vec<&PercentileAssignment>> {
        ids.iter().map(|id| self.get(id).ok_or_else(|| Error::OutsideReferenceSet(id.clone()))).collect()
    }

    /// Class census of a subset under the active scheme.
    pub fn class_counts_of(&self, ids: &BTreeSet<String>) -> Result<Vec<usize>> {
        let mut counts = vec![0usize; self.scheme.n_classes()];
        for a in self.subset(ids)? {
            counts[a.class] += 1;
        }
        Ok(counts)
    }

    fn score(&self, a: &PercentileAssignment, scheme: I3Scheme) -> f64 {
        match scheme {
            I3Scheme::Quantiles => a.quantile,
            I3Scheme::Pr6 => self.scheme.weights[a.class],
        }
    }
}

/// Ranks the members of `reference` by their counts.
pub fn quantile_ranks(
    reference: &ReferenceSet,
    counts: &BTreeMap<String, f64>,
    scheme: &EvaluationScheme,
) -> Result<PercentileDistribution> {
    let entries = reference
        .member_ids()
        .iter()
        .map(|id| counts.get(id).map(|c| (id.clone(), *c)).ok_or_else(|| Error::MissingCount(id.clone())))
        .collect::<Result<Vec<_>>>()?;
    PercentileDistribution::from_counts(entries, scheme)
}

/// How I3 aggregates per-paper positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum I3Scheme {
    /// Sum of quantile values.
    Quantiles,
    /// Sum of class weights under the distribution's evaluation scheme.
    Pr6,
}

impl FromStr for I3Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quantiles" | "q" => Ok(I3Scheme::Quantiles),
            "pr6" | "classes" => Ok(I3Scheme::Pr6),
            other => Err(Error::InvalidArgument(format!("unknown I3 scheme {other:?}"))),
        }
    }
}

/// I3 over the whole distribution, summed per paper in ascending id order.
pub fn i3(distribution: &PercentileDistribution, scheme: I3Scheme) -> f64 {
    distribution.assignments.iter().map(|a| distribution.score(a, scheme)).sum()
}

/// I3 restricted to `ids`.
pub fn i3_of(ids: &BTreeSet<String>, distribution: &PercentileDistribution, scheme: I3Scheme) -> Result<f64> {
    Ok(distribution.subset(ids)?.into_iter().map(|a| distribution.score(a, scheme)).sum())
}

/// Percentage of the reference set's I3 held by `ids`.
pub fn i3_share(ids: &BTreeSet<String>, distribution: &PercentileDistribution, scheme: I3Scheme) -> Result<f64> {
    let part = i3_of(ids, distribution, scheme)?;
    Ok(100.0 * part / i3(distribution, scheme))
}

/// Number of `ids` whose quantile is at least `100 - k`.
pub fn top_k_count(ids: &BTreeSet<String>, distribution: &PercentileDistribution, k: f64) -> Result<usize> {
    if !(k > 0.0 && k < 100.0) {
        return Err(Error::InvalidArgument(format!("top-k percentage {k} outside (0, 100)")));
    }
    let threshold = (100.0 - k) * 2.0 * distribution.len() as f64;
    Ok(distribution.subset(ids)?.into_iter().filter(|a| 100.0 * a.rank_numerator as f64 >= threshold).count())
}

/// Fraction of `ids` in the reference set's top `k` percent.
pub fn top_k_proportion(ids: &BTreeSet<String>, distribution: &PercentileDistribution, k: f64) -> Result<f64> {
    if ids.is_empty() {
        return Err(Error::EmptyUnit);
    }
    Ok(top_k_count(ids, distribution, k)? as f64 / ids.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(counts: &[f64]) -> PercentileDistribution {
        PercentileDistribution::from_counts(
            counts.iter().enumerate().map(|(i, c)| (format!("P{i:04}"), *c)),
            &EvaluationScheme::nsb(),
        )
        .unwrap()
    }

    fn ids(range: std::ops::Range<usize>) -> BTreeSet<String> {
        range.map(|i| format!("P{i:04}")).collect()
    }

    fn quantiles(d: &PercentileDistribution) -> Vec<f64> {
        d.assignments().iter().map(|a| a.quantile).collect()
    }

    fn hundred() -> PercentileDistribution {
        dist(&(0..100).map(f64::from).collect::<Vec<_>>())
    }

    #[test]
    fn mid_rank_examples() {
        assert_eq!(quantiles(&dist(&[0.0, 1.0, 2.0, 3.0])), vec![12.5, 37.5, 62.5, 87.5]);
        assert_eq!(quantiles(&dist(&[5.0, 5.0])), vec![50.0, 50.0]);
        let d = hundred();
        let expected: Vec<f64> = (0..100).map(|l| l as f64 + 0.5).collect();
        assert_eq!(quantiles(&d), expected);
        assert_eq!(d.assignments()[99].pr6_class(), Some(Pr6Class::Top1));
    }

    #[test]
    fn ties_are_not_split() {
        let d = dist(&[1.0, 3.0, 3.0, 3.0, 7.0]);
        let q = quantiles(&d);
        assert_eq!(q[1], q[2]);
        assert_eq!(q[2], q[3]);
        assert_eq!(q[1], 50.0);
        assert_eq!(d.assignments()[1].rank_numerator, 5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PercentileDistribution::from_counts(Vec::<(String, f64)>::new(), &EvaluationScheme::nsb()).is_err());
        let dup = vec![("A".to_string(), 1.0), ("A".to_string(), 2.0)];
        assert!(matches!(
            PercentileDistribution::from_counts(dup, &EvaluationScheme::nsb()),
            Err(Error::DuplicatePaper(_))
        ));
        let neg = vec![("A".to_string(), -1.0)];
        assert!(PercentileDistribution::from_counts(neg, &EvaluationScheme::nsb()).is_err());
    }

    #[test]
    fn i3_examples() {
        let d = hundred();
        assert_eq!(i3(&d, I3Scheme::Quantiles), 5000.0);
        assert_eq!(i3(&d, I3Scheme::Pr6), 191.0);
        assert_eq!(d.class_counts(), &[50, 25, 15, 5, 4, 1]);
        assert_eq!(i3(&dist(&[3.0]), I3Scheme::Quantiles), 50.0);
    }

    #[test]
    fn i3_share_examples() {
        let d = hundred();
        assert_eq!(i3_share(&ids(0..100), &d, I3Scheme::Quantiles).unwrap(), 100.0);
        assert_eq!(i3_share(&ids(90..100), &d, I3Scheme::Quantiles).unwrap(), 19.0);
        let tied = dist(&[4.0; 10]);
        assert_eq!(i3_share(&ids(0..5), &tied, I3Scheme::Quantiles).unwrap(), 50.0);
        assert_eq!(i3_share(&ids(5..10), &tied, I3Scheme::Pr6).unwrap(), 50.0);
        let outside: BTreeSet<String> = ["nope".to_string()].into();
        assert!(matches!(i3_share(&outside, &d, I3Scheme::Quantiles), Err(Error::OutsideReferenceSet(_))));
    }

    #[test]
    fn top_k_examples() {
        let d = hundred();
        assert_eq!(top_k_proportion(&ids(0..100), &d, 10.0).unwrap(), 0.10);
        assert_eq!(top_k_proportion(&ids(90..100), &d, 10.0).unwrap(), 1.0);
        assert_eq!(top_k_proportion(&ids(0..100), &d, 25.0).unwrap(), 0.25);
        assert_eq!(top_k_proportion(&ids(0..100), &d, 1.0).unwrap(), 0.01);
        let tied = dist(&[2.0; 37]);
        assert_eq!(top_k_proportion(&ids(0..37), &tied, 10.0).unwrap(), 0.0);
        assert!(!tied.is_discriminating());
        assert!(matches!(top_k_proportion(&BTreeSet::new(), &d, 10.0), Err(Error::EmptyUnit)));
        assert!(top_k_proportion(&ids(0..3), &d, 100.0).is_err());
    }

    #[test]
    fn classify_examples() {
        let nsb = EvaluationScheme::nsb();
        assert_eq!(Pr6Class::from_index(classify(99.5, &nsb)), Some(Pr6Class::Top1));
        assert_eq!(Pr6Class::from_index(classify(50.0, &nsb)), Some(Pr6Class::Top50));
        assert_eq!(Pr6Class::from_index(classify(49.999, &nsb)), Some(Pr6Class::Bottom50));
        assert_eq!(Pr6Class::from_index(classify(0.5, &nsb)), Some(Pr6Class::Bottom50));
        assert_eq!(Pr6Class::from_index(classify(90.0, &nsb)), Some(Pr6Class::Top10));
    }

    #[test]
    fn scheme_parsing_and_validation() {
        let s = EvaluationScheme::parse("# four classes\n0,1\n50,2\n80, 3\n95,4 # top\n").unwrap();
        assert_eq!(s.boundaries(), &[0.0, 50.0, 80.0, 95.0]);
        assert_eq!(s.weights(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.classify(96.0), 3);
        assert!(EvaluationScheme::parse("10,1\n50,2\n").is_err());
        assert!(EvaluationScheme::parse("0,1\n50,2\n40,3\n").is_err());
        assert!(EvaluationScheme::parse("0,1\n100,2\n").is_err());
        assert!(EvaluationScheme::parse("0,0\n").is_err());
        assert!(matches!(EvaluationScheme::parse("0;1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(EvaluationScheme::parse("").is_err());
    }

    #[test]
    fn custom_scheme_changes_class_score() {
        let scheme = EvaluationScheme::new(vec![0.0, 90.0], vec![0.0001, 1.0]).unwrap();
        let d = PercentileDistribution::from_counts((0..100).map(|i| (format!("P{i:04}"), i as f64)), &scheme).unwrap();
        assert_eq!(d.class_counts(), &[90, 10]);
        assert_eq!(top_k_count(&ids(0..100), &d, 10.0).unwrap(), d.class_counts()[1]);
    }
}
