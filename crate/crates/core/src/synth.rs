//! Seeded synthetic corpora with skewed citation distributions.
//!
//! Each target paper draws a citation count, which is then realized as
//! explicit citing papers published in the citing year so both whole and
//! fractional counting can run on the result. Targets alternate between the
//! two years preceding the citing year.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicators::{citation_counts, impact_factor, window_counts};
use crate::ingest::{
    build_reference_set, resolve_citations, CitationGraph, DocType, JournalRecord, PaperRecord, Selector, YearRange,
};
use crate::percentiles::{i3_of, quantile_ranks, EvaluationScheme, I3Scheme};
use crate::Counting;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CitationDistribution {
    LogNormal { mu: f64, sigma: f64 },
    Pareto { alpha: f64, xmin: f64 },
    Constant { c: f64 },
}

impl Default for CitationDistribution {
    fn default() -> Self {
        CitationDistribution::LogNormal { mu: 0.0, sigma: 1.2 }
    }
}

impl CitationDistribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSynthSpec(m.to_string()));
        match *self {
            CitationDistribution::LogNormal { mu, sigma } => {
                if !mu.is_finite() || !(sigma.is_finite() && sigma > 0.0) {
                    return bad("lognormal needs finite mu and sigma > 0");
                }
            }
            CitationDistribution::Pareto { alpha, xmin } => {
                if !(alpha.is_finite() && alpha > 1.0) {
                    return bad("pareto needs alpha > 1");
                }
                if !(xmin.is_finite() && xmin >= 1.0) {
                    return bad("pareto needs xmin >= 1");
                }
            }
            CitationDistribution::Constant { c } => {
                if !(c.is_finite() && c >= 0.0) {
                    return bad("constant needs c >= 0");
                }
            }
        }
        Ok(())
    }

    /// Analytic mean, when finite.
    pub fn mean(&self) -> f64 {
        match *self {
            CitationDistribution::LogNormal { mu, sigma } => (mu + sigma * sigma / 2.0).exp(),
            CitationDistribution::Pareto { alpha, xmin } => alpha * xmin / (alpha - 1.0),
            CitationDistribution::Constant { c } => c,
        }
    }

    /// Raw real-valued draws, before quantization.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        self.validate()?;
        let err = |e: &dyn std::fmt::Display| Error::InvalidSynthSpec(e.to_string());
        Ok(match *self {
            CitationDistribution::LogNormal { mu, sigma } => {
                let d = LogNormal::new(mu, sigma).map_err(|e| err(&e))?;
                (0..n).map(|_| d.sample(rng)).collect()
            }
            CitationDistribution::Pareto { alpha, xmin } => {
                let d = Pareto::new(xmin, alpha).map_err(|e| err(&e))?;
                (0..n).map(|_| d.sample(rng)).collect()
            }
            CitationDistribution::Constant { c } => vec![c; n],
        })
    }
}

/// Floors a draw to a citation count, capped at `max`.
pub fn quantize(value: f64, max: u64) -> u64 {
    if value.is_nan() || value <= 0.0 {
        0
    } else {
        (value.floor() as u64).min(max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalLayout {
    pub journal_id: String,
    pub papers: usize,
    #[serde(default)]
    pub distribution: Option<CitationDistribution>,
    /// Unresolved references added to each citer's NRef for this journal.
    #[serde(default)]
    pub extra_refs: Option<u32>,
    #[serde(default)]
    pub category: Option<String>,
}

fn default_year() -> i32 {
    2009
}

fn default_refs_per_citer() -> u32 {
    20
}

fn default_max_citations() -> u64 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_papers: usize,
    #[serde(default)]
    pub distribution: CitationDistribution,
    pub seed: u64,
    /// Empty means one journal `J1` holding every paper.
    #[serde(default)]
    pub journal_layout: Vec<JournalLayout>,
    /// Citing year; targets are published in the two years before.
    #[serde(default = "default_year")]
    pub year: i32,
    #[serde(default = "default_refs_per_citer")]
    pub refs_per_citer: u32,
    #[serde(default)]
    pub extra_refs: u32,
    #[serde(default = "default_max_citations")]
    pub max_citations: u64,
}

impl SynthSpec {
    pub fn new(n_papers: usize, distribution: CitationDistribution, seed: u64) -> Self {
        SynthSpec {
            n_papers,
            distribution,
            seed,
            journal_layout: Vec::new(),
            year: default_year(),
            refs_per_citer: default_refs_per_citer(),
            extra_refs: 0,
            max_citations: default_max_citations(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_papers == 0 {
            return Err(Error::InvalidSynthSpec("n_papers must be at least 1".into()));
        }
        if self.refs_per_citer == 0 {
            return Err(Error::InvalidSynthSpec("refs_per_citer must be at least 1".into()));
        }
        self.distribution.validate()?;
        if !self.journal_layout.is_empty() {
            let mut seen = HashSet::new();
            for j in &self.journal_layout {
                if j.papers == 0 {
                    return Err(Error::InvalidSynthSpec(format!("journal {} has no papers", j.journal_id)));
                }
                if j.journal_id.is_empty() || j.journal_id.contains([',', ';']) || !seen.insert(&j.journal_id) {
                    return Err(Error::InvalidSynthSpec(format!("bad or duplicate journal id {:?}", j.journal_id)));
                }
                if let Some(d) = &j.distribution {
                    d.validate()?;
                }
            }
            let total: usize = self.journal_layout.iter().map(|j| j.papers).sum();
            if total != self.n_papers {
                return Err(Error::InvalidSynthSpec(format!(
                    "journal layout holds {total} papers, n_papers is {}",
                    self.n_papers
                )));
            }
        }
        Ok(())
    }

    fn layout(&self) -> Vec<JournalLayout> {
        if self.journal_layout.is_empty() {
            vec![JournalLayout {
                journal_id: "J1".into(),
                papers: self.n_papers,
                distribution: None,
                extra_refs: None,
                category: None,
            }]
        } else {
            self.journal_layout.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticCorpus {
    pub papers: Vec<PaperRecord>,
    pub journals: Vec<JournalRecord>,
    pub graph: CitationGraph,
}

pub fn citer_journal_id(journal_id: &str) -> String {
    format!("{journal_id}-citers")
}

/// Turns per-paper citation counts of one journal into target papers plus the
/// citing papers that produce exactly those counts. Citation `g` (in target
/// order) goes to citer `g mod M` with `M >= max count`, so no citer lists the
/// same target twice and no citer holds more than `refs_per_citer` refs.
fn realize_journal(
    journal_id: &str,
    counts: &[u64],
    year: i32,
    refs_per_citer: u32,
    extra_refs: u32,
    out: &mut Vec<PaperRecord>,
) {
    let targets: Vec<String> = (0..counts.len()).map(|i| format!("{journal_id}-{i:06}")).collect();
    for (i, id) in targets.iter().enumerate() {
        out.push(PaperRecord {
            paper_id: id.clone(),
            journal_id: journal_id.to_string(),
            pub_year: if i % 2 == 0 { year - 1 } else { year - 2 },
            doc_type: DocType::Article,
            n_refs: 0,
            refs: Vec::new(),
        });
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return;
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    let n_citers = total.div_ceil(u64::from(refs_per_citer)).max(max) as usize;
    let mut refs: Vec<Vec<String>> = vec![Vec::new(); n_citers];
    let mut g = 0usize;
    for (id, &c) in targets.iter().zip(counts) {
        for _ in 0..c {
            refs[g % n_citers].push(id.clone());
            g += 1;
        }
    }
    let citer_journal = citer_journal_id(journal_id);
    for (k, r) in refs.into_iter().enumerate() {
        out.push(PaperRecord {
            paper_id: format!("{journal_id}-C{k:06}"),
            journal_id: citer_journal.clone(),
            pub_year: year,
            doc_type: DocType::Article,
            n_refs: r.len() as u32 + extra_refs,
            refs: r,
        });
    }
}

pub fn generate_corpus(spec: &SynthSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut papers = Vec::new();
    let mut journals = Vec::new();
    for layout in spec.layout() {
        let dist = layout.distribution.unwrap_or(spec.distribution);
        let counts: Vec<u64> =
            dist.sample(layout.papers, &mut rng)?.into_iter().map(|v| quantize(v, spec.max_citations)).collect();
        realize_journal(
            &layout.journal_id,
            &counts,
            spec.year,
            spec.refs_per_citer,
            layout.extra_refs.unwrap_or(spec.extra_refs),
            &mut papers,
        );
        journals.push(JournalRecord {
            journal_id: layout.journal_id.clone(),
            name: format!("Synthetic journal {}", layout.journal_id),
            categories: layout.category.iter().cloned().collect(),
        });
    }
    let graph = resolve_citations(&papers);
    Ok(SyntheticCorpus { papers, journals, graph })
}

/// Engine-computed facts about the two dominance units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceCheck {
    pub class_counts_a: Vec<usize>,
    pub class_counts_b: Vec<usize>,
    pub mean_a: f64,
    pub mean_b: f64,
    pub if_a: f64,
    pub if_b: f64,
    pub i3_a: f64,
    pub i3_b: f64,
}

impl DominanceCheck {
    pub fn class_dominance(&self) -> bool {
        self.class_counts_a.iter().zip(&self.class_counts_b).all(|(a, b)| a >= b)
    }

    pub fn strict_class_dominance(&self) -> bool {
        self.class_counts_a.iter().zip(&self.class_counts_b).all(|(a, b)| a > b)
    }

    pub fn lower_mean(&self) -> bool {
        self.mean_a < self.mean_b
    }

    pub fn rank_reversal(&self) -> bool {
        self.i3_a > self.i3_b && self.if_a < self.if_b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceScenario {
    pub corpus: SyntheticCorpus,
    pub unit_a: String,
    pub unit_b: String,
    pub category: String,
    pub year: i32,
    pub pub_window: YearRange,
    pub cite_window: YearRange,
    pub check: DominanceCheck,
}

/// Journal A: large, with a long low-cited tail and a highly cited head.
/// Journal B: small and uniformly moderate. Both sit in one reference set
/// with a weakly cited background journal. A out-counts B in every six-class
/// bin and has the larger I3, yet the lower mean and IF.
pub fn dominance_scenario() -> Result<DominanceScenario> {
    const YEAR: i32 = 2009;
    const CATEGORY: &str = "LIS";
    let moderate: Vec<u64> = (8..=12).flat_map(|c| std::iter::repeat_n(c, 12)).collect();

    let mut a = Vec::new();
    a.extend(std::iter::repeat_n(0, 20));
    a.extend(std::iter::repeat_n(1, 300));
    a.extend(std::iter::repeat_n(2, 10));
    a.extend(&moderate);
    a.extend(std::iter::repeat_n(10, 6));
    a.extend(13..=52);
    let b = moderate.clone();
    let mut background = Vec::new();
    background.extend(std::iter::repeat_n(0, 600));
    background.extend(std::iter::repeat_n(1, 200));
    background.extend(std::iter::repeat_n(2, 100));

    let mut papers = Vec::new();
    let mut journals = Vec::new();
    for (id, name, counts) in [
        ("JA", "Broad journal A", &a),
        ("JB", "Selective journal B", &b),
        ("JREF", "Reference background", &background),
    ] {
        realize_journal(id, counts, YEAR, 20, 0, &mut papers);
        journals.push(JournalRecord {
            journal_id: id.into(),
            name: name.into(),
            categories: [CATEGORY.to_string()].into(),
        });
    }
    let graph = resolve_citations(&papers);
    let corpus = SyntheticCorpus { papers, journals, graph };

    let pub_window = YearRange::new(YEAR - 2, YEAR - 1)?;
    let cite_window = YearRange::single(YEAR);
    let check = verify_dominance(&corpus, "JA", "JB", CATEGORY, YEAR, pub_window, cite_window)?;
    if !(check.strict_class_dominance() && check.lower_mean() && check.rank_reversal()) {
        return Err(Error::InvalidSynthSpec(format!("dominance construction failed its checks: {check:?}")));
    }
    Ok(DominanceScenario {
        corpus,
        unit_a: "JA".into(),
        unit_b: "JB".into(),
        category: CATEGORY.into(),
        year: YEAR,
        pub_window,
        cite_window,
        check,
    })
}

/// Computes the dominance facts for two journals of `corpus` within the
/// reference set of `category`.
pub fn verify_dominance(
    corpus: &SyntheticCorpus,
    unit_a: &str,
    unit_b: &str,
    category: &str,
    year: i32,
    pub_window: YearRange,
    cite_window: YearRange,
) -> Result<DominanceCheck> {
    let papers = &corpus.papers;
    let reference = build_reference_set(
        papers,
        &corpus.journals,
        &Selector::ByCategory(category.into()),
        pub_window,
        cite_window,
        category,
    )?;
    let counts = citation_counts(reference.member_ids(), &corpus.graph, papers, cite_window, Counting::Whole);
    let dist = quantile_ranks(&reference, &counts, &EvaluationScheme::nsb())?;
    let members = |j: &str| -> BTreeSet<String> {
        papers
            .iter()
            .filter(|p| p.journal_id == j && reference.contains(&p.paper_id))
            .map(|p| p.paper_id.clone())
            .collect()
    };
    let (ids_a, ids_b) = (members(unit_a), members(unit_b));
    let mean = |ids: &BTreeSet<String>| ids.iter().map(|id| counts[id]).sum::<f64>() / ids.len() as f64;
    let filter: BTreeSet<DocType> = DocType::ALL.into_iter().collect();
    let if_of = |j: &str| -> Result<f64> {
        impact_factor(&window_counts(j, year, &corpus.graph, papers, &filter, Counting::Whole)?)
    };
    Ok(DominanceCheck {
        class_counts_a: dist.class_counts_of(&ids_a)?,
        class_counts_b: dist.class_counts_of(&ids_b)?,
        mean_a: mean(&ids_a),
        mean_b: mean(&ids_b),
        if_a: if_of(unit_a)?,
        if_b: if_of(unit_b)?,
        i3_a: i3_of(&ids_a, &dist, I3Scheme::Quantiles)?,
        i3_b: i3_of(&ids_b, &dist, I3Scheme::Quantiles)?,
    })
}

/// Realized citation count per paper, for checking a corpus against its draws.
pub fn realized_counts(corpus: &SyntheticCorpus) -> BTreeMap<String, u64> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for (_, cited) in corpus.graph.edges() {
        *counts.entry(cited.clone()).or_default() += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_distribution_cites_every_paper_twice() {
        let spec = SynthSpec::new(10, CitationDistribution::Constant { c: 2.0 }, 7);
        let corpus = generate_corpus(&spec).unwrap();
        let counts = realized_counts(&corpus);
        let targets: Vec<&PaperRecord> = corpus.papers.iter().filter(|p| p.journal_id == "J1").collect();
        assert_eq!(targets.len(), 10);
        for t in targets {
            assert_eq!(counts.get(&t.paper_id), Some(&2));
        }
    }

    #[test]
    fn same_spec_same_corpus() {
        let spec = SynthSpec::new(500, CitationDistribution::default(), 42);
        assert_eq!(generate_corpus(&spec).unwrap(), generate_corpus(&spec).unwrap());
        let other = SynthSpec { seed: 43, ..spec.clone() };
        assert_ne!(generate_corpus(&spec).unwrap(), generate_corpus(&other).unwrap());
    }

    #[test]
    fn lognormal_sample_mean_matches_analytic_mean() {
        let dist = CitationDistribution::LogNormal { mu: 0.0, sigma: 1.2 };
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let xs = dist.sample(n, &mut rng).unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = crate::stats::sem(&xs).unwrap();
        assert!((mean - dist.mean()).abs() < 3.0 * se, "mean {mean} vs {} (se {se})", dist.mean());
    }

    #[test]
    fn skewed_corpora_have_mean_above_median() {
        for dist in [CitationDistribution::default(), CitationDistribution::Pareto { alpha: 1.5, xmin: 1.0 }] {
            let corpus = generate_corpus(&SynthSpec::new(2001, dist, 11)).unwrap();
            let counts = realized_counts(&corpus);
            let mut values: Vec<u64> = corpus
                .papers
                .iter()
                .filter(|p| p.journal_id == "J1")
                .map(|p| counts.get(&p.paper_id).copied().unwrap_or(0))
                .collect();
            values.sort_unstable();
            let mean = values.iter().sum::<u64>() as f64 / values.len() as f64;
            let median = values[values.len() / 2] as f64;
            assert!(mean > median, "{dist:?}: mean {mean} median {median}");
        }
    }

    #[test]
    fn realization_respects_reference_limits() {
        let mut spec = SynthSpec::new(300, CitationDistribution::Pareto { alpha: 1.2, xmin: 1.0 }, 5);
        spec.refs_per_citer = 7;
        spec.extra_refs = 3;
        let corpus = generate_corpus(&spec).unwrap();
        assert_eq!(corpus.graph.duplicate_count(), 0);
        assert_eq!(corpus.graph.unresolved_count(), 0);
        for p in corpus.papers.iter().filter(|p| p.pub_year == spec.year) {
            assert!(p.refs.len() <= 7);
            assert_eq!(p.n_refs as usize, p.refs.len() + 3);
        }
    }

    #[test]
    fn invalid_specs() {
        let bad = [
            CitationDistribution::LogNormal { mu: 0.0, sigma: 0.0 },
            CitationDistribution::LogNormal { mu: 0.0, sigma: -1.0 },
            CitationDistribution::Pareto { alpha: 1.0, xmin: 1.0 },
            CitationDistribution::Pareto { alpha: 2.0, xmin: 0.5 },
            CitationDistribution::Constant { c: -1.0 },
        ];
        for d in bad {
            assert!(generate_corpus(&SynthSpec::new(10, d, 1)).is_err(), "{d:?}");
        }
        assert!(generate_corpus(&SynthSpec::new(0, CitationDistribution::default(), 1)).is_err());
        let mut spec = SynthSpec::new(10, CitationDistribution::default(), 1);
        spec.journal_layout = vec![JournalLayout {
            journal_id: "A".into(),
            papers: 4,
            distribution: None,
            extra_refs: None,
            category: None,
        }];
        assert!(generate_corpus(&spec).is_err());
    }

    #[test]
    fn dominance_scenario_checks_hold() {
        let s = dominance_scenario().unwrap();
        assert!(s.check.class_dominance());
        assert!(s.check.strict_class_dominance());
        assert!(s.check.lower_mean());
        assert!(s.check.rank_reversal());
        assert_eq!(s.check.if_a, s.check.mean_a);
    }

    #[test]
    fn quantize_floors_and_caps() {
        assert_eq!(quantize(2.9, 100), 2);
        assert_eq!(quantize(-1.0, 100), 0);
        assert_eq!(quantize(1e12, 100), 100);
        assert_eq!(quantize(f64::NAN, 100), 0);
    }
}
