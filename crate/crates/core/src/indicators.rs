//! Central-tendency journal indicators: two-year IF, moving-average IF,
//! total citations, RCR and the mean of per-paper observed/expected ratios.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fractional::citation_weight;
use crate::ingest::{index_papers, CitationGraph, DocType, PaperRecord, ReferenceSet, YearRange};
use crate::Counting;

/// Citations in year t to a journal's citable items of t-1 (`c1`, `p1`) and
/// t-2 (`c2`, `p2`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CitationWindowCounts {
    pub c1: f64,
    pub c2: f64,
    pub p1: u64,
    pub p2: u64,
}

impl CitationWindowCounts {
    pub fn new(c1: f64, c2: f64, p1: u64, p2: u64) -> Result<Self> {
        if !(c1 >= 0.0 && c2 >= 0.0) {
            return Err(Error::InvalidArgument("negative citation count".into()));
        }
        if (p1 == 0 && c1 > 0.0) || (p2 == 0 && c2 > 0.0) {
            return Err(Error::InvalidArgument("citations to a year without citable items".into()));
        }
        Ok(CitationWindowCounts { c1, c2, p1, p2 })
    }
}

pub fn window_counts(
    journal_id: &str,
    year: i32,
    graph: &CitationGraph,
    papers: &[PaperRecord],
    citable_filter: &BTreeSet<DocType>,
    counting: Counting,
) -> Result<CitationWindowCounts> {
    let ids: BTreeSet<String> =
        papers.iter().filter(|p| p.journal_id == journal_id).map(|p| p.paper_id.clone()).collect();
    if ids.is_empty() {
        return Err(Error::UnknownJournal(journal_id.to_string()));
    }
    window_counts_of(&ids, year, graph, papers, citable_filter, counting)
}

/// Window counts for an arbitrary paper set: its citable items of t-1 and
/// t-2 and the citations they receive in year t.
pub fn window_counts_of(
    ids: &BTreeSet<String>,
    year: i32,
    graph: &CitationGraph,
    papers: &[PaperRecord],
    citable_filter: &BTreeSet<DocType>,
    counting: Counting,
) -> Result<CitationWindowCounts> {
    let citable = |p: &PaperRecord| ids.contains(&p.paper_id) && citable_filter.contains(&p.doc_type);
    let mut w = CitationWindowCounts::default();
    for p in papers.iter().filter(|p| citable(p)) {
        if p.pub_year == year - 1 {
            w.p1 += 1;
        } else if p.pub_year == year - 2 {
            w.p2 += 1;
        }
    }
    let index = index_papers(papers);
    for (citing, cited) in graph.edges() {
        if !ids.contains(cited) {
            continue;
        }
        let citer = index[citing.as_str()];
        let target = index[cited.as_str()];
        if citer.pub_year != year || !citable(target) {
            continue;
        }
        let Some(weight) = citation_weight(citer, counting) else { continue };
        if target.pub_year == year - 1 {
            w.c1 += weight;
        } else if target.pub_year == year - 2 {
            w.c2 += weight;
        }
    }
    Ok(w)
}

/// `(c1 + c2) / (p1 + p2)` at full precision.
pub fn impact_factor(w: &CitationWindowCounts) -> Result<f64> {
    let items = w.p1 + w.p2;
    if items == 0 {
        return Err(Error::NoCitableItems);
    }
    Ok((w.c1 + w.c2) / items as f64)
}

/// `(c1/p1 + c2/p2) / 2`; undefined when either year has no citable items.
pub fn moving_average_if(w: &CitationWindowCounts) -> Result<f64> {
    if w.p1 == 0 || w.p2 == 0 {
        return Err(Error::ZeroPublicationYear);
    }
    if w.p1 == w.p2 {
        // same value, but bit-identical to the classic IF
        return impact_factor(w);
    }
    Ok((w.c1 / w.p1 as f64 + w.c2 / w.p2 as f64) / 2.0)
}

/// Observed citation counts paired with the expected rates of their
/// reference set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeRates {
    observed: Vec<f64>,
    expected: Vec<f64>,
    mocr: f64,
    mecr: f64,
}

impl RelativeRates {
    pub fn new(observed: Vec<f64>, expected: Vec<f64>) -> Result<Self> {
        if observed.is_empty() {
            return Err(Error::InsufficientData("relative rates need at least one paper".into()));
        }
        if observed.len() != expected.len() {
            return Err(Error::InvalidArgument(format!(
                "{} observed vs {} expected rates",
                observed.len(),
                expected.len()
            )));
        }
        let n = observed.len() as f64;
        let mocr = observed.iter().sum::<f64>() / n;
        let mecr = expected.iter().sum::<f64>() / n;
        Ok(RelativeRates { observed, expected, mocr, mecr })
    }

    pub fn observed(&self) -> &[f64] {
        &self.observed
    }

    pub fn expected(&self) -> &[f64] {
        &self.expected
    }

    pub fn mocr(&self) -> f64 {
        self.mocr
    }

    pub fn mecr(&self) -> f64 {
        self.mecr
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }
}

/// MOCR / MECR. A quotient of two means carries no standard error, and the
/// unit is a subset of its own reference set, so no test is attached to it.
pub fn rcr(r: &RelativeRates) -> Result<f64> {
    if r.mecr == 0.0 {
        return Err(Error::ZeroMecr);
    }
    Ok(r.mocr / r.mecr)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioSummary {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single paper.
    pub sd: f64,
    pub n: usize,
}

impl RatioSummary {
    /// Standard error of the mean, `None` below two observations.
    pub fn sem(&self) -> Option<f64> {
        (self.n >= 2).then(|| self.sd / (self.n as f64).sqrt())
    }
}

/// Mean of per-paper observed/expected ratios (divide first, then average).
pub fn mean_ocr_ecr(r: &RelativeRates) -> Result<RatioSummary> {
    let ratios = r
        .observed
        .iter()
        .zip(&r.expected)
        .enumerate()
        .map(|(i, (o, e))| if *e > 0.0 { Ok(o / e) } else { Err(Error::ZeroExpected(i)) })
        .collect::<Result<Vec<f64>>>()?;
    let n = ratios.len();
    let mean = ratios.iter().sum::<f64>() / n as f64;
    let sd = if n < 2 { 0.0 } else { (ratios.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() };
    Ok(RatioSummary { mean, sd, n })
}

/// Sum of citation weights received by `ids` from papers published within
/// `cite_window`.
pub fn total_citations(
    ids: &BTreeSet<String>,
    graph: &CitationGraph,
    papers: &[PaperRecord],
    cite_window: YearRange,
    counting: Counting,
) -> f64 {
    if ids.is_empty() {
        return 0.0;
    }
    let index = index_papers(papers);
    let mut total = 0.0;
    for (citing, cited) in graph.edges() {
        if !ids.contains(cited) {
            continue;
        }
        let citer = index[citing.as_str()];
        if !cite_window.contains(citer.pub_year) {
            continue;
        }
        if let Some(w) = citation_weight(citer, counting) {
            total += w;
        }
    }
    total
}

/// Citations received per paper, for every id in `ids` (zero when uncited).
/// Accumulation follows the graph's (citing, cited) order.
pub fn citation_counts(
    ids: &BTreeSet<String>,
    graph: &CitationGraph,
    papers: &[PaperRecord],
    cite_window: YearRange,
    counting: Counting,
) -> BTreeMap<String, f64> {
    let index = index_papers(papers);
    let mut counts: BTreeMap<String, f64> = ids.iter().map(|id| (id.clone(), 0.0)).collect();
    for (citing, cited) in graph.edges() {
        let Some(slot) = counts.get_mut(cited) else { continue };
        let citer = index[citing.as_str()];
        if !cite_window.contains(citer.pub_year) {
            continue;
        }
        if let Some(w) = citation_weight(citer, counting) {
            *slot += w;
        }
    }
    counts
}

/// Observed counts of `unit_ids` against expected rates taken from the
/// reference set: the mean count of reference members with the same
/// publication year, and the same doc_type when `match_doc_type` is set.
pub fn relative_rates(
    unit_ids: &BTreeSet<String>,
    reference: &ReferenceSet,
    papers: &[PaperRecord],
    counts: &BTreeMap<String, f64>,
    match_doc_type: bool,
) -> Result<RelativeRates> {
    let index = index_papers(papers);
    let mut cells: HashMap<(i32, Option<DocType>), (f64, usize)> = HashMap::new();
    for id in reference.member_ids() {
        let p = index.get(id.as_str()).ok_or_else(|| Error::MissingCount(id.clone()))?;
        let c = *counts.get(id).ok_or_else(|| Error::MissingCount(id.clone()))?;
        let key = (p.pub_year, match_doc_type.then_some(p.doc_type));
        let cell = cells.entry(key).or_insert((0.0, 0));
        cell.0 += c;
        cell.1 += 1;
    }
    let mut observed = Vec::with_capacity(unit_ids.len());
    let mut expected = Vec::with_capacity(unit_ids.len());
    for id in unit_ids {
        if !reference.contains(id) {
            return Err(Error::OutsideReferenceSet(id.clone()));
        }
        let p = index[id.as_str()];
        let (sum, n) = cells[&(p.pub_year, match_doc_type.then_some(p.doc_type))];
        observed.push(counts[id]);
        expected.push(sum / n as f64);
    }
    RelativeRates::new(observed, expected)
}
