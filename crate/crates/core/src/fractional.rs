//! Source-normalized citation counting: each citation weighs 1/NRef of the
//! citing paper, where NRef is the citer's full declared reference count
//! (resolved or not).

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::indicators::{impact_factor, window_counts};
use crate::ingest::{index_papers, CitationGraph, DocType, PaperRecord, YearRange};
use crate::Counting;

pub fn fractional_weight(citing: &PaperRecord) -> Result<f64> {
    if citing.n_refs == 0 {
        return Err(Error::ZeroReferences(citing.paper_id.clone()));
    }
    Ok(1.0 / f64::from(citing.n_refs))
}

/// Weight of one citation from `citing`; `None` for a fractional citer
/// without references.
pub fn citation_weight(citing: &PaperRecord, counting: Counting) -> Option<f64> {
    match counting {
        Counting::Whole => Some(1.0),
        Counting::Fractional => fractional_weight(citing).ok(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FractionalTally {
    /// Fractional citations received, keyed by every paper in the target window.
    pub per_cited: BTreeMap<String, f64>,
    /// Sum over citing papers of resolved in-window refs / NRef.
    pub distributed_total: f64,
    /// Citers skipped because their NRef is zero.
    pub zero_ref_citers: usize,
}

pub fn fractional_tally(
    graph: &CitationGraph,
    papers: &[PaperRecord],
    cite_window: YearRange,
    target_pub_window: YearRange,
) -> FractionalTally {
    let index = index_papers(papers);
    let mut tally = FractionalTally {
        per_cited: papers
            .iter()
            .filter(|p| target_pub_window.contains(p.pub_year))
            .map(|p| (p.paper_id.clone(), 0.0))
            .collect(),
        ..Default::default()
    };
    let mut skipped: BTreeSet<&str> = BTreeSet::new();
    // Edges are sorted by (citing, cited), so each citer's edges are
    // contiguous. The citer's share enters the total as one k/NRef term,
    // which is exactly 1.0 when all of its references are counted.
    let edges = graph.edges();
    let mut start = 0;
    while start < edges.len() {
        let citing = edges[start].0.as_str();
        let end = start + edges[start..].iter().take_while(|(c, _)| c == citing).count();
        let citer = index[citing];
        let group = &edges[start..end];
        start = end;
        if !cite_window.contains(citer.pub_year) {
            continue;
        }
        let Ok(w) = fractional_weight(citer) else {
            skipped.insert(citing);
            continue;
        };
        let mut counted = 0u32;
        for (_, cited) in group {
            if let Some(slot) = tally.per_cited.get_mut(cited) {
                *slot += w;
                counted += 1;
            }
        }
        tally.distributed_total += f64::from(counted) / f64::from(citer.n_refs);
    }
    tally.zero_ref_citers = skipped.len();
    if tally.zero_ref_citers > 0 {
        log::warn!("{} citing papers with zero references skipped", tally.zero_ref_citers);
    }
    tally
}

/// The two-year IF computed over fractionally counted window citations.
pub fn quasi_if_fractional(
    journal_id: &str,
    year: i32,
    graph: &CitationGraph,
    papers: &[PaperRecord],
    citable_filter: &BTreeSet<DocType>,
) -> Result<f64> {
    let w = window_counts(journal_id, year, graph, papers, citable_filter, Counting::Fractional)?;
    impact_factor(&w)
}
