//! Per-unit indicator rows over one reference set.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use impact_core::indicators::{
    citation_counts, impact_factor, mean_ocr_ecr, moving_average_if, rcr, relative_rates, total_citations,
    window_counts, window_counts_of,
};
use impact_core::ingest::{build_reference_set, parse_journals, parse_papers, resolve_citations, Format};
use impact_core::percentiles::{i3, i3_of, i3_share, quantile_ranks, top_k_count, I3Scheme, PercentileDistribution};
use impact_core::stats::{expectation_test, sem, ExpectationTest};
use impact_core::{CitationGraph, Counting, Error, JournalRecord, PaperRecord, ReferenceSet, YearRange};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, CliResult};

pub struct Dataset {
    pub papers: Vec<PaperRecord>,
    pub journals: Vec<JournalRecord>,
    pub graph: CitationGraph,
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    if !path.exists() {
        return Err(CliError::MissingInput(path.to_path_buf()));
    }
    Ok(BufReader::new(File::open(path).map_err(|e| CliError::io(path, e))?))
}

pub fn load_papers(path: &Path, format: Format) -> CliResult<Vec<PaperRecord>> {
    parse_papers(open(path)?, format).map_err(|e| CliError::Input { path: path.to_path_buf(), source: e })
}

pub fn load_journals(path: &Path) -> CliResult<Vec<JournalRecord>> {
    parse_journals(open(path)?).map_err(|e| CliError::Input { path: path.to_path_buf(), source: e })
}

impl Dataset {
    pub fn load(cfg: &Config) -> CliResult<Dataset> {
        let papers = load_papers(&cfg.papers, cfg.papers_format)?;
        let journals = match &cfg.journals {
            Some(p) => load_journals(p)?,
            None => Vec::new(),
        };
        let graph = resolve_citations(&papers);
        Ok(Dataset { papers, journals, graph })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Journal,
    PaperSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unit {
    pub name: String,
    pub kind: UnitKind,
    #[serde(skip)]
    pub ids: BTreeSet<String>,
}

/// A mean-type value with its standard error, or the reason there is none.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub value: Option<f64>,
    pub sem: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Estimate {
    fn with_sample(value: f64, sample: &[f64]) -> Self {
        match sem(sample) {
            Ok(s) => Estimate { value: Some(value), sem: Some(s), note: None },
            Err(e) => Estimate { value: Some(value), sem: None, note: Some(format!("sem n/a: {e}")) },
        }
    }

    fn without_sem(value: f64, reason: &str) -> Self {
        Estimate { value: Some(value), sem: None, note: Some(format!("sem n/a: {reason}")) }
    }

    fn missing(reason: String) -> Self {
        Estimate { value: None, sem: None, note: Some(reason) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopK {
    pub k: f64,
    pub count: usize,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitRow {
    pub unit: String,
    pub kind: UnitKind,
    pub n_pubs: usize,
    pub total_cit: f64,
    pub total_cit_frac: f64,
    pub mean_cit: Estimate,
    pub if_classic: Estimate,
    pub if_moving: Estimate,
    /// True when the moving average was replaced by the classic IF.
    pub if_moving_fallback: bool,
    pub quasi_if: Estimate,
    pub i3_q: f64,
    pub i3_pr6: f64,
    pub pct_i3: f64,
    pub pct_pr6: f64,
    pub class_counts: Vec<usize>,
    pub top_k: Vec<TopK>,
    pub top10: f64,
    pub top25: f64,
    pub expectation: Option<ExpectationTest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectation_note: Option<String>,
    pub rcr: Estimate,
    pub m_ocr_ecr: Estimate,
    pub ranks: BTreeMap<String, usize>,
}

impl UnitRow {
    pub fn if_value(&self) -> f64 {
        self.if_classic.value.unwrap_or(f64::NAN)
    }

    pub fn if_moving_value(&self) -> f64 {
        self.if_moving.value.unwrap_or(f64::NAN)
    }

    pub fn quasi_if_value(&self) -> f64 {
        self.quasi_if.value.unwrap_or(f64::NAN)
    }
}

type Accessor = fn(&UnitRow) -> f64;

/// Indicators that receive ranks, with their accessor.
pub const RANKED: [(&str, Accessor); 11] = [
    ("total_cit", |r| r.total_cit),
    ("total_cit_frac", |r| r.total_cit_frac),
    ("if", UnitRow::if_value),
    ("if_moving", UnitRow::if_moving_value),
    ("quasi_if", UnitRow::quasi_if_value),
    ("i3_q", |r| r.i3_q),
    ("i3_pr6", |r| r.i3_pr6),
    ("pct_i3", |r| r.pct_i3),
    ("pct_pr6", |r| r.pct_pr6),
    ("top10", |r| r.top10),
    ("top25", |r| r.top25),
];

/// Dense descending ranks 1..U; equal values share the smaller rank.
pub fn dense_ranks(values: &[f64]) -> Vec<usize> {
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup();
    values.iter().map(|v| distinct.iter().position(|d| d == v).unwrap_or(0) + 1).collect()
}

/// Reference set, its citation counts and percentile distribution.
pub struct Analysis<'a> {
    pub cfg: &'a Config,
    pub data: &'a Dataset,
    pub reference: ReferenceSet,
    pub counts: BTreeMap<String, f64>,
    pub dist: PercentileDistribution,
}

impl<'a> Analysis<'a> {
    pub fn new(cfg: &'a Config, data: &'a Dataset) -> CliResult<Self> {
        let reference = build_reference_set(
            &data.papers,
            &data.journals,
            &cfg.reference,
            cfg.pub_window,
            cfg.cite_window,
            cfg.reference_label.clone(),
        )?;
        let counts = citation_counts(reference.member_ids(), &data.graph, &data.papers, cfg.cite_window, cfg.counting);
        let dist = quantile_ranks(&reference, &counts, &cfg.scheme)?;
        if !dist.is_discriminating() {
            log::warn!(
                "reference set {} has a single citation value; percentiles do not discriminate",
                reference.label()
            );
        }
        Ok(Analysis { cfg, data, reference, counts, dist })
    }

    fn journal_members(&self) -> BTreeMap<&str, BTreeSet<String>> {
        let mut out: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
        for p in self.data.papers.iter().filter(|p| self.cfg.pub_window.contains(p.pub_year)) {
            out.entry(p.journal_id.as_str()).or_default().insert(p.paper_id.clone());
        }
        out
    }

    fn check_inside(&self, name: &str, ids: &BTreeSet<String>) -> CliResult<()> {
        if ids.is_empty() {
            return Err(CliError::Usage(format!("unit {name} has no papers in {}", self.cfg.pub_window)));
        }
        if let Some(outside) = ids.iter().find(|id| !self.reference.contains(id)) {
            return Err(CliError::Usage(format!(
                "unit {name} lies outside reference set {} (paper {outside})",
                self.reference.label()
            )));
        }
        Ok(())
    }

    /// Looks a unit up by name: a declared paper set first, then a journal.
    pub fn unit(&self, name: &str) -> CliResult<Unit> {
        if let Some((_, selector)) = self.cfg.paper_sets.iter().find(|(n, _)| n == name) {
            let ids = build_reference_set(
                &self.data.papers,
                &self.data.journals,
                selector,
                self.cfg.pub_window,
                self.cfg.cite_window,
                name,
            )
            .map(|r| r.member_ids().clone())
            .unwrap_or_default();
            self.check_inside(name, &ids)?;
            return Ok(Unit { name: name.into(), kind: UnitKind::PaperSet, ids });
        }
        let members = self.journal_members();
        let ids = members.get(name).cloned().ok_or_else(|| CliError::Usage(format!("unknown unit {name}")))?;
        self.check_inside(name, &ids)?;
        Ok(Unit { name: name.into(), kind: UnitKind::Journal, ids })
    }

    /// Configured units, or every journal lying wholly inside the reference set.
    pub fn units(&self) -> CliResult<Vec<Unit>> {
        let mut units = Vec::new();
        match &self.cfg.units {
            Some(names) => {
                for n in names {
                    units.push(self.unit(n)?);
                }
            }
            None => {
                for (j, ids) in self.journal_members() {
                    let inside = ids.iter().filter(|id| self.reference.contains(id)).count();
                    if inside == ids.len() {
                        units.push(Unit { name: j.into(), kind: UnitKind::Journal, ids });
                    } else if inside > 0 {
                        log::warn!("journal {j} straddles the reference set; skipped");
                    }
                }
            }
        }
        for (name, _) in &self.cfg.paper_sets {
            if !units.iter().any(|u| u.name == *name) {
                units.push(self.unit(name)?);
            }
        }
        Ok(units)
    }

    /// Citable items of t-1 and t-2 belonging to the unit.
    fn window_items(&self, unit: &Unit) -> BTreeSet<String> {
        let year = self.cfg.year;
        self.data
            .papers
            .iter()
            .filter(|p| p.pub_year == year - 1 || p.pub_year == year - 2)
            .filter(|p| self.cfg.citable.contains(&p.doc_type))
            .filter(|p| match unit.kind {
                UnitKind::Journal => p.journal_id == unit.name,
                UnitKind::PaperSet => unit.ids.contains(&p.paper_id),
            })
            .map(|p| p.paper_id.clone())
            .collect()
    }

    pub fn row(&self, unit: &Unit) -> CliResult<UnitRow> {
        let (cfg, data) = (self.cfg, self.data);
        let ids = &unit.ids;
        let n = ids.len();
        let window = |counting| match unit.kind {
            UnitKind::Journal => window_counts(&unit.name, cfg.year, &data.graph, &data.papers, &cfg.citable, counting),
            UnitKind::PaperSet => window_counts_of(ids, cfg.year, &data.graph, &data.papers, &cfg.citable, counting),
        };
        let unit_err = |e: Error| CliError::Compute(Error::InvalidArgument(format!("unit {}: {e}", unit.name)));
        let whole = window(Counting::Whole).map_err(unit_err)?;
        let frac = window(Counting::Fractional).map_err(unit_err)?;

        let items = self.window_items(unit);
        let per_item = |counting| -> Vec<f64> {
            citation_counts(&items, &data.graph, &data.papers, YearRange::single(cfg.year), counting)
                .into_values()
                .collect()
        };
        let if_value = impact_factor(&whole).map_err(unit_err)?;
        let if_classic = Estimate::with_sample(if_value, &per_item(Counting::Whole));
        let (if_moving, if_moving_fallback) = match moving_average_if(&whole) {
            Ok(v) => (Estimate::without_sem(v, "average of two yearly ratios"), false),
            Err(Error::ZeroPublicationYear) if cfg.moving_if_fallback => {
                log::warn!("unit {}: empty window year; moving-average IF replaced by classic IF", unit.name);
                (Estimate::without_sem(if_value, "classic IF substituted for an empty window year"), true)
            }
            Err(e) => return Err(unit_err(e)),
        };
        let quasi_if = Estimate::with_sample(impact_factor(&frac).map_err(unit_err)?, &per_item(Counting::Fractional));

        let unit_counts: Vec<f64> = ids.iter().map(|id| self.counts[id]).collect();
        let mean_cit = Estimate::with_sample(unit_counts.iter().sum::<f64>() / n as f64, &unit_counts);

        let i3_q = i3_of(ids, &self.dist, I3Scheme::Quantiles)?;
        let mut ks = cfg.topk.clone();
        for k in [10.0, 25.0] {
            if !ks.contains(&k) {
                ks.push(k);
            }
        }
        let top_k = ks
            .iter()
            .map(|&k| {
                let count = top_k_count(ids, &self.dist, k)?;
                Ok(TopK { k, count, proportion: count as f64 / n as f64 })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let prop = |k: f64| top_k.iter().find(|t| t.k == k).map(|t| t.proportion).unwrap_or(f64::NAN);

        let total_q = i3(&self.dist, I3Scheme::Quantiles);
        let (expectation, expectation_note) =
            match expectation_test(i3_q, n as u64, total_q, self.reference.len() as u64) {
                Ok(t) => (Some(t), None),
                Err(e) => (None, Some(format!("expectation test n/a: {e}"))),
            };

        let (rcr_est, m_ocr_ecr) =
            match relative_rates(ids, &self.reference, &data.papers, &self.counts, cfg.match_doc_type) {
                Ok(rates) => (
                    match rcr(&rates) {
                        Ok(v) => Estimate::without_sem(v, "ratio of two means"),
                        Err(e) => Estimate::missing(e.to_string()),
                    },
                    match mean_ocr_ecr(&rates) {
                        Ok(summary) => match summary.sem() {
                            Some(s) => Estimate { value: Some(summary.mean), sem: Some(s), note: None },
                            None => Estimate::without_sem(summary.mean, "fewer than two papers"),
                        },
                        Err(e) => Estimate::missing(e.to_string()),
                    },
                ),
                Err(e) => (Estimate::missing(e.to_string()), Estimate::missing(e.to_string())),
            };

        Ok(UnitRow {
            unit: unit.name.clone(),
            kind: unit.kind,
            n_pubs: n,
            total_cit: total_citations(ids, &data.graph, &data.papers, cfg.cite_window, Counting::Whole),
            total_cit_frac: total_citations(ids, &data.graph, &data.papers, cfg.cite_window, Counting::Fractional),
            mean_cit,
            if_classic,
            if_moving,
            if_moving_fallback,
            quasi_if,
            i3_q,
            i3_pr6: i3_of(ids, &self.dist, I3Scheme::Pr6)?,
            pct_i3: i3_share(ids, &self.dist, I3Scheme::Quantiles)?,
            pct_pr6: i3_share(ids, &self.dist, I3Scheme::Pr6)?,
            class_counts: self.dist.class_counts_of(ids)?,
            top10: prop(10.0),
            top25: prop(25.0),
            top_k,
            expectation,
            expectation_note,
            rcr: rcr_est,
            m_ocr_ecr,
            ranks: BTreeMap::new(),
        })
    }

    /// Rows for every unit, computed in parallel and merged in unit order,
    /// then ranked.
    pub fn rows(&self, units: &[Unit]) -> CliResult<Vec<UnitRow>> {
        let mut rows = units.par_iter().map(|u| self.row(u)).collect::<CliResult<Vec<_>>>()?;
        for (name, get) in RANKED {
            let values: Vec<f64> = rows.iter().map(get).collect();
            for (row, rank) in rows.iter_mut().zip(dense_ranks(&values)) {
                row.ranks.insert(name.to_string(), rank);
            }
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_are_dense_and_share_the_smaller_rank() {
        assert_eq!(dense_ranks(&[3.0, 5.0, 3.0, 1.0]), vec![2, 1, 2, 3]);
        assert_eq!(dense_ranks(&[2.0]), vec![1]);
        assert_eq!(dense_ranks(&[]), Vec::<usize>::new());
        assert_eq!(dense_ranks(&[0.5, 0.5, 0.5]), vec![1, 1, 1]);
    }
}
