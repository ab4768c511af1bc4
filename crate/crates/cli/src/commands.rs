use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use impact_core::ingest::{write_journals, write_papers, Format};
use impact_core::percentiles::i3;
use impact_core::percentiles::I3Scheme;
use impact_core::stats::{mean_diff_from_summary, two_proportion_z, TestResult};
use impact_core::synth::{dominance_scenario, generate_corpus, SynthSpec, SyntheticCorpus};
use impact_core::{Counting, DocType, YearRange};
use serde::Serialize;

use crate::analysis::{Analysis, Dataset, Estimate, UnitRow, RANKED};
use crate::config::{format_for, Config};
use crate::error::{CliError, CliResult};
use crate::output::{csv_bytes, fixed, formats, json_bytes, write_all, ReportFormat};

pub const REPORT_COLUMNS: [&str; 18] = [
    "unit",
    "n_pubs",
    "total_cit",
    "total_cit_frac",
    "if",
    "if_moving",
    "quasi_if",
    "i3_q",
    "i3_pr6",
    "pct_i3",
    "pct_pr6",
    "top10",
    "top25",
    "z_expect",
    "sig01",
    "sig05",
    "rank_if",
    "rank_i3",
];

const COMPUTE_HELP: &str = "\
Report columns (report.csv, in this order):
  unit,n_pubs,total_cit,total_cit_frac,if,if_moving,quasi_if,i3_q,i3_pr6,pct_i3,pct_pr6,top10,top25,z_expect,sig01,sig05,rank_if,rank_i3

  unit            journal id or declared paper-set name
  n_pubs          papers of the unit in the publication window
  total_cit       whole-counted citations received in the citation window
  total_cit_frac  fractionally counted citations (1/NRef per citation)
  if              two-year impact factor, (c1 + c2) / (p1 + p2)
  if_moving       average of the yearly ratios c1/p1 and c2/p2
  quasi_if        impact factor over fractionally counted citations
  i3_q            sum of the unit's percentile ranks
  i3_pr6          sum of the unit's six-class weights
  pct_i3, pct_pr6 the unit's share of the reference-set total, in percent
  top10, top25    proportion of the unit's papers in the top 10% / 25%
  z_expect        z of the unit's I3 share against its share of papers
  sig01, sig05    z_expect significant at p < 0.01 / p < 0.05
  rank_if         dense rank by if (1 = highest)
  rank_i3         dense rank by i3_q

Indicators print with 3 decimals, shares and proportions with 2; report.json
keeps full precision, standard errors, every rank and the top-k list.
NA marks a value that is undefined for the unit.";

const CONFIG_HELP: &str = "\
Config file (key = value, '#' comments):
  papers, papers_format, journals, counting (whole|fractional),
  citable (all | doc types), scheme (nsb | file of 'lower_bound,weight'),
  year, pub_window, cite_window, reference (all | category:X | journals:A;B | ids:P1;P2),
  reference_label, topk, units (journals | A;B), unit.NAME = selector,
  match_doc_type, moving_if_fallback";

#[derive(Debug, Parser)]
#[command(name = "impact", version, about = "Citation impact indicators for journals and paper sets", after_help = CONFIG_HELP)]
pub struct Cli {
    /// Run configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Report format; both are written when omitted
    #[arg(long, global = true, value_enum)]
    pub format: Option<ReportFormat>,
    /// Worker threads for per-unit computation (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a corpus and summarize records, links and unresolved references
    IngestCheck {
        /// Papers file (defaults to the config's)
        papers: Option<PathBuf>,
        #[arg(long)]
        journals: Option<PathBuf>,
        /// csv or jsonl (default: from the file extension)
        #[arg(long)]
        papers_format: Option<String>,
    },
    /// Compute the indicator report for every unit
    #[command(after_help = COMPUTE_HELP)]
    Compute,
    /// Print units ordered by one indicator
    Rank {
        /// total_cit, total_cit_frac, if, if_moving, quasi_if, i3_q, i3_pr6, pct_i3, pct_pr6, top10, top25
        #[arg(long, default_value = "i3_q")]
        by: String,
    },
    /// Compare two units of one reference set
    Compare { unit1: String, unit2: String },
    /// Generate a synthetic corpus
    Synth {
        /// TOML corpus description
        spec: Option<PathBuf>,
        /// Emit the built-in dominance scenario instead of a spec
        #[arg(long, conflicts_with = "spec")]
        dominance: bool,
        /// csv or jsonl
        #[arg(long, default_value = "csv")]
        corpus_format: String,
    },
}

pub fn run(cli: Cli) -> CliResult<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&cli))
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let out_dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let config = || -> CliResult<Config> {
        let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("--config is required".into()))?;
        Config::load(path)
    };
    match &cli.command {
        Command::IngestCheck { papers, journals, papers_format } => {
            let (papers, journals, format) = match (papers, cli.config.is_some()) {
                (Some(p), _) => {
                    let format = match papers_format {
                        Some(f) => Format::from_str(f).map_err(|e| CliError::Usage(e.to_string()))?,
                        None => format_for(p),
                    };
                    (p.clone(), journals.clone(), format)
                }
                (None, true) => {
                    let c = config()?;
                    (c.papers, journals.clone().or(c.journals), c.papers_format)
                }
                (None, false) => return Err(CliError::Usage("ingest-check needs a papers file or --config".into())),
            };
            let summary = ingest_check(&papers, journals.as_deref(), format)?;
            print!("{}", summary.render(cli.format)?);
            Ok(())
        }
        Command::Compute => {
            let cfg = config()?;
            let data = Dataset::load(&cfg)?;
            let files = compute_files(&cfg, &data, cli.format)?;
            for p in write_all(&out_dir, &files)? {
                log::info!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Rank { by } => {
            let cfg = config()?;
            let data = Dataset::load(&cfg)?;
            print!("{}", String::from_utf8_lossy(&rank_bytes(&cfg, &data, by, cli.format)?));
            Ok(())
        }
        Command::Compare { unit1, unit2 } => {
            let cfg = config()?;
            let data = Dataset::load(&cfg)?;
            let files = compare_files(&cfg, &data, unit1, unit2, cli.format)?;
            write_all(&out_dir, &files)?;
            Ok(())
        }
        Command::Synth { spec, dominance, corpus_format } => {
            let format = Format::from_str(corpus_format).map_err(|e| CliError::Usage(e.to_string()))?;
            let files = if *dominance {
                dominance_files(format)?
            } else {
                let path =
                    spec.as_ref().ok_or_else(|| CliError::Usage("synth needs a spec file or --dominance".into()))?;
                synth_files(path, format)?
            };
            write_all(&out_dir, &files)?;
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
pub struct IngestSummary {
    pub papers: usize,
    pub journals: Option<usize>,
    pub citation_links: usize,
    pub unresolved_refs: usize,
    pub duplicate_refs: usize,
    pub zero_ref_papers: usize,
    pub doc_types: BTreeMap<String, usize>,
    pub years: BTreeMap<i32, usize>,
}

impl IngestSummary {
    fn render(&self, format: Option<ReportFormat>) -> CliResult<String> {
        if format == Some(ReportFormat::Json) {
            return Ok(String::from_utf8_lossy(&json_bytes(self)?).into_owned());
        }
        let mut s = format!("papers: {}\n", self.papers);
        if let Some(j) = self.journals {
            s += &format!("journals: {j}\n");
        }
        s += &format!(
            "citation links: {}\nunresolved refs: {}\nduplicate refs: {}\npapers without references: {}\n",
            self.citation_links, self.unresolved_refs, self.duplicate_refs, self.zero_ref_papers
        );
        for (t, n) in &self.doc_types {
            s += &format!("doc_type {t}: {n}\n");
        }
        for (y, n) in &self.years {
            s += &format!("year {y}: {n}\n");
        }
        Ok(s)
    }
}

pub fn ingest_check(papers: &Path, journals: Option<&Path>, format: Format) -> CliResult<IngestSummary> {
    let records = crate::analysis::load_papers(papers, format)?;
    let journal_count = match journals {
        Some(p) => Some(crate::analysis::load_journals(p)?.len()),
        None => None,
    };
    let graph = impact_core::ingest::resolve_citations(&records);
    let mut doc_types: BTreeMap<String, usize> = DocType::ALL.iter().map(|t| (t.to_string(), 0)).collect();
    let mut years: BTreeMap<i32, usize> = BTreeMap::new();
    for p in &records {
        *doc_types.entry(p.doc_type.to_string()).or_default() += 1;
        *years.entry(p.pub_year).or_default() += 1;
    }
    Ok(IngestSummary {
        papers: records.len(),
        journals: journal_count,
        citation_links: graph.len(),
        unresolved_refs: graph.unresolved_count(),
        duplicate_refs: graph.duplicate_count(),
        zero_ref_papers: records.iter().filter(|p| p.n_refs == 0).count(),
        doc_types,
        years,
    })
}

#[derive(Debug, Serialize)]
struct ReferenceSummary<'a> {
    label: &'a str,
    n_papers: usize,
    discriminating: bool,
    class_counts: &'a [usize],
    boundaries: &'a [f64],
    weights: &'a [f64],
    i3_q: f64,
    i3_pr6: f64,
}

#[derive(Debug, Serialize)]
struct ComputeReport<'a> {
    year: i32,
    pub_window: YearRange,
    cite_window: YearRange,
    counting: Counting,
    citable: Vec<DocType>,
    reference: ReferenceSummary<'a>,
    columns: &'a [&'a str],
    units: &'a [UnitRow],
}

fn reference_summary<'a>(a: &'a Analysis) -> ReferenceSummary<'a> {
    ReferenceSummary {
        label: a.reference.label(),
        n_papers: a.reference.len(),
        discriminating: a.dist.is_discriminating(),
        class_counts: a.dist.class_counts(),
        boundaries: a.dist.scheme().boundaries(),
        weights: a.dist.scheme().weights(),
        i3_q: i3(&a.dist, I3Scheme::Quantiles),
        i3_pr6: i3(&a.dist, I3Scheme::Pr6),
    }
}

fn opt3(e: &Estimate) -> String {
    e.value.map(|v| fixed(v, 3)).unwrap_or_else(|| "NA".into())
}

pub fn report_csv_row(r: &UnitRow) -> Vec<String> {
    let (z, s01, s05) = match &r.expectation {
        Some(t) => (fixed(t.test.statistic, 3), t.test.significant_01.to_string(), t.test.significant_05.to_string()),
        None => ("NA".into(), "NA".into(), "NA".into()),
    };
    vec![
        r.unit.clone(),
        r.n_pubs.to_string(),
        fixed(r.total_cit, 0),
        fixed(r.total_cit_frac, 3),
        opt3(&r.if_classic),
        opt3(&r.if_moving),
        opt3(&r.quasi_if),
        fixed(r.i3_q, 3),
        fixed(r.i3_pr6, 3),
        fixed(r.pct_i3, 2),
        fixed(r.pct_pr6, 2),
        fixed(r.top10, 2),
        fixed(r.top25, 2),
        z,
        s01,
        s05,
        r.ranks["if"].to_string(),
        r.ranks["i3_q"].to_string(),
    ]
}

/// Computes the report and renders the requested files, in memory.
pub fn compute_files(cfg: &Config, data: &Dataset, format: Option<ReportFormat>) -> CliResult<Vec<(String, Vec<u8>)>> {
    let analysis = Analysis::new(cfg, data)?;
    let units = analysis.units()?;
    if units.is_empty() {
        return Err(CliError::Usage("no units lie inside the reference set".into()));
    }
    let rows = analysis.rows(&units)?;
    let mut files = Vec::new();
    for f in formats(format) {
        match f {
            ReportFormat::Csv => {
                let body: Vec<Vec<String>> = rows.iter().map(report_csv_row).collect();
                files.push(("report.csv".to_string(), csv_bytes(&REPORT_COLUMNS, &body)?));
            }
            ReportFormat::Json => {
                let report = ComputeReport {
                    year: cfg.year,
                    pub_window: cfg.pub_window,
                    cite_window: cfg.cite_window,
                    counting: cfg.counting,
                    citable: cfg.citable.iter().copied().collect(),
                    reference: reference_summary(&analysis),
                    columns: &REPORT_COLUMNS,
                    units: &rows,
                };
                files.push(("report.json".to_string(), json_bytes(&report)?));
            }
        }
    }
    Ok(files)
}

#[derive(Debug, Serialize)]
struct RankEntry<'a> {
    rank: usize,
    unit: &'a str,
    value: f64,
}

pub fn rank_bytes(cfg: &Config, data: &Dataset, by: &str, format: Option<ReportFormat>) -> CliResult<Vec<u8>> {
    let get = RANKED.iter().find(|(n, _)| *n == by).map(|(_, g)| *g).ok_or_else(|| {
        let names: Vec<&str> = RANKED.iter().map(|(n, _)| *n).collect();
        CliError::Usage(format!("unknown indicator {by:?}; expected one of {}", names.join(", ")))
    })?;
    let analysis = Analysis::new(cfg, data)?;
    let rows = analysis.rows(&analysis.units()?)?;
    let mut entries: Vec<RankEntry> =
        rows.iter().map(|r| RankEntry { rank: r.ranks[by], unit: &r.unit, value: get(r) }).collect();
    entries.sort_by(|a, b| a.rank.cmp(&b.rank).then_with(|| a.unit.cmp(b.unit)));
    match format {
        Some(ReportFormat::Json) => json_bytes(&entries),
        _ => {
            let body: Vec<Vec<String>> =
                entries.iter().map(|e| vec![e.rank.to_string(), e.unit.to_string(), fixed(e.value, 3)]).collect();
            csv_bytes(&["rank", "unit", by], &body)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub indicator: String,
    pub value1: Option<f64>,
    pub value2: Option<f64>,
    pub test: Option<TestResult>,
    pub note: String,
}

#[derive(Debug, Serialize)]
struct CompareReport<'a> {
    unit1: &'a str,
    unit2: &'a str,
    reference: ReferenceSummary<'a>,
    rows: &'a [CompareRow],
}

fn row(indicator: &str, v1: Option<f64>, v2: Option<f64>, note: &str) -> CompareRow {
    CompareRow { indicator: indicator.into(), value1: v1, value2: v2, test: None, note: note.into() }
}

fn tested(
    indicator: &str,
    v1: Option<f64>,
    v2: Option<f64>,
    test: impact_core::Result<TestResult>,
    note: &str,
) -> CompareRow {
    match test {
        Ok(t) => CompareRow { indicator: indicator.into(), value1: v1, value2: v2, test: Some(t), note: note.into() },
        Err(e) => row(indicator, v1, v2, &format!("test n/a: {e}")),
    }
}

/// Difference of two means from their standard errors, positive when the
/// first is higher.
fn mean_test(indicator: &str, a: &Estimate, b: &Estimate) -> CompareRow {
    match (a.value, a.sem, b.value, b.sem) {
        (Some(m1), Some(s1), Some(m2), Some(s2)) => {
            tested(indicator, Some(m1), Some(m2), mean_diff_from_summary(m2, s2, m1, s1), "difference of means (sem)")
        }
        _ => row(indicator, a.value, b.value, "test n/a: standard error unavailable"),
    }
}

pub fn compare_rows(a: &UnitRow, b: &UnitRow, max_weight: f64) -> Vec<CompareRow> {
    let (n1, n2) = (a.n_pubs as u64, b.n_pubs as u64);
    let mut rows = vec![
        row("n_pubs", Some(a.n_pubs as f64), Some(b.n_pubs as f64), ""),
        row("total_cit", Some(a.total_cit), Some(b.total_cit), "not tested: totals"),
        row("total_cit_frac", Some(a.total_cit_frac), Some(b.total_cit_frac), "not tested: totals"),
        mean_test("if", &a.if_classic, &b.if_classic),
        row("if_moving", a.if_moving.value, b.if_moving.value, "not tested: no per-paper sample"),
        mean_test("quasi_if", &a.quasi_if, &b.quasi_if),
        tested(
            "i3_q",
            Some(a.i3_q),
            Some(b.i3_q),
            two_proportion_z(a.i3_q.round() as u64, 100 * n1, b.i3_q.round() as u64, 100 * n2),
            "I3 as successes out of 100 per paper",
        ),
    ];
    let w = max_weight.ceil() as u64;
    rows.push(tested(
        "i3_pr6",
        Some(a.i3_pr6),
        Some(b.i3_pr6),
        two_proportion_z(a.i3_pr6.round() as u64, w * n1, b.i3_pr6.round() as u64, w * n2),
        &format!("score as successes out of {w} per paper"),
    ));
    rows.push(row("pct_i3", Some(a.pct_i3), Some(b.pct_i3), "share; see expect_i3 rows"));
    rows.push(row("pct_pr6", Some(a.pct_pr6), Some(b.pct_pr6), "share"));
    for (ta, tb) in a.top_k.iter().zip(&b.top_k) {
        rows.push(tested(
            &format!("top{}", ta.k),
            Some(ta.proportion),
            Some(tb.proportion),
            two_proportion_z(ta.count as u64, n1, tb.count as u64, n2),
            "",
        ));
    }
    for (first, u) in [(true, a), (false, b)] {
        let name = format!("expect_i3:{}", u.unit);
        let (v1, v2) = if first { (Some(u.pct_i3), None) } else { (None, Some(u.pct_i3)) };
        rows.push(match (&u.expectation, &u.expectation_note) {
            (Some(t), _) => CompareRow {
                indicator: name,
                value1: v1,
                value2: v2,
                test: Some(t.test),
                note: format!(
                    "expected share {}; I3 {} of {} against papers {} of {}",
                    fixed(100.0 * t.expected_successes as f64 / t.expected_trials as f64, 2),
                    t.observed_successes,
                    t.observed_trials,
                    t.expected_successes,
                    t.expected_trials
                ),
            },
            (None, note) => row(&name, v1, v2, note.as_deref().unwrap_or("expectation test n/a")),
        });
    }
    rows.push(row("rcr", a.rcr.value, b.rcr.value, "not testable: dependent distributions"));
    rows.push(mean_test("m_ocr_ecr", &a.m_ocr_ecr, &b.m_ocr_ecr));
    rows
}

pub fn compare_files(
    cfg: &Config,
    data: &Dataset,
    unit1: &str,
    unit2: &str,
    format: Option<ReportFormat>,
) -> CliResult<Vec<(String, Vec<u8>)>> {
    let analysis = Analysis::new(cfg, data)?;
    let units = [analysis.unit(unit1)?, analysis.unit(unit2)?];
    let rows = analysis.rows(&units)?;
    let max_weight = cfg.scheme.weights().iter().copied().fold(0.0, f64::max);
    let cmp = compare_rows(&rows[0], &rows[1], max_weight);
    let mut files = Vec::new();
    for f in formats(format) {
        match f {
            ReportFormat::Csv => {
                let body: Vec<Vec<String>> = cmp
                    .iter()
                    .map(|r| {
                        let v = |x: Option<f64>| x.map(|v| fixed(v, 3)).unwrap_or_default();
                        let (z, p, s01, s05) = match &r.test {
                            Some(t) => (
                                fixed(t.statistic, 3),
                                format!("{:.3e}", t.p_value),
                                t.significant_01.to_string(),
                                t.significant_05.to_string(),
                            ),
                            None => Default::default(),
                        };
                        vec![r.indicator.clone(), v(r.value1), v(r.value2), z, p, s01, s05, r.note.clone()]
                    })
                    .collect();
                let header = ["indicator", unit1, unit2, "z", "p_value", "sig01", "sig05", "note"];
                files.push(("compare.csv".to_string(), csv_bytes(&header, &body)?));
            }
            ReportFormat::Json => {
                let report = CompareReport { unit1, unit2, reference: reference_summary(&analysis), rows: &cmp };
                files.push(("compare.json".to_string(), json_bytes(&report)?));
            }
        }
    }
    Ok(files)
}

fn corpus_files(corpus: &SyntheticCorpus, format: Format) -> CliResult<Vec<(String, Vec<u8>)>> {
    let name = match format {
        Format::Csv => "papers.csv",
        Format::Jsonl => "papers.jsonl",
    };
    let mut papers = Vec::new();
    write_papers(&mut papers, format, &corpus.papers)?;
    let mut journals = Vec::new();
    write_journals(&mut journals, &corpus.journals)?;
    Ok(vec![(name.to_string(), papers), ("journals.csv".to_string(), journals)])
}

fn compute_config(papers_file: &str, year: i32, reference: &str) -> Vec<u8> {
    format!("papers = {papers_file}\njournals = journals.csv\nyear = {year}\nreference = {reference}\n").into_bytes()
}

#[derive(Debug, Serialize)]
struct SynthManifest<'a, T: Serialize> {
    generator: &'a str,
    version: &'a str,
    seed: Option<u64>,
    parameters: T,
    papers: usize,
    citation_links: usize,
    files: Vec<String>,
}

pub fn synth_files(spec_path: &Path, format: Format) -> CliResult<Vec<(String, Vec<u8>)>> {
    if !spec_path.exists() {
        return Err(CliError::MissingInput(spec_path.to_path_buf()));
    }
    let text = fs::read_to_string(spec_path).map_err(|e| CliError::io(spec_path, e))?;
    let spec: SynthSpec = toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: invalid synth spec: {}", spec_path.display(), e.message())))?;
    let corpus = generate_corpus(&spec).map_err(|e| CliError::Input { path: spec_path.to_path_buf(), source: e })?;
    let mut files = corpus_files(&corpus, format)?;
    files.push(("compute.conf".to_string(), compute_config(&files[0].0, spec.year, "all")));
    let manifest = SynthManifest {
        generator: "spec",
        version: env!("CARGO_PKG_VERSION"),
        seed: Some(spec.seed),
        parameters: &spec,
        papers: corpus.papers.len(),
        citation_links: corpus.graph.len(),
        files: files.iter().map(|f| f.0.clone()).collect(),
    };
    files.push(("manifest.json".to_string(), json_bytes(&manifest)?));
    Ok(files)
}

pub fn dominance_files(format: Format) -> CliResult<Vec<(String, Vec<u8>)>> {
    let s = dominance_scenario()?;
    let mut files = corpus_files(&s.corpus, format)?;
    let conf = compute_config(&files[0].0, s.year, &format!("category:{}", s.category));
    files.push(("compute.conf".to_string(), conf));
    let manifest = SynthManifest {
        generator: "dominance",
        version: env!("CARGO_PKG_VERSION"),
        seed: None,
        parameters: serde_json::json!({
            "unit_a": s.unit_a,
            "unit_b": s.unit_b,
            "category": s.category,
            "year": s.year,
            "check": s.check,
        }),
        papers: s.corpus.papers.len(),
        citation_links: s.corpus.graph.len(),
        files: files.iter().map(|f| f.0.clone()).collect(),
    };
    files.push(("manifest.json".to_string(), json_bytes(&manifest)?));
    Ok(files)
}
