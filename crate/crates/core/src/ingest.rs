//! Flat-file ingestion of paper and journal records, citation resolution and
//! reference-set construction.
//!
//! Papers come as csv (`paper_id,journal_id,pub_year,doc_type,n_refs,refs`,
//! refs `;`-separated) or jsonl with the same field names. Journals come as
//! csv (`journal_id,name,categories`). Lines starting with `#` are comments.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PAPER_HEADER: [&str; 6] = ["paper_id", "journal_id", "pub_year", "doc_type", "n_refs", "refs"];
pub const JOURNAL_HEADER: [&str; 3] = ["journal_id", "name", "categories"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocType {
    Article,
    Review,
    Letter,
    Other,
}

impl DocType {
    pub const ALL: [DocType; 4] = [DocType::Article, DocType::Review, DocType::Letter, DocType::Other];

    /// Maps unknown labels to `Other`; the flag is false when that happened.
    pub fn parse_lenient(s: &str) -> (DocType, bool) {
        match s.trim().to_ascii_lowercase().as_str() {
            "article" => (DocType::Article, true),
            "review" => (DocType::Review, true),
            "letter" => (DocType::Letter, true),
            "other" => (DocType::Other, true),
            _ => (DocType::Other, false),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::Letter => "letter",
            DocType::Other => "other",
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DocType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match DocType::parse_lenient(s) {
            (t, true) => Ok(t),
            (_, false) => Err(Error::InvalidArgument(format!("unknown doc_type {s:?}"))),
        }
    }
}

/// One publication. `n_refs` is the full length of its reference list (NRef),
/// `refs` the subset of cited ids present in the input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub journal_id: String,
    pub pub_year: i32,
    pub doc_type: DocType,
    pub n_refs: u32,
    #[serde(default)]
    pub refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub journal_id: String,
    pub name: String,
    pub categories: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(Error::InvalidArgument(format!("unknown corpus format {other:?}"))),
        }
    }
}

/// Inclusive range of years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub fn new(start: i32, end: i32) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidArgument(format!("year range {start}-{end} is reversed")));
        }
        Ok(YearRange { start, end })
    }

    pub fn single(year: i32) -> Self {
        YearRange { start: year, end: year }
    }

    pub fn contains(&self, year: i32) -> bool {
        self.start <= year && year <= self.end
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.start == self.end {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}-{}", self.start, self.end)
        }
    }
}

impl FromStr for YearRange {
    type Err = Error;

    /// Accepts `2009` or `2007-2008`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("invalid year range {s:?}"));
        match s.split_once('-') {
            Some((a, b)) => {
                let a = a.trim().parse().map_err(|_| bad())?;
                let b = b.trim().parse().map_err(|_| bad())?;
                YearRange::new(a, b)
            }
            None => Ok(YearRange::single(s.parse().map_err(|_| bad())?)),
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawPaper {
    paper_id: String,
    journal_id: String,
    pub_year: i64,
    doc_type: String,
    n_refs: i64,
    #[serde(default)]
    refs: Vec<String>,
}

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn validate_paper(raw: RawPaper, line: u64) -> Result<PaperRecord> {
    if raw.paper_id.trim().is_empty() {
        return Err(parse_err(line, "empty paper_id"));
    }
    if raw.n_refs < 0 {
        return Err(parse_err(line, "negative n_refs"));
    }
    let n_refs = u32::try_from(raw.n_refs).map_err(|_| parse_err(line, "n_refs out of range"))?;
    let pub_year = i32::try_from(raw.pub_year).map_err(|_| parse_err(line, "pub_year out of range"))?;
    let (doc_type, known) = DocType::parse_lenient(&raw.doc_type);
    if !known {
        log::warn!("line {line}: unknown doc_type {:?} mapped to other", raw.doc_type);
    }
    let refs: Vec<String> = raw.refs.into_iter().map(|r| r.trim().to_string()).filter(|r| !r.is_empty()).collect();
    if refs.len() as u64 > u64::from(n_refs) {
        return Err(parse_err(line, format!("n_refs {n_refs} smaller than the {} listed refs", refs.len())));
    }
    Ok(PaperRecord {
        paper_id: raw.paper_id.trim().to_string(),
        journal_id: raw.journal_id.trim().to_string(),
        pub_year,
        doc_type,
        n_refs,
        refs,
    })
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            parse_err(line, format!("expected {expected_len} fields, found {len}"))
        }
        csv::ErrorKind::Utf8 { .. } => parse_err(line, "invalid UTF-8"),
        other => parse_err(line, format!("{other:?}")),
    }
}

/// Csv text with comment and blank lines removed, plus the physical line
/// number of every remaining line (the csv crate counts neither).
struct CsvSource {
    text: String,
    lines: Vec<u64>,
}

impl CsvSource {
    fn read<R: Read>(mut reader: R) -> Result<Self> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        let raw = String::from_utf8(bytes).map_err(|e| {
            let line = e.as_bytes()[..e.utf8_error().valid_up_to()].iter().filter(|b| **b == b'\n').count() as u64 + 1;
            parse_err(line, "invalid UTF-8")
        })?;
        let mut text = String::with_capacity(raw.len());
        let mut lines = Vec::new();
        for (i, line) in raw.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            text.push_str(line);
            text.push('\n');
            lines.push(i as u64 + 1);
        }
        Ok(CsvSource { text, lines })
    }

    fn reader(&self) -> csv::Reader<&[u8]> {
        csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(self.text.as_bytes())
    }

    /// Physical line of a 1-based line in the filtered text.
    fn physical(&self, filtered: u64) -> u64 {
        filtered.checked_sub(1).and_then(|i| self.lines.get(i as usize)).copied().unwrap_or(filtered)
    }

    fn err(&self, e: csv::Error) -> Error {
        match csv_err(e) {
            Error::Parse { line, message } => parse_err(self.physical(line), message),
            other => other,
        }
    }

    fn line_of(&self, rec: &csv::StringRecord) -> u64 {
        self.physical(rec.position().map(|p| p.line()).unwrap_or(0))
    }
}

fn check_header(src: &CsvSource, reader: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<()> {
    let header = reader.headers().map_err(|e| src.err(e))?.clone();
    let found: Vec<&str> = header.iter().collect();
    if found != expected {
        return Err(parse_err(
            src.physical(1),
            format!("expected header {}, found {}", expected.join(","), found.join(",")),
        ));
    }
    Ok(())
}

fn split_list(field: &str) -> impl Iterator<Item = &str> {
    field.split(';').map(str::trim).filter(|s| !s.is_empty())
}

/// Parses a papers file. Row order is preserved.
pub fn parse_papers<R: Read>(reader: R, format: Format) -> Result<Vec<PaperRecord>> {
    let mut papers = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |p: PaperRecord| -> Result<()> {
        if !seen.insert(p.paper_id.clone()) {
            return Err(Error::DuplicatePaper(p.paper_id));
        }
        papers.push(p);
        Ok(())
    };

    match format {
        Format::Csv => {
            let src = CsvSource::read(reader)?;
            let mut rdr = src.reader();
            check_header(&src, &mut rdr, &PAPER_HEADER)?;
            for rec in rdr.records() {
                let rec = rec.map_err(|e| src.err(e))?;
                let line = src.line_of(&rec);
                let int = |i: usize, name: &str| -> Result<i64> {
                    rec[i].parse::<i64>().map_err(|_| parse_err(line, format!("invalid {name} {:?}", &rec[i])))
                };
                let raw = RawPaper {
                    paper_id: rec[0].to_string(),
                    journal_id: rec[1].to_string(),
                    pub_year: int(2, "pub_year")?,
                    doc_type: rec[3].to_string(),
                    n_refs: int(4, "n_refs")?,
                    refs: split_list(&rec[5]).map(String::from).collect(),
                };
                push(validate_paper(raw, line)?)?;
            }
        }
        Format::Jsonl => {
            for (i, line) in BufReader::new(reader).lines().enumerate() {
                let line_no = i as u64 + 1;
                let line = line.map_err(|e| match e.kind() {
                    std::io::ErrorKind::InvalidData => parse_err(line_no, "invalid UTF-8"),
                    _ => Error::Io(e),
                })?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                let raw: RawPaper = serde_json::from_str(trimmed).map_err(|e| parse_err(line_no, e.to_string()))?;
                push(validate_paper(raw, line_no)?)?;
            }
        }
    }
    Ok(papers)
}

/// Writes papers in the same layout `parse_papers` reads.
pub fn write_papers<W: Write>(writer: W, format: Format, papers: &[PaperRecord]) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(writer);
            w.write_record(PAPER_HEADER).map_err(csv_err)?;
            for p in papers {
                let n_refs = p.n_refs.to_string();
                let year = p.pub_year.to_string();
                let refs = p.refs.join(";");
                w.write_record([
                    p.paper_id.as_str(),
                    p.journal_id.as_str(),
                    year.as_str(),
                    p.doc_type.as_str(),
                    n_refs.as_str(),
                    refs.as_str(),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut w = std::io::BufWriter::new(writer);
            for p in papers {
                serde_json::to_writer(&mut w, p).map_err(std::io::Error::from)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Parses a journals csv file; categories are split on `;`.
pub fn parse_journals<R: Read>(reader: R) -> Result<Vec<JournalRecord>> {
    let src = CsvSource::read(reader)?;
    let mut rdr = src.reader();
    check_header(&src, &mut rdr, &JOURNAL_HEADER)?;
    let mut seen = HashSet::new();
    let mut journals = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| src.err(e))?;
        let line = src.line_of(&rec);
        let journal_id = rec[0].to_string();
        if journal_id.is_empty() {
            return Err(parse_err(line, "empty journal_id"));
        }
        if !seen.insert(journal_id.clone()) {
            return Err(Error::DuplicateJournal(journal_id));
        }
        journals.push(JournalRecord {
            journal_id,
            name: rec[1].to_string(),
            categories: split_list(&rec[2]).map(String::from).collect(),
        });
    }
    Ok(journals)
}

pub fn write_journals<W: Write>(writer: W, journals: &[JournalRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(JOURNAL_HEADER).map_err(csv_err)?;
    for j in journals {
        let cats = j.categories.iter().map(String::as_str).collect::<Vec<_>>().join(";");
        w.write_record([j.journal_id.as_str(), j.name.as_str(), cats.as_str()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Resolved citing -> cited links. Edges are sorted by (citing, cited) and
/// unique.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CitationGraph {
    edges: Vec<(String, String)>,
    unresolved_count: usize,
    duplicate_count: usize,
}

impl CitationGraph {
    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    /// Reference strings that matched no paper in the corpus.
    pub fn unresolved_count(&self) -> usize {
        self.unresolved_count
    }

    /// Resolved references collapsed because the same pair was listed twice.
    pub fn duplicate_count(&self) -> usize {
        self.duplicate_count
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

pub fn resolve_citations(papers: &[PaperRecord]) -> CitationGraph {
    let known: HashSet<&str> = papers.iter().map(|p| p.paper_id.as_str()).collect();
    let mut edges = BTreeSet::new();
    let mut unresolved_count = 0;
    let mut duplicate_count = 0;
    for p in papers {
        for r in &p.refs {
            if !known.contains(r.as_str()) {
                unresolved_count += 1;
            } else if !edges.insert((p.paper_id.clone(), r.clone())) {
                duplicate_count += 1;
            }
        }
    }
    CitationGraph { edges: edges.into_iter().collect(), unresolved_count, duplicate_count }
}

pub fn index_papers(papers: &[PaperRecord]) -> HashMap<&str, &PaperRecord> {
    papers.iter().map(|p| (p.paper_id.as_str(), p)).collect()
}

/// Which papers make up a reference set (before the publication window is
/// applied).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    All,
    ByCategory(String),
    ByJournals(Vec<String>),
    ByIds(Vec<String>),
    /// Papers matched by the first selector and not by the second.
    Except(Box<Selector>, Box<Selector>),
}

impl Selector {
    fn matches(&self, paper: &PaperRecord, journals: &HashMap<&str, &JournalRecord>) -> bool {
        match self {
            Selector::All => true,
            Selector::ByCategory(code) => {
                journals.get(paper.journal_id.as_str()).is_some_and(|j| j.categories.contains(code))
            }
            Selector::ByJournals(ids) => ids.contains(&paper.journal_id),
            Selector::ByIds(ids) => ids.contains(&paper.paper_id),
            Selector::Except(keep, drop) => keep.matches(paper, journals) && !drop.matches(paper, journals),
        }
    }
}

impl FromStr for Selector {
    type Err = Error;

    /// `all`, `category:XA`, `journals:J1;J2`, `ids:P1;P2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(Selector::All);
        }
        let (kind, arg) =
            s.split_once(':').ok_or_else(|| Error::InvalidArgument(format!("invalid reference selector {s:?}")))?;
        let list = || split_list(arg).map(String::from).collect::<Vec<_>>();
        match kind.trim() {
            "category" => Ok(Selector::ByCategory(arg.trim().to_string())),
            "journals" => Ok(Selector::ByJournals(list())),
            "ids" => Ok(Selector::ByIds(list())),
            other => Err(Error::InvalidArgument(format!("unknown selector kind {other:?}"))),
        }
    }
}

/// The comparison population for percentiles and expected rates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReferenceSet {
    member_ids: BTreeSet<String>,
    pub_window: YearRange,
    cite_window: YearRange,
    label: String,
}

impl ReferenceSet {
    pub fn member_ids(&self) -> &BTreeSet<String> {
        &self.member_ids
    }

    pub fn contains(&self, paper_id: &str) -> bool {
        self.member_ids.contains(paper_id)
    }

    pub fn len(&self) -> usize {
        self.member_ids.len()
    }

    /// Always false for a constructed set; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.member_ids.is_empty()
    }

    pub fn pub_window(&self) -> YearRange {
        self.pub_window
    }

    pub fn cite_window(&self) -> YearRange {
        self.cite_window
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

pub fn build_reference_set(
    papers: &[PaperRecord],
    journals: &[JournalRecord],
    selector: &Selector,
    pub_window: YearRange,
    cite_window: YearRange,
    label: impl Into<String>,
) -> Result<ReferenceSet> {
    let jindex: HashMap<&str, &JournalRecord> = journals.iter().map(|j| (j.journal_id.as_str(), j)).collect();
    let member_ids: BTreeSet<String> = papers
        .iter()
        .filter(|p| pub_window.contains(p.pub_year) && selector.matches(p, &jindex))
        .map(|p| p.paper_id.clone())
        .collect();
    if member_ids.is_empty() {
        return Err(Error::EmptyReferenceSet);
    }
    Ok(ReferenceSet { member_ids, pub_window, cite_window, label: label.into() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper(id: &str, journal: &str, year: i32, n_refs: u32, refs: &[&str]) -> PaperRecord {
        PaperRecord {
            paper_id: id.into(),
            journal_id: journal.into(),
            pub_year: year,
            doc_type: DocType::Article,
            n_refs,
            refs: refs.iter().map(|s| s.to_string()).collect(),
        }
    }

    const HEADER: &str = "paper_id,journal_id,pub_year,doc_type,n_refs,refs\n";

    #[test]
    fn parses_well_formed_row() {
        let input = format!("{HEADER}P1,J1,2008,article,20,P2;P3\n");
        let papers = parse_papers(input.as_bytes(), Format::Csv).unwrap();
        assert_eq!(papers, vec![paper("P1", "J1", 2008, 20, &["P2", "P3"])]);
    }

    #[test]
    fn negative_n_refs_reports_line() {
        let input = format!("{HEADER}P1,J1,2008,article,-1,\n");
        match parse_papers(input.as_bytes(), Format::Csv) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert_eq!(message, "negative n_refs");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_refs_field() {
        let input = format!("{HEADER}P1,J1,2008,review,7,\n");
        let papers = parse_papers(input.as_bytes(), Format::Csv).unwrap();
        assert!(papers[0].refs.is_empty());
        assert_eq!(papers[0].n_refs, 7);
        assert_eq!(papers[0].doc_type, DocType::Review);
    }

    #[test]
    fn duplicate_paper_id() {
        let input = format!("{HEADER}P1,J1,2008,article,0,\nP1,J2,2009,article,0,\n");
        let err = parse_papers(input.as_bytes(), Format::Csv).unwrap_err();
        assert_eq!(err.to_string(), "duplicate paper_id P1");
    }

    #[test]
    fn malformed_rows() {
        let short = format!("{HEADER}P1,J1,2008\n");
        assert!(matches!(parse_papers(short.as_bytes(), Format::Csv), Err(Error::Parse { line: 2, .. })));
        let bad_year = format!("{HEADER}# comment\nP1,J1,20x8,article,1,\n");
        assert!(matches!(parse_papers(bad_year.as_bytes(), Format::Csv), Err(Error::Parse { line: 3, .. })));
        let too_few_refs = format!("{HEADER}P1,J1,2008,article,1,P2;P3\n");
        assert!(matches!(parse_papers(too_few_refs.as_bytes(), Format::Csv), Err(Error::Parse { .. })));
        let bad_header = "id,journal\nP1,J1\n";
        assert!(matches!(parse_papers(bad_header.as_bytes(), Format::Csv), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn unknown_doc_type_maps_to_other() {
        let input = format!("{HEADER}P1,J1,2008,editorial,0,\n");
        let papers = parse_papers(input.as_bytes(), Format::Csv).unwrap();
        assert_eq!(papers[0].doc_type, DocType::Other);
    }

    #[test]
    fn jsonl_with_comments() {
        let input = "# corpus\n{\"paper_id\":\"P1\",\"journal_id\":\"J1\",\"pub_year\":2008,\"doc_type\":\"letter\",\"n_refs\":3,\"refs\":[\"P2\"]}\n\n{\"paper_id\":\"P2\",\"journal_id\":\"J1\",\"pub_year\":2007,\"doc_type\":\"article\",\"n_refs\":0}\n";
        let papers = parse_papers(input.as_bytes(), Format::Jsonl).unwrap();
        assert_eq!(papers.len(), 2);
        assert_eq!(papers[0].refs, vec!["P2".to_string()]);
        assert!(papers[1].refs.is_empty());
        let bad =
            "{\"paper_id\":\"P1\",\"journal_id\":\"J1\",\"pub_year\":2008,\"doc_type\":\"letter\",\"n_refs\":-2}\n";
        assert!(matches!(parse_papers(bad.as_bytes(), Format::Jsonl), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn journals_parse() {
        let input = "journal_id,name,categories\nJ1,Library Quarterly,NU;XA\nJ2,Field Notes,\n";
        let journals = parse_journals(input.as_bytes()).unwrap();
        assert_eq!(journals[0].categories, ["NU", "XA"].iter().map(|s| s.to_string()).collect());
        assert!(journals[1].categories.is_empty());

        let dup = "journal_id,name,categories\nJ1,A,\nJ1,B,\n";
        assert_eq!(parse_journals(dup.as_bytes()).unwrap_err().to_string(), "duplicate journal_id J1");
    }

    #[test]
    fn resolve_hit_and_miss() {
        let papers = vec![paper("P1", "J", 2009, 2, &["P2", "X9"]), paper("P2", "J", 2008, 0, &[])];
        let g = resolve_citations(&papers);
        assert_eq!(g.edges(), &[("P1".to_string(), "P2".to_string())]);
        assert_eq!(g.unresolved_count(), 1);
    }

    #[test]
    fn resolve_empty_and_dedup() {
        let g = resolve_citations(&[paper("P1", "J", 2009, 0, &[])]);
        assert!(g.is_empty());
        assert_eq!(g.unresolved_count(), 0);

        let papers = vec![paper("P1", "J", 2009, 2, &["P2", "P2"]), paper("P2", "J", 2008, 0, &[])];
        let g = resolve_citations(&papers);
        assert_eq!(g.len(), 1);
        assert_eq!(g.duplicate_count(), 1);
    }

    fn fixture() -> (Vec<PaperRecord>, Vec<JournalRecord>) {
        let papers = vec![
            paper("P1", "J1", 2008, 0, &[]),
            paper("P2", "J1", 2007, 0, &[]),
            paper("P3", "J2", 2008, 0, &[]),
            paper("P4", "J3", 2008, 0, &[]),
            paper("P5", "J1", 2005, 0, &[]),
        ];
        let journals = vec![
            JournalRecord { journal_id: "J1".into(), name: "A".into(), categories: ["XA".to_string()].into() },
            JournalRecord {
                journal_id: "J2".into(),
                name: "B".into(),
                categories: ["XA".to_string(), "VI".to_string()].into(),
            },
            JournalRecord { journal_id: "J3".into(), name: "C".into(), categories: BTreeSet::new() },
        ];
        (papers, journals)
    }

    #[test]
    fn reference_set_by_category() {
        let (papers, journals) = fixture();
        let w = YearRange::new(2007, 2008).unwrap();
        let rs = build_reference_set(
            &papers,
            &journals,
            &Selector::ByCategory("XA".into()),
            w,
            YearRange::single(2009),
            "XA",
        )
        .unwrap();
        assert_eq!(rs.len(), 3);
        assert!(!rs.contains("P5"));
    }

    #[test]
    fn reference_set_window_exclusion() {
        let (papers, journals) = fixture();
        let w = YearRange::new(2007, 2008).unwrap();
        let err = build_reference_set(&papers, &journals, &Selector::ByIds(vec!["P5".into()]), w, w, "x").unwrap_err();
        assert_eq!(err.to_string(), "empty reference set");
    }

    #[test]
    fn reference_set_union_law() {
        let (papers, journals) = fixture();
        let w = YearRange::new(2000, 2010).unwrap();
        let build = |ids: &[&str]| {
            let sel = Selector::ByJournals(ids.iter().map(|s| s.to_string()).collect());
            build_reference_set(&papers, &journals, &sel, w, w, "").unwrap().member_ids().clone()
        };
        let both = build(&["J1", "J2"]);
        let union: BTreeSet<String> = build(&["J1"]).union(&build(&["J2"])).cloned().collect();
        assert_eq!(both, union);
    }

    #[test]
    fn reference_set_difference() {
        let (papers, journals) = fixture();
        let w = YearRange::new(2007, 2008).unwrap();
        let sel =
            Selector::Except(Box::new(Selector::ByCategory("XA".into())), Box::new(Selector::ByCategory("VI".into())));
        let rs = build_reference_set(&papers, &journals, &sel, w, w, "").unwrap();
        assert_eq!(rs.member_ids().iter().collect::<Vec<_>>(), ["P1", "P2"]);
    }

    #[test]
    fn selector_and_range_parsing() {
        assert_eq!("category:XA".parse::<Selector>().unwrap(), Selector::ByCategory("XA".into()));
        assert_eq!("journals:J1;J2".parse::<Selector>().unwrap(), Selector::ByJournals(vec!["J1".into(), "J2".into()]));
        assert!("bogus".parse::<Selector>().is_err());
        assert_eq!("2007-2008".parse::<YearRange>().unwrap(), YearRange { start: 2007, end: 2008 });
        assert_eq!("2009".parse::<YearRange>().unwrap(), YearRange::single(2009));
        assert!("2009-2007".parse::<YearRange>().is_err());
    }
}
