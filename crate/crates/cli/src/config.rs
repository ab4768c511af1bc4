//! `key = value` run configuration. Paths are resolved against the
//! directory holding the config file.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use impact_core::ingest::{Format, Selector};
use impact_core::percentiles::EvaluationScheme;
use impact_core::{Counting, DocType, YearRange};

use crate::error::{CliError, CliResult};

pub const KEYS: [&str; 15] = [
    "papers",
    "papers_format",
    "journals",
    "counting",
    "citable",
    "scheme",
    "year",
    "pub_window",
    "cite_window",
    "reference",
    "reference_label",
    "topk",
    "units",
    "match_doc_type",
    "moving_if_fallback",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub papers: PathBuf,
    pub papers_format: Format,
    pub journals: Option<PathBuf>,
    pub counting: Counting,
    pub citable: BTreeSet<DocType>,
    pub scheme: EvaluationScheme,
    pub year: i32,
    pub pub_window: YearRange,
    pub cite_window: YearRange,
    pub reference: Selector,
    pub reference_label: String,
    pub topk: Vec<f64>,
    /// Journal units to report; `None` means every journal inside the reference set.
    pub units: Option<Vec<String>>,
    /// Declared paper-set units, `unit.NAME = selector`, in file order.
    pub paper_sets: Vec<(String, Selector)>,
    pub match_doc_type: bool,
    /// Report the classic IF in place of the moving average when one window year is empty.
    pub moving_if_fallback: bool,
}

fn usage(line: usize, message: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("config line {line}: {message}"))
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn list(s: &str) -> impl Iterator<Item = &str> {
    s.split([',', ';']).map(str::trim).filter(|t| !t.is_empty())
}

pub fn format_for(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("json") => Format::Jsonl,
        _ => Format::Csv,
    }
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Config> {
        if !path.exists() {
            return Err(CliError::MissingInput(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Config::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> CliResult<Config> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| usage(i + 1, "expected key = value"))?;
            let k = k.trim().to_string();
            if !KEYS.contains(&k.as_str()) && !k.starts_with("unit.") {
                return Err(usage(i + 1, format!("unknown key {k:?}")));
            }
            if entries.iter().any(|(_, seen, _)| *seen == k) {
                return Err(usage(i + 1, format!("duplicate key {k:?}")));
            }
            entries.push((i + 1, k, v.trim().to_string()));
        }
        let get = |key: &str| entries.iter().find(|(_, k, _)| k == key).map(|(l, _, v)| (*l, v.as_str()));
        let path = |v: &str| base.join(v);

        let (_, papers) = get("papers").ok_or_else(|| CliError::Usage("config: missing key \"papers\"".into()))?;
        let papers = path(papers);
        let papers_format = match get("papers_format") {
            Some((l, v)) => Format::from_str(v).map_err(|e| usage(l, e))?,
            None => format_for(&papers),
        };
        let (yl, year) = get("year").ok_or_else(|| CliError::Usage("config: missing key \"year\"".into()))?;
        let year: i32 = year.parse().map_err(|_| usage(yl, format!("invalid year {year:?}")))?;
        let window = |key: &str, default: YearRange| -> CliResult<YearRange> {
            match get(key) {
                Some((l, v)) => YearRange::from_str(v).map_err(|e| usage(l, e)),
                None => Ok(default),
            }
        };
        let pub_window = window("pub_window", YearRange::new(year - 2, year - 1).map_err(|e| usage(yl, e))?)?;
        let cite_window = window("cite_window", YearRange::single(year))?;

        let counting = match get("counting") {
            Some((l, v)) => Counting::from_str(v).map_err(|e| usage(l, e))?,
            None => Counting::Whole,
        };
        let citable = match get("citable") {
            Some((_, v)) if v.eq_ignore_ascii_case("all") => DocType::ALL.into_iter().collect(),
            Some((l, v)) => {
                let set =
                    list(v).map(DocType::from_str).collect::<Result<BTreeSet<_>, _>>().map_err(|e| usage(l, e))?;
                if set.is_empty() {
                    return Err(usage(l, "empty citable filter"));
                }
                set
            }
            None => DocType::ALL.into_iter().collect(),
        };
        let scheme = match get("scheme") {
            Some((_, v)) if v.eq_ignore_ascii_case("nsb") => EvaluationScheme::nsb(),
            Some((_, v)) => {
                let p = path(v);
                if !p.exists() {
                    return Err(CliError::MissingInput(p));
                }
                let text = fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
                EvaluationScheme::parse(&text).map_err(|e| CliError::Input { path: p, source: e })?
            }
            None => EvaluationScheme::nsb(),
        };
        let (reference, reference_label) = match get("reference") {
            Some((l, v)) => (Selector::from_str(v).map_err(|e| usage(l, e))?, v.to_string()),
            None => (Selector::All, "all".to_string()),
        };
        let reference_label = get("reference_label").map(|(_, v)| v.to_string()).unwrap_or(reference_label);
        let topk = match get("topk") {
            Some((l, v)) => {
                let ks = list(v)
                    .map(|t| t.parse::<f64>().ok().filter(|k| *k > 0.0 && *k < 100.0))
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| usage(l, format!("invalid top-k list {v:?}; each k must lie in (0, 100)")))?;
                if ks.is_empty() {
                    return Err(usage(l, "empty top-k list"));
                }
                ks
            }
            None => vec![10.0, 25.0],
        };
        let units = match get("units") {
            Some((_, v)) if v.eq_ignore_ascii_case("journals") => None,
            Some((l, v)) => {
                let names: Vec<String> = list(v).map(String::from).collect();
                if names.is_empty() {
                    return Err(usage(l, "empty unit list"));
                }
                Some(names)
            }
            None => None,
        };
        let mut paper_sets = Vec::new();
        for (l, k, v) in &entries {
            if let Some(name) = k.strip_prefix("unit.") {
                if name.is_empty() {
                    return Err(usage(*l, "unit name missing"));
                }
                paper_sets.push((name.to_string(), Selector::from_str(v).map_err(|e| usage(*l, e))?));
            }
        }
        let flag = |key: &str| -> CliResult<bool> {
            match get(key) {
                Some((l, v)) => parse_bool(v).ok_or_else(|| usage(l, format!("expected true or false, got {v:?}"))),
                None => Ok(false),
            }
        };
        Ok(Config {
            papers,
            papers_format,
            journals: get("journals").map(|(_, v)| path(v)),
            counting,
            citable,
            scheme,
            year,
            pub_window,
            cite_window,
            reference,
            reference_label,
            topk,
            units,
            paper_sets,
            match_doc_type: flag("match_doc_type")?,
            moving_if_fallback: flag("moving_if_fallback")?,
        })
    }
}
