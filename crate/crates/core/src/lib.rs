//! Citation indicators for journals and arbitrary document sets.
//!
//! The crate ingests flat-file paper and journal records, resolves citation
//! links, and computes the classic central-tendency indicators (two-year IF,
//! moving-average IF, RCR and the mean of observed/expected ratios) next to
//! the non-parametric family: percentile ranks over a reference set, the
//! integrated impact indicator I3 (per-paper quantiles or a six-class
//! evaluation scheme) and top-k% proportions. Citations can be counted whole
//! or fractionally (1/NRef of the citing paper). The `stats` module carries
//! the significance tests needed to compare units.

pub mod error;
pub mod fractional;
pub mod indicators;
pub mod ingest;
pub mod percentiles;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use ingest::{CitationGraph, DocType, JournalRecord, PaperRecord, ReferenceSet, YearRange};

/// How a single citation is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Counting {
    /// Every citation counts 1.
    Whole,
    /// Every citation counts 1/NRef of the citing paper.
    Fractional,
}

impl std::str::FromStr for Counting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "whole" => Ok(Counting::Whole),
            "fractional" | "frac" => Ok(Counting::Fractional),
            other => Err(Error::InvalidArgument(format!("unknown counting mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for Counting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Counting::Whole => "whole",
            Counting::Fractional => "fractional",
        })
    }
}
