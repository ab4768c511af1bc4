//! Report serialization and all-or-nothing file output.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Which report files to write: the one requested, or both.
pub fn formats(requested: Option<ReportFormat>) -> Vec<ReportFormat> {
    match requested {
        Some(f) => vec![f],
        None => vec![ReportFormat::Csv, ReportFormat::Json],
    }
}

/// Fixed decimals; negative zero prints as zero.
pub fn fixed(value: f64, decimals: usize) -> String {
    if value.is_nan() {
        return "NA".into();
    }
    let s = format!("{value:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Usage(format!("csv output: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(format!("csv output: {e}")))
}

pub fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| CliError::Usage(format!("json output: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

/// Writes every file to a temporary name first and renames only once all
/// writes succeeded, so a failure leaves no partial output behind.
pub fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let cleanup = |staged: &[(PathBuf, PathBuf)]| {
        for (tmp, _) in staged {
            let _ = fs::remove_file(tmp);
        }
    };
    for (name, bytes) in files {
        let tmp = dir.join(format!(".{name}.partial"));
        if let Err(e) = fs::write(&tmp, bytes) {
            cleanup(&staged);
            let _ = fs::remove_file(&tmp);
            return Err(CliError::io(&tmp, e));
        }
        staged.push((tmp, dir.join(name)));
    }
    for (i, (tmp, dest)) in staged.iter().enumerate() {
        if let Err(e) = fs::rename(tmp, dest) {
            cleanup(&staged[i..]);
            return Err(CliError::io(dest, e));
        }
    }
    Ok(staged.into_iter().map(|(_, d)| d).collect())
}
