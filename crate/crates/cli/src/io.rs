//! Atomic file writes and the number formatting shared by every table.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// Writes `contents` to a temporary file in the target directory and
/// renames it into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt_f64)
}

pub fn parse_opt(s: &str) -> std::result::Result<Option<f64>, String> {
    if s == "NA" {
        return Ok(None);
    }
    s.parse::<f64>().map(Some).map_err(|_| format!("{s:?} is not a number"))
}

/// `# key: value` comment lines that open a CSV file.
pub fn header_lines(entries: &[(&str, String)]) -> String {
    entries.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
}

/// Splits leading `# key: value` lines from the body. Returns the entries
/// and the number of lines consumed.
pub fn split_header(text: &str) -> (Vec<(String, String)>, usize) {
    let mut entries = Vec::new();
    let mut consumed = 0;
    for line in text.lines() {
        let Some(rest) = line.strip_prefix('#') else { break };
        consumed += 1;
        if let Some((k, v)) = rest.trim_start().split_once(':') {
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    (entries, consumed)
}

/// Column names and the records of a CSV body, each with its 1-based file
/// line number.
pub type CsvRows = (Vec<String>, Vec<(usize, Vec<String>)>);

pub fn csv_rows(path: &Path, text: &str, skip_lines: usize) -> Result<CsvRows> {
    let body: String = text.lines().skip(skip_lines).map(|l| format!("{l}\n")).collect();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CliError::parse(path, skip_lines + 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            CliError::parse(path, skip_lines + line, e.to_string())
        })?;
        let line = skip_lines + rec.position().map_or(0, |p| p.line() as usize);
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok((headers, rows))
}

/// CSV text from a header row and string records.
pub fn csv_text(headers: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers).map_err(|e| CliError::validation(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::validation(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
