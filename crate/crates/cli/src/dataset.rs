//! Dataset files: `# key: value` header lines recording the generating
//! spec and true ATE, then columns `delta,y,a,l` with an empty `y` for a
//! missing outcome.

use std::path::Path;

use causens_core::models::Dataset;
use causens_core::synthdata::{DgpSpec, Synthetic};

use crate::error::{CliError, Result};
use crate::io::{csv_rows, csv_text, fmt_f64, header_lines, read_to_string, split_header, write_atomic};

const COLUMNS: [&str; 4] = ["delta", "y", "a", "l"];

/// A dataset and, when it was simulated, how.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub data: Dataset,
    pub spec: Option<DgpSpec>,
    pub true_ate: Option<f64>,
}

pub fn render(syn: &Synthetic, spec: &DgpSpec) -> Result<String> {
    let spec_json = serde_json::to_string(spec).map_err(|e| CliError::validation(e.to_string()))?;
    let mut out = header_lines(&[
        ("causens dataset", "1".into()),
        ("family", spec.family().name().into()),
        ("seed", spec.seed().to_string()),
        ("n", syn.data.n().to_string()),
        ("true_ate", fmt_f64(syn.true_ate)),
        ("spec", spec_json),
    ]);
    let d = &syn.data;
    let rows: Vec<Vec<String>> = (0..d.n())
        .map(|i| {
            vec![
                d.delta()[i].to_string(),
                d.y()[i].map_or_else(String::new, fmt_f64),
                d.a()[i].to_string(),
                fmt_f64(d.l()[i]),
            ]
        })
        .collect();
    let headers: Vec<String> = COLUMNS.iter().map(|s| s.to_string()).collect();
    out.push_str(&csv_text(&headers, &rows)?);
    Ok(out)
}

pub fn write(path: &Path, syn: &Synthetic, spec: &DgpSpec) -> Result<()> {
    write_atomic(path, render(syn, spec)?.as_bytes())
}

pub fn read(path: &Path) -> Result<DatasetFile> {
    let text = read_to_string(path)?;
    parse(path, &text)
}

pub fn parse(path: &Path, text: &str) -> Result<DatasetFile> {
    let (header, skip) = split_header(text);
    let mut spec = None;
    let mut true_ate = None;
    for (i, (k, v)) in header.iter().enumerate() {
        match k.as_str() {
            "spec" => {
                spec = Some(
                    serde_json::from_str::<DgpSpec>(v)
                        .map_err(|e| CliError::parse(path, i + 1, format!("bad spec header: {e}")))?,
                )
            }
            "true_ate" => {
                true_ate = Some(
                    v.parse::<f64>()
                        .map_err(|_| CliError::parse(path, i + 1, format!("bad true_ate {v:?}")))?,
                )
            }
            _ => {}
        }
    }
    let (headers, rows) = csv_rows(path, text, skip)?;
    if headers != COLUMNS {
        return Err(CliError::parse(
            path,
            skip + 1,
            format!("expected columns {}, found {}", COLUMNS.join(","), headers.join(",")),
        ));
    }
    let n = rows.len();
    let (mut y, mut a, mut l) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (line, rec) in rows {
        let bad = |m: String| CliError::parse(path, line, m);
        let delta = match rec[0].as_str() {
            "0" => 0,
            "1" => 1,
            other => return Err(bad(format!("delta must be 0 or 1, got {other:?}"))),
        };
        let yi = if rec[1].is_empty() {
            None
        } else {
            Some(rec[1].parse::<f64>().map_err(|_| bad(format!("y {:?} is not a number", rec[1])))?)
        };
        if (delta == 1) != yi.is_none() {
            return Err(bad("delta must be 1 exactly when y is empty".into()));
        }
        let ai = match rec[2].as_str() {
            "0" => 0,
            "1" => 1,
            other => return Err(bad(format!("a must be 0 or 1, got {other:?}"))),
        };
        let li = rec[3]
            .parse::<f64>()
            .map_err(|_| bad(format!("l {:?} is not a number", rec[3])))?;
        y.push(yi);
        a.push(ai);
        l.push(li);
    }
    let data = Dataset::new(y, a, l).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    Ok(DatasetFile { data, spec, true_ate })
}
