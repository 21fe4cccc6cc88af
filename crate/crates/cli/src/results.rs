//! Result files: posterior summaries, draws, diagnostics and sweep tables.

use std::path::Path;

use causens_core::estimands::{summarize, EstimandSummary, PointStats, SweepRow, SweepTable};
use causens_core::sampler::DrawsMatrix;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::io::{csv_rows, csv_text, fmt_f64, fmt_opt, header_lines, parse_opt, read_to_string, split_header};

pub const SUMMARY_COLUMNS: [&str; 9] = ["quantity", "mean", "sd", "mcse", "q2.5", "q50", "q97.5", "ess", "rhat"];

/// Provenance lines written at the top of every table.
pub fn provenance(kind: &str, config_json: &str, seed: u64) -> String {
    header_lines(&[
        (kind, "1".into()),
        ("seed", seed.to_string()),
        ("config", config_json.to_string()),
    ])
}

/// Quantity indices with the generated quantities (ATE first) ahead of the
/// parameters.
pub fn summary_order(draws: &DrawsMatrix, generated: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = generated.iter().filter_map(|g| draws.index_of(g)).collect();
    let rest: Vec<usize> = (0..draws.n_quantities()).filter(|q| !order.contains(q)).collect();
    order.extend(rest);
    order
}

pub fn summaries(draws: &DrawsMatrix, order: &[usize]) -> Result<Vec<(String, EstimandSummary)>> {
    order
        .iter()
        .map(|&q| {
            summarize(&draws.column(q))
                .map(|s| (draws.names[q].clone(), s))
                .map_err(|e| CliError::Sampling(format!("{}: {e}", draws.names[q])))
        })
        .collect()
}

pub fn render_summary(header: &str, rows: &[(String, EstimandSummary)]) -> Result<String> {
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, s)| {
            vec![
                name.clone(),
                fmt_f64(s.mean),
                fmt_f64(s.sd),
                fmt_opt(s.mcse),
                fmt_f64(s.q025),
                fmt_f64(s.q50),
                fmt_f64(s.q975),
                fmt_opt(s.ess),
                fmt_opt(s.rhat),
            ]
        })
        .collect();
    let cols: Vec<String> = SUMMARY_COLUMNS.iter().map(|s| s.to_string()).collect();
    Ok(format!("{header}{}", csv_text(&cols, &records)?))
}

/// Summary rows keyed by quantity name.
pub fn read_summary(path: &Path) -> Result<Vec<(String, EstimandSummary)>> {
    let text = read_to_string(path)?;
    let (_, skip) = split_header(&text);
    let (headers, rows) = csv_rows(path, &text, skip)?;
    if headers != SUMMARY_COLUMNS {
        return Err(CliError::parse(path, skip + 1, "not a summary table"));
    }
    rows.into_iter()
        .map(|(line, r)| {
            let num = |i: usize| -> Result<f64> {
                r[i].parse::<f64>()
                    .map_err(|_| CliError::parse(path, line, format!("{} {:?} is not a number", SUMMARY_COLUMNS[i], r[i])))
            };
            let opt = |i: usize| parse_opt(&r[i]).map_err(|e| CliError::parse(path, line, e));
            Ok((
                r[0].clone(),
                EstimandSummary {
                    mean: num(1)?,
                    sd: num(2)?,
                    mcse: opt(3)?,
                    q025: num(4)?,
                    q50: num(5)?,
                    q975: num(6)?,
                    ess: opt(7)?,
                    rhat: opt(8)?,
                },
            ))
        })
        .collect()
}

pub fn render_draws(header: &str, draws: &DrawsMatrix) -> Result<String> {
    let mut cols = vec!["chain".to_string(), "draw".to_string(), "divergent".to_string()];
    cols.extend(draws.names.iter().cloned());
    let k = draws.n_quantities();
    let mut out = String::from(header);
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::validation(e.to_string());
    w.write_record(&cols).map_err(err)?;
    let mut rec: Vec<String> = Vec::with_capacity(k + 3);
    for (c, chain) in draws.chains.iter().enumerate() {
        for (i, row) in chain.values.chunks(k).enumerate() {
            rec.clear();
            rec.push(c.to_string());
            rec.push(i.to_string());
            rec.push(u8::from(chain.divergent[i]).to_string());
            rec.extend(row.iter().map(|&v| fmt_f64(v)));
            w.write_record(&rec).map_err(err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::validation(e.to_string()))?;
    out.push_str(std::str::from_utf8(&bytes).expect("utf-8"));
    Ok(out)
}

/// Draws read back from a draws file.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawsTable {
    pub names: Vec<String>,
    /// `[chain][quantity][draw]`.
    pub chains: Vec<Vec<Vec<f64>>>,
    pub divergences: usize,
    pub header: Vec<(String, String)>,
}

impl DrawsTable {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, q: usize) -> Vec<Vec<f64>> {
        self.chains.iter().map(|c| c[q].clone()).collect()
    }

    pub fn n_draws(&self) -> usize {
        self.chains.iter().map(|c| c.first().map_or(0, Vec::len)).sum()
    }

    /// Value of quantity `q` at pooled draw `i` (chains concatenated).
    pub fn pooled_value(&self, q: usize, mut i: usize) -> f64 {
        for c in &self.chains {
            let n = c[q].len();
            if i < n {
                return c[q][i];
            }
            i -= n;
        }
        f64::NAN
    }
}

pub fn read_draws(path: &Path) -> Result<DrawsTable> {
    let text = read_to_string(path)?;
    let (header, skip) = split_header(&text);
    let (headers, rows) = csv_rows(path, &text, skip)?;
    if headers.len() < 3 || headers[..3] != ["chain", "draw", "divergent"] {
        return Err(CliError::parse(path, skip + 1, "not a draws table"));
    }
    let names: Vec<String> = headers[3..].to_vec();
    let mut chains: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut divergences = 0;
    for (line, r) in rows {
        let bad = |m: String| CliError::parse(path, line, m);
        let c: usize = r[0].parse().map_err(|_| bad(format!("bad chain {:?}", r[0])))?;
        if c > chains.len() {
            return Err(bad(format!("chain {c} appears before chain {}", chains.len())));
        }
        if c == chains.len() {
            chains.push(vec![Vec::new(); names.len()]);
        }
        divergences += usize::from(r[2] == "1");
        for (q, v) in r[3..].iter().enumerate() {
            let v = v.parse::<f64>().map_err(|_| bad(format!("{} {v:?} is not a number", names[q])))?;
            chains[c][q].push(v);
        }
    }
    if chains.is_empty() {
        return Err(CliError::parse(path, skip + 1, "draws table has no rows"));
    }
    Ok(DrawsTable {
        names,
        chains,
        divergences,
        header,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainDiagnostics {
    pub chain: usize,
    pub step_size: f64,
    pub divergences: usize,
    pub mean_accept_stat: f64,
    pub mean_leapfrog_steps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantityDiagnostics {
    pub name: String,
    pub rhat: Option<f64>,
    pub ess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub seed: u64,
    pub total_divergences: usize,
    pub max_rhat: Option<f64>,
    pub min_ess: Option<f64>,
    pub chains: Vec<ChainDiagnostics>,
    pub quantities: Vec<QuantityDiagnostics>,
}

fn extremes(qs: &[QuantityDiagnostics]) -> (Option<f64>, Option<f64>) {
    let max_rhat = qs.iter().filter_map(|q| q.rhat).reduce(f64::max);
    let min_ess = qs.iter().filter_map(|q| q.ess).reduce(f64::min);
    (max_rhat, min_ess)
}

pub fn diagnostics(draws: &DrawsMatrix, summaries: &[(String, EstimandSummary)], seed: u64) -> Diagnostics {
    let chains = draws
        .chains
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let n = c.divergent.len().max(1) as f64;
            ChainDiagnostics {
                chain: i,
                step_size: c.step_size,
                divergences: c.divergent.iter().filter(|&&d| d).count(),
                mean_accept_stat: c.accept_stat.iter().sum::<f64>() / n,
                mean_leapfrog_steps: c.leapfrog_steps.iter().map(|&s| f64::from(s)).sum::<f64>() / n,
            }
        })
        .collect();
    let quantities: Vec<QuantityDiagnostics> = summaries
        .iter()
        .map(|(name, s)| QuantityDiagnostics {
            name: name.clone(),
            rhat: s.rhat,
            ess: s.ess,
        })
        .collect();
    let (max_rhat, min_ess) = extremes(&quantities);
    Diagnostics {
        seed,
        total_divergences: draws.divergences(),
        max_rhat,
        min_ess,
        chains,
        quantities,
    }
}

/// Diagnostics recomputed from a draws file (no per-chain sampler state).
pub fn diagnostics_from_table(table: &DrawsTable) -> Result<(Vec<QuantityDiagnostics>, Option<f64>, Option<f64>)> {
    let quantities: Vec<QuantityDiagnostics> = (0..table.names.len())
        .map(|q| {
            let s = summarize(&table.column(q)).map_err(|e| CliError::validation(format!("{}: {e}", table.names[q])))?;
            Ok(QuantityDiagnostics {
                name: table.names[q].clone(),
                rhat: s.rhat,
                ess: s.ess,
            })
        })
        .collect::<Result<_>>()?;
    let (max_rhat, min_ess) = extremes(&quantities);
    Ok((quantities, max_rhat, min_ess))
}

const SWEEP_TAIL: [&str; 10] = [
    "status",
    "mean",
    "sd",
    "mcse",
    "q2.5",
    "q97.5",
    "max_rhat",
    "min_ess",
    "divergences",
    "error",
];

pub fn render_sweep(header: &str, table: &SweepTable) -> Result<String> {
    let mut cols = vec!["index".to_string()];
    cols.extend(table.axes.iter().cloned());
    cols.extend(SWEEP_TAIL.iter().map(|s| s.to_string()));
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|row| {
            let mut r = vec![row.index.to_string()];
            r.extend(row.values.iter().map(|&v| fmt_f64(v)));
            match &row.outcome {
                Ok(s) => r.extend([
                    "ok".to_string(),
                    fmt_f64(s.mean),
                    fmt_f64(s.sd),
                    fmt_opt(s.mcse),
                    fmt_f64(s.q025),
                    fmt_f64(s.q975),
                    fmt_opt(s.max_rhat),
                    fmt_opt(s.min_ess),
                    s.divergences.to_string(),
                    String::new(),
                ]),
                Err(e) => {
                    r.push("error".to_string());
                    r.extend(std::iter::repeat_n(String::new(), 8));
                    r.push(e.clone());
                }
            }
            r
        })
        .collect();
    Ok(format!("{header}{}", csv_text(&cols, &rows)?))
}

pub fn read_sweep(path: &Path) -> Result<SweepTable> {
    let text = read_to_string(path)?;
    parse_sweep(path, &text)
}

pub fn parse_sweep(path: &Path, text: &str) -> Result<SweepTable> {
    let (_, skip) = split_header(text);
    let (headers, rows) = csv_rows(path, text, skip)?;
    let n_axes = headers.len().saturating_sub(1 + SWEEP_TAIL.len());
    if headers.first().map(String::as_str) != Some("index") || headers[1 + n_axes..] != SWEEP_TAIL || n_axes == 0 {
        return Err(CliError::parse(
            path,
            skip + 1,
            format!("expected columns index,<axes>,{}", SWEEP_TAIL.join(",")),
        ));
    }
    let axes = headers[1..1 + n_axes].to_vec();
    let mut out = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        let bad = |m: String| CliError::parse(path, line, m);
        let num = |i: usize| -> Result<f64> {
            r[i].parse::<f64>()
                .map_err(|_| bad(format!("{} {:?} is not a number", headers[i], r[i])))
        };
        let opt = |i: usize| parse_opt(&r[i]).map_err(|e| bad(format!("{}: {e}", headers[i])));
        let index = r[0].parse::<usize>().map_err(|_| bad(format!("bad index {:?}", r[0])))?;
        let values = (1..=n_axes).map(num).collect::<Result<Vec<f64>>>()?;
        let t = 1 + n_axes;
        let outcome = match r[t].as_str() {
            "ok" => Ok(PointStats {
                mean: num(t + 1)?,
                sd: num(t + 2)?,
                mcse: opt(t + 3)?,
                q025: num(t + 4)?,
                q975: num(t + 5)?,
                max_rhat: opt(t + 6)?,
                min_ess: opt(t + 7)?,
                divergences: r[t + 8]
                    .parse()
                    .map_err(|_| bad(format!("bad divergence count {:?}", r[t + 8])))?,
            }),
            "error" => Err(r[t + 9].clone()),
            other => return Err(bad(format!("status must be ok or error, got {other:?}"))),
        };
        out.push(SweepRow { index, values, outcome });
    }
    Ok(SweepTable { axes, rows: out })
}
