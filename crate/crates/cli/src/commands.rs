//! The subcommands. Each returns the lines it reports on stdout.

use std::path::{Path, PathBuf};

use causens_core::estimands::{grid_sweep, tipping_point, Bound, Tipping, TippingReport};
use causens_core::models::{build_model, fit, ModelError, ModelKind};
use causens_core::synthdata::{DgpFamily, DgpSpec};
use serde::Serialize;

use crate::config::RunConfig;
use crate::dataset::{self, DatasetFile};
use crate::error::{CliError, Result};
use crate::io::{fmt_f64, fmt_opt, read_to_string, write_atomic};
use crate::plot;
use crate::results::{
    diagnostics, diagnostics_from_table, provenance, read_draws, read_sweep, render_draws, render_summary,
    render_sweep, summaries, summary_order,
};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const DRAWS_FILE: &str = "draws.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";
pub const RUN_FILE: &str = "run.json";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const TIPPING_FILE: &str = "tipping.json";
pub const CURVE_PLOT: &str = "sweep_curve.svg";
pub const HEATMAP_PLOT: &str = "sweep_heatmap.svg";
pub const TSB_PLOT: &str = "tsb_regression.svg";

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

/// Applies `key=value` overrides to a spec, where each value is JSON
/// (`n=200`, `xi3=-1`, `eta=[0,1,0.5]`).
pub fn apply_spec_overrides(spec: &DgpSpec, overrides: &[String]) -> Result<DgpSpec> {
    let mut value = serde_json::to_value(spec).expect("spec serializes");
    let obj = value.as_object_mut().expect("spec is an object");
    for item in overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::validation(format!("--set expects FIELD=VALUE, got {item:?}")))?;
        let k = k.trim();
        if k == "family" || !obj.contains_key(k) {
            let fields: Vec<&str> = obj.keys().map(String::as_str).filter(|f| *f != "family").collect();
            return Err(CliError::validation(format!(
                "{} specs have no field {k:?} (fields: {})",
                spec.family(),
                fields.join(", ")
            )));
        }
        let parsed: serde_json::Value = serde_json::from_str(v.trim())
            .map_err(|e| CliError::validation(format!("value of {k} is not JSON: {e}")))?;
        obj.insert(k.to_string(), parsed);
    }
    serde_json::from_value(value).map_err(|e| CliError::validation(format!("invalid spec: {e}")))
}

pub struct SimulateRequest {
    pub family: Option<DgpFamily>,
    pub spec_path: Option<PathBuf>,
    pub set: Vec<String>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub file_name: String,
}

pub fn simulate(req: &SimulateRequest) -> Result<Vec<String>> {
    let mut spec = match (&req.spec_path, req.family) {
        (Some(p), family) => {
            let text = read_to_string(p)?;
            let spec: DgpSpec = serde_json::from_str(&text).map_err(|e| CliError::parse(p, e.line(), e.to_string()))?;
            if family.is_some_and(|f| f != spec.family()) {
                return Err(CliError::validation(format!(
                    "--family {} disagrees with the spec file's family {}",
                    family.unwrap(),
                    spec.family()
                )));
            }
            spec
        }
        (None, Some(f)) => f.default_spec(),
        (None, None) => return Err(CliError::validation("give --family or --spec")),
    };
    spec = apply_spec_overrides(&spec, &req.set)?;
    if let Some(s) = req.seed {
        spec.set_seed(s);
    }
    let syn = spec.generate().map_err(|e| CliError::validation(e.to_string()))?;
    let path = req.out.join(&req.file_name);
    dataset::write(&path, &syn, &spec)?;
    Ok(vec![format!(
        "wrote {} ({} rows, {} missing outcomes, true ATE {})",
        path.display(),
        syn.data.n(),
        syn.data.n_missing(),
        fmt_f64(syn.true_ate)
    )])
}

fn load_dataset(cfg: &RunConfig) -> Result<DatasetFile> {
    dataset::read(cfg.data_path()?)
}

fn model_error(e: ModelError) -> CliError {
    CliError::validation(e.to_string())
}

#[derive(Serialize)]
struct DatasetInfo<'a> {
    path: &'a Path,
    n: usize,
    n_missing: usize,
    true_ate: Option<f64>,
}

#[derive(Serialize)]
struct RunRecord<'a> {
    command: &'a str,
    version: &'a str,
    model: ModelKind,
    seed: u64,
    dataset: DatasetInfo<'a>,
    config: &'a RunConfig,
}

fn write_run_record(command: &str, cfg: &RunConfig, kind: ModelKind, data: &DatasetFile) -> Result<()> {
    let rec = RunRecord {
        command,
        version: env!("CARGO_PKG_VERSION"),
        model: kind,
        seed: cfg.sampler.seed,
        dataset: DatasetInfo {
            path: cfg.data_path()?,
            n: data.data.n(),
            n_missing: data.data.n_missing(),
            true_ate: data.true_ate,
        },
        config: cfg,
    };
    write_atomic(&cfg.output.dir.join(RUN_FILE), to_json(&rec).as_bytes())
}

pub fn fit_command(cfg: &RunConfig) -> Result<Vec<String>> {
    let kind = cfg.validate()?;
    if !cfg.sensitivity.grid_axes().is_empty() {
        return Err(CliError::validation("the configuration contains grids; use the sweep command"));
    }
    let data = load_dataset(cfg)?;
    let model = build_model(kind, &data.data, &cfg.sensitivity, &cfg.model.options).map_err(model_error)?;
    let draws = fit(model.as_ref(), &cfg.sampler).map_err(|e| CliError::Sampling(e.to_string()))?;
    let config_json = cfg.to_json();
    let order = summary_order(&draws, &model.generated_names());
    let rows = summaries(&draws, &order)?;
    let dir = &cfg.output.dir;
    let header = |kind: &str| provenance(kind, &config_json, cfg.sampler.seed);
    write_atomic(&dir.join(SUMMARY_FILE), render_summary(&header("causens summary"), &rows)?.as_bytes())?;
    write_atomic(&dir.join(DRAWS_FILE), render_draws(&header("causens draws"), &draws)?.as_bytes())?;
    let diag = diagnostics(&draws, &rows, cfg.sampler.seed);
    #[derive(Serialize)]
    struct DiagFile<'a> {
        config: &'a RunConfig,
        #[serde(flatten)]
        diagnostics: &'a crate::results::Diagnostics,
    }
    write_atomic(
        &dir.join(DIAGNOSTICS_FILE),
        to_json(&DiagFile {
            config: cfg,
            diagnostics: &diag,
        })
        .as_bytes(),
    )?;
    write_run_record("fit", cfg, kind, &data)?;
    let mut lines = Vec::new();
    if let Some((_, ate)) = rows.iter().find(|(n, _)| n == "ate") {
        lines.push(format!(
            "ATE {} (95% CrI {} to {}), MCSE {}",
            fmt_f64(ate.mean),
            fmt_f64(ate.q025),
            fmt_f64(ate.q975),
            fmt_opt(ate.mcse)
        ));
    }
    lines.push(format!(
        "max R-hat {}, min ESS {}, divergences {}",
        fmt_opt(diag.max_rhat),
        fmt_opt(diag.min_ess),
        diag.total_divergences
    ));
    if kind == ModelKind::TsbMnar && cfg.output.plots {
        let table = read_draws(&dir.join(DRAWS_FILE))?;
        let svg = plot::tsb_regression(&data.data, &table, 30, plot::timestamp(cfg.output.timestamp))?;
        write_atomic(&dir.join(TSB_PLOT), svg.as_bytes())?;
    }
    lines.push(format!("results in {}", dir.display()));
    Ok(lines)
}

pub fn sweep_command(cfg: &RunConfig) -> Result<Vec<String>> {
    let kind = cfg.validate()?;
    let axes = cfg.sensitivity.grid_axes();
    if axes.is_empty() {
        return Err(CliError::validation("no sensitivity parameter has a grid (use --grid NAME=lo:hi:step)"));
    }
    let data = load_dataset(cfg)?;
    // Dataset/model compatibility does not depend on the grid values, so it
    // is checked once before any sampling with each grid at its first value.
    let first: Vec<(String, f64)> = axes.iter().map(|(n, g)| (n.clone(), g[0])).collect();
    let probe = cfg.sensitivity.fixing(&first);
    if let Err(e @ (ModelError::Data(_) | ModelError::Mismatch { .. })) =
        build_model(kind, &data.data, &probe, &cfg.model.options)
    {
        return Err(model_error(e));
    }
    let table = grid_sweep(kind, &data.data, &cfg.sensitivity, &cfg.model.options, &cfg.sampler)
        .map_err(|e| CliError::validation(e.to_string()))?;
    let dir = &cfg.output.dir;
    let header = provenance("causens sweep", &cfg.to_json(), cfg.sampler.seed);
    let path = dir.join(SWEEP_FILE);
    write_atomic(&path, render_sweep(&header, &table)?.as_bytes())?;
    write_run_record("sweep", cfg, kind, &data)?;
    let failed = table.failures();
    let total = table.rows.len();
    if cfg.output.plots && failed < total {
        let stamp = plot::timestamp(cfg.output.timestamp);
        match table.axes.len() {
            1 => write_atomic(
                &dir.join(CURVE_PLOT),
                plot::sweep_curve(&table, cfg.output.threshold, stamp)?.as_bytes(),
            )?,
            2 => write_atomic(
                &dir.join(HEATMAP_PLOT),
                plot::sweep_heatmap(&table, cfg.output.heatmap_bound, cfg.output.threshold, stamp)?.as_bytes(),
            )?,
            _ => {}
        }
    }
    let lines = vec![format!("{total} grid points, {failed} failed; table in {}", path.display())];
    if failed == total {
        return Err(CliError::Sampling(format!("every grid point failed (see {})", path.display())));
    }
    if failed > 0 {
        return Err(CliError::PartialSweep {
            failed,
            total,
            table: path,
        });
    }
    Ok(lines)
}

fn describe_point(axes: &[String], values: &[f64]) -> String {
    axes.iter()
        .zip(values)
        .map(|(a, v)| format!("{a} = {}", fmt_f64(*v)))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn tipping_command(table_path: &Path, bound: Bound, threshold: f64, out: Option<&Path>) -> Result<Vec<String>> {
    let table = read_sweep(table_path)?;
    let report: TippingReport = tipping_point(&table, bound, threshold).map_err(|e| CliError::validation(e.to_string()))?;
    let mut lines: Vec<String> = report.warnings.iter().map(|w| format!("warning: {w}")).collect();
    match &report.result {
        Tipping::Point { point: Some(p) } => lines.push(format!(
            "tipping point: {} (bound {})",
            describe_point(&table.axes, &p.values),
            fmt_f64(p.bound)
        )),
        Tipping::Point { point: None } => lines.push("tipping point: none".into()),
        Tipping::Heatmap { cells } if cells.is_empty() => lines.push("tipping point: none".into()),
        Tipping::Heatmap { cells } => {
            lines.push(format!("{} grid points cross the threshold:", cells.len()));
            lines.extend(
                cells
                    .iter()
                    .map(|c| format!("  {} (bound {})", describe_point(&table.axes, &c.values), fmt_f64(c.bound))),
            );
        }
    }
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => table_path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf),
    };
    #[derive(Serialize)]
    struct TippingFile<'a> {
        table: &'a Path,
        axes: &'a [String],
        #[serde(flatten)]
        report: &'a TippingReport,
    }
    let path = dir.join(TIPPING_FILE);
    write_atomic(
        &path,
        to_json(&TippingFile {
            table: table_path,
            axes: &table.axes,
            report: &report,
        })
        .as_bytes(),
    )?;
    Ok(lines)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Curve,
    Heatmap,
    Tsb,
}

pub struct PlotRequest {
    pub results: PathBuf,
    pub kind: PlotKind,
    pub out: Option<PathBuf>,
    pub bound: Bound,
    pub threshold: f64,
    pub timestamp: bool,
}

pub fn plot_command(req: &PlotRequest) -> Result<Vec<String>> {
    let stamp = plot::timestamp(req.timestamp);
    let (svg, default_dir, name) = match req.kind {
        PlotKind::Curve | PlotKind::Heatmap => {
            let table = read_sweep(&req.results)?;
            let dir = req.results.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
            if req.kind == PlotKind::Curve {
                (plot::sweep_curve(&table, req.threshold, stamp)?, dir, CURVE_PLOT)
            } else {
                (plot::sweep_heatmap(&table, req.bound, req.threshold, stamp)?, dir, HEATMAP_PLOT)
            }
        }
        PlotKind::Tsb => {
            let dir = req.results.clone();
            let run: serde_json::Value = serde_json::from_str(&read_to_string(&dir.join(RUN_FILE))?)
                .map_err(|e| CliError::parse(&dir.join(RUN_FILE), e.line(), e.to_string()))?;
            if run["model"] != "tsb-mnar" {
                return Err(CliError::validation(format!(
                    "{} is not a tsb-mnar fit",
                    dir.display()
                )));
            }
            let data_path = run["dataset"]["path"]
                .as_str()
                .ok_or_else(|| CliError::validation("run.json has no dataset path"))?;
            let data = dataset::read(Path::new(data_path))?;
            let draws = read_draws(&dir.join(DRAWS_FILE))?;
            (plot::tsb_regression(&data.data, &draws, 30, stamp)?, dir, TSB_PLOT)
        }
    };
    let path = match &req.out {
        Some(p) if p.extension().is_some_and(|e| e == "svg") => p.clone(),
        Some(d) => d.join(name),
        None => default_dir.join(name),
    };
    write_atomic(&path, svg.as_bytes())?;
    Ok(vec![format!("wrote {}", path.display())])
}

pub fn diagnostics_command(results: &Path) -> Result<Vec<String>> {
    let path = if results.is_dir() {
        results.join(DRAWS_FILE)
    } else {
        results.to_path_buf()
    };
    let table = read_draws(&path)?;
    let (quantities, max_rhat, min_ess) = diagnostics_from_table(&table)?;
    let draws = table.chains.first().and_then(|c| c.first()).map_or(0, Vec::len);
    let mut lines = vec![
        format!("{} chains x {draws} draws, {} quantities", table.chains.len(), table.names.len()),
        format!(
            "max R-hat {}, min ESS {}, divergences {}",
            fmt_opt(max_rhat),
            fmt_opt(min_ess),
            table.divergences
        ),
    ];
    let flagged: Vec<String> = quantities
        .iter()
        .filter(|q| q.rhat.is_some_and(|r| r > 1.01))
        .map(|q| format!("  {}: R-hat {}, ESS {}", q.name, fmt_opt(q.rhat), fmt_opt(q.ess)))
        .collect();
    if flagged.is_empty() {
        lines.push("all R-hat values are at most 1.01".into());
    } else {
        lines.push(format!("{} quantities with R-hat above 1.01:", flagged.len()));
        lines.extend(flagged);
    }
    Ok(lines)
}
