//! Run configuration: a JSON file with sections `model`, `data`,
//! `sensitivity`, `sampler` and `output`, overridden by command-line flags.

use std::path::{Path, PathBuf};

use causens_core::estimands::Bound;
use causens_core::models::{ModelKind, ModelOptions, SensitivityConfig, SensitivityEntry};
use causens_core::sampler::SamplerConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io::read_to_string;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub name: Option<ModelKind>,
    pub options: ModelOptions,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Emit SVG plots alongside tables.
    pub plots: bool,
    /// Stamp SVGs with the creation time.
    pub timestamp: bool,
    /// CrI bound shown by sweep heatmaps.
    pub heatmap_bound: Bound,
    /// Reference line drawn on sweep plots.
    pub threshold: f64,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
            plots: true,
            timestamp: true,
            heatmap_bound: Bound::Upper,
            threshold: 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub data: DataSection,
    pub sensitivity: SensitivityConfig,
    pub sampler: SamplerConfig,
    pub output: OutputSection,
}

/// Flag values that override the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<ModelKind>,
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub chains: Option<usize>,
    pub iter: Option<usize>,
    pub warmup: Option<usize>,
    pub components: Option<usize>,
    pub alpha: Option<f64>,
    pub set: Vec<String>,
    pub grid: Vec<String>,
    pub prior: Vec<String>,
    pub no_plots: bool,
    pub no_timestamp: bool,
}

impl RunConfig {
    /// Reads a configuration file. A relative data path is taken relative
    /// to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e.line(), e.to_string()))?;
        if let (Some(p), Some(dir)) = (&cfg.data.path, path.parent()) {
            if p.is_relative() {
                cfg.data.path = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn from_sources(config: Option<&Path>, o: &Overrides) -> Result<Self> {
        let mut cfg = match config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply(o)?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(m) = o.model {
            self.model.name = Some(m);
        }
        if let Some(p) = &o.data {
            self.data.path = Some(p.clone());
        }
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
        let s = &mut self.sampler;
        s.seed = o.seed.unwrap_or(s.seed);
        s.chains = o.chains.unwrap_or(s.chains);
        s.samples = o.iter.unwrap_or(s.samples);
        s.warmup = o.warmup.unwrap_or(s.warmup);
        if let Some(k) = o.components {
            self.model.options.components = k;
        }
        if o.alpha.is_some() {
            self.model.options.alpha = o.alpha;
        }
        for item in &o.set {
            let (name, v) = split_assignment(item, "--set")?;
            let v = parse_number(v, item)?;
            self.sensitivity.set(name, SensitivityEntry::Point(v));
        }
        for item in &o.grid {
            let (name, v) = split_assignment(item, "--grid")?;
            self.sensitivity.set(name, SensitivityEntry::Grid(parse_grid(v)?));
        }
        for item in &o.prior {
            let (name, v) = split_assignment(item, "--prior")?;
            self.sensitivity.set(name, parse_prior(v)?);
        }
        if o.no_plots {
            self.output.plots = false;
        }
        if o.no_timestamp {
            self.output.timestamp = false;
        }
        Ok(())
    }

    pub fn model_kind(&self) -> Result<ModelKind> {
        self.model
            .name
            .ok_or_else(|| CliError::validation("no model given (set model.name or pass --model)"))
    }

    pub fn data_path(&self) -> Result<&Path> {
        self.data
            .path
            .as_deref()
            .ok_or_else(|| CliError::validation("no dataset given (set data.path or pass --data)"))
    }

    /// Checks everything that can be checked before reading data.
    pub fn validate(&self) -> Result<ModelKind> {
        let kind = self.model_kind()?;
        self.data_path()?;
        self.sensitivity
            .validate_for(kind)
            .map_err(|e| CliError::validation(e.to_string()))?;
        self.sampler.validate().map_err(|e| CliError::validation(e.to_string()))?;
        if !self.output.threshold.is_finite() {
            return Err(CliError::validation("output.threshold must be finite"));
        }
        Ok(kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }
}

fn split_assignment<'a>(item: &'a str, flag: &str) -> Result<(&'a str, &'a str)> {
    item.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .filter(|(k, v)| !k.is_empty() && !v.is_empty())
        .ok_or_else(|| CliError::validation(format!("{flag} expects NAME=VALUE, got {item:?}")))
}

fn parse_number(s: &str, context: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::validation(format!("{s:?} is not a finite number (in {context:?})")))
}

/// `lo:hi:step` (inclusive) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, hi, step] => {
            let (lo, hi, step) = (parse_number(lo, s)?, parse_number(hi, s)?, parse_number(step, s)?);
            if step <= 0.0 || hi < lo {
                return Err(CliError::validation(format!("grid {s:?} needs lo <= hi and a positive step")));
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            if count > 10_000 {
                return Err(CliError::validation(format!("grid {s:?} has {count} points")));
            }
            // Rounded so that 0:1:0.1 yields 0.3 rather than 0.30000000000000004.
            Ok((0..count)
                .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        [_] => s.split(',').map(|v| parse_number(v, s)).collect(),
        _ => Err(CliError::validation(format!("grid {s:?} is neither lo:hi:step nor a list"))),
    }
}

/// `normal(mean,sd)` or `point(value)`.
pub fn parse_prior(s: &str) -> Result<SensitivityEntry> {
    let bad = || CliError::validation(format!("prior {s:?} is not normal(mean,sd) or point(value)"));
    let (head, rest) = s.split_once('(').ok_or_else(bad)?;
    let args = rest.strip_suffix(')').ok_or_else(bad)?;
    let nums: Vec<f64> = args.split(',').map(|v| parse_number(v, s)).collect::<Result<_>>()?;
    match (head.trim(), nums.as_slice()) {
        ("normal", [mean, sd]) => Ok(SensitivityEntry::Normal { mean: *mean, sd: *sd }),
        ("point", [v]) => Ok(SensitivityEntry::Point(*v)),
        _ => Err(bad()),
    }
}
