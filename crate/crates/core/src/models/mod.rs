//! The five posterior models.
//!
//! Every model exposes a [`Layout`] of named, constrained parameter blocks,
//! a log target built on an autodiff [`Tape`], and generated quantities
//! computed from one constrained draw (the ATE first). [`Posterior`] adapts
//! a model to the sampler.
//!
//! Coefficient conventions follow each model's own outcome regression:
//! `eta[1]` multiplies the covariate and `eta[2]` the treatment, except in
//! the unmeasured-confounding model where `eta[1]` multiplies the treatment
//! and `eta[2]` the covariate.

mod complete;
mod data;
mod layout;
mod misclass;
mod mnar_binary;
mod sensitivity;
mod stick;
mod tsb;
mod unmeasured;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{Tape, Var};
use crate::estimands::EstimandError;
use crate::numkit::{NumError, SeededRng};
use crate::sampler::{hmc_sample, DrawsMatrix, SamplerConfig, SamplerError};

pub use complete::CompleteModel;
pub use data::Dataset;
pub use layout::{Block, Layout, Params, Posterior, Role};
pub use misclass::MisclassificationModel;
pub use mnar_binary::MnarBinaryModel;
pub use sensitivity::{Resolved, SensitivityConfig, SensitivityEntry};
pub use stick::stick_breaking;
pub use tsb::TsbModel;
pub use unmeasured::UnmeasuredModel;

pub(crate) use data::Pattern;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid dataset: {0}")]
    Data(String),
    #[error("the {model} model cannot use this dataset: {detail}")]
    Mismatch { model: &'static str, detail: String },
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("value out of domain: {0}")]
    Domain(String),
    #[error(transparent)]
    Estimand(#[from] EstimandError),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Complete,
    Misclassification,
    Unmeasured,
    MnarBinary,
    TsbMnar,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Complete,
        ModelKind::Misclassification,
        ModelKind::Unmeasured,
        ModelKind::MnarBinary,
        ModelKind::TsbMnar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Complete => "complete",
            ModelKind::Misclassification => "misclassification",
            ModelKind::Unmeasured => "unmeasured",
            ModelKind::MnarBinary => "mnar-binary",
            ModelKind::TsbMnar => "tsb-mnar",
        }
    }

    pub fn sensitivity_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Complete => &[],
            ModelKind::Misclassification | ModelKind::Unmeasured => &["xi1", "xi2"],
            ModelKind::MnarBinary => &["xi0", "xi1", "xi2", "xi3"],
            ModelKind::TsbMnar => &["xi0", "xi1", "xi3"],
        }
    }

    /// Entry used when the configuration does not mention `name`. Missingness
    /// intercept and treatment terms are identified by the observed
    /// missingness pattern and are sampled; the outcome-dependent terms sit at
    /// their null values.
    pub fn default_sensitivity(self, name: &str) -> SensitivityEntry {
        match (self, name) {
            (ModelKind::Misclassification, "xi1") => SensitivityEntry::Point(0.999),
            (ModelKind::Misclassification, "xi2") => SensitivityEntry::Point(0.001),
            (ModelKind::MnarBinary | ModelKind::TsbMnar, "xi0" | "xi1") => {
                SensitivityEntry::Normal { mean: 0.0, sd: 3.0 }
            }
            _ => SensitivityEntry::Point(0.0),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ModelKind::ALL.iter().map(|k| k.name()).collect();
                ModelError::Config(format!("unknown model {s:?} (expected one of: {})", names.join(", ")))
            })
    }
}

/// Settings that are not sensitivity parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOptions {
    /// Mixture components K of the stick-breaking model.
    pub components: usize,
    /// Fixes the stick-breaking concentration instead of sampling it.
    pub alpha: Option<f64>,
    /// Covariate draws per posterior draw for the mixture g-formula.
    pub n_mc: usize,
    /// Gauss-Hermite order for integrating out the unmeasured confounder.
    pub quadrature_order: usize,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            components: 10,
            alpha: None,
            n_mc: 500,
            quadrature_order: 32,
        }
    }
}

pub trait Model: Send + Sync {
    fn kind(&self) -> ModelKind;

    fn layout(&self) -> &Layout;

    /// Log unnormalized posterior at constrained values. Priors of sampled
    /// sensitivity parameters and Jacobian terms are added by [`Posterior`].
    fn log_target<'t>(&self, tape: &'t Tape, p: &Params<'_, Var<'t>>) -> Var<'t>;

    fn generated_names(&self) -> Vec<String>;

    fn generated(&self, p: &Params<'_, f64>, rng: &mut SeededRng, out: &mut Vec<f64>) -> Result<(), ModelError>;

    /// Adjusts a random unconstrained starting point.
    fn init_hint(&self, _z: &mut [f64]) {}
}

/// Builds a model of `kind`; `sens` must not contain grids.
pub fn build_model(
    kind: ModelKind,
    data: &Dataset,
    sens: &SensitivityConfig,
    options: &ModelOptions,
) -> Result<Box<dyn Model>, ModelError> {
    let resolved = sens.resolve(kind)?;
    Ok(match kind {
        ModelKind::Complete => Box::new(CompleteModel::new(data)?),
        ModelKind::Misclassification => Box::new(MisclassificationModel::new(data, &resolved)?),
        ModelKind::Unmeasured => Box::new(UnmeasuredModel::new(data, &resolved, options)?),
        ModelKind::MnarBinary => Box::new(MnarBinaryModel::new(data, &resolved)?),
        ModelKind::TsbMnar => Box::new(TsbModel::new(data, &resolved, options)?),
    })
}

/// Samples the posterior of `model`.
pub fn fit(model: &dyn Model, config: &SamplerConfig) -> Result<DrawsMatrix, SamplerError> {
    hmc_sample(&Posterior::new(model), config)
}

fn resolved(sens: &[(String, Resolved)], name: &str) -> Resolved {
    sens.iter()
        .find(|(n, _)| n == name)
        .map(|(_, r)| *r)
        .unwrap_or(Resolved::Fixed(0.0))
}

/// `sum_k N(x_k; 0, sd)` appended to `terms`.
fn normal_prior<'t>(tape: &'t Tape, xs: &[Var<'t>], sd: f64, terms: &mut Vec<Var<'t>>) {
    for &x in xs {
        terms.push(tape.normal_lpdf(x, 0.0, sd));
    }
}

/// Bernoulli(theta) likelihood of a binary covariate column given its counts.
fn binary_covariate_terms<'t>(tape: &'t Tape, theta: Var<'t>, ones: usize, zeros: usize, terms: &mut Vec<Var<'t>>) {
    if ones > 0 {
        terms.push(tape.bernoulli_lpmf(1, theta) * ones as f64);
    }
    if zeros > 0 {
        terms.push(tape.bernoulli_lpmf(0, theta) * zeros as f64);
    }
}

fn require_binary(model: &'static str, data: &Dataset) -> Result<(), ModelError> {
    if !data.binary_outcome() {
        return Err(ModelError::Mismatch {
            model,
            detail: "outcomes must be 0 or 1".into(),
        });
    }
    if !data.binary_covariate() {
        return Err(ModelError::Mismatch {
            model,
            detail: "the covariate must be 0 or 1".into(),
        });
    }
    Ok(())
}

fn require_complete(model: &'static str, data: &Dataset) -> Result<(), ModelError> {
    match data.n_missing() {
        0 => Ok(()),
        m => Err(ModelError::Mismatch {
            model,
            detail: format!("{m} outcomes are missing; use mnar-binary or tsb-mnar for incomplete outcomes"),
        }),
    }
}
