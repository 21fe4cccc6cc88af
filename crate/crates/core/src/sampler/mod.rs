//! Adaptive Hamiltonian Monte Carlo over an unconstrained parameter vector.
//!
//! A target implements [`LogDensity`]. [`hmc_sample`] runs independent
//! chains in parallel on the current rayon pool; each chain owns its state
//! and a generator seeded from `derive_seed(config.seed, chain)`, so the
//! result does not depend on the number of worker threads.

mod adapt;
pub mod diagnostics;
mod hmc;
pub mod transform;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::AdError;
use crate::numkit::SeededRng;

pub use diagnostics::{effective_sample_size, split_rhat};
pub use hmc::hmc_sample;
pub use transform::{from_unconstrained, to_unconstrained, Constraint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("invalid sampler configuration: {0}")]
    Config(String),
    #[error("constraint violated: {0}")]
    Domain(String),
    #[error("chain {chain}: no finite log density after {attempts} initializations (last error: {detail})")]
    Initialization {
        chain: usize,
        attempts: usize,
        detail: String,
    },
    #[error("chain {chain}: generated quantities failed: {detail}")]
    Quantities { chain: usize, detail: String },
}

/// A differentiable log density on R^dim.
pub trait LogDensity: Sync {
    fn dim(&self) -> usize;

    /// Writes the gradient into `grad` and returns the log density.
    fn log_density_grad(&self, x: &[f64], grad: &mut [f64]) -> Result<f64, AdError>;

    /// Adjusts a uniform(-2, 2) starting point before it is evaluated.
    fn init_hint(&self, _x: &mut [f64]) {}

    fn quantity_names(&self) -> Vec<String> {
        (0..self.dim()).map(|i| format!("x[{i}]")).collect()
    }

    /// Appends the tracked quantities for the draw `x` to `out`.
    fn quantities(&self, x: &[f64], _rng: &mut SeededRng, out: &mut Vec<f64>) -> Result<(), String> {
        out.extend_from_slice(x);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub chains: usize,
    pub warmup: usize,
    pub samples: usize,
    pub target_accept: f64,
    pub max_leapfrog_steps: usize,
    pub seed: u64,
    /// Trajectory length in metric-scaled units; the step count per
    /// iteration is drawn uniformly from 1..=ceil(integration_time / step).
    pub integration_time: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            chains: 4,
            warmup: 1000,
            samples: 1000,
            target_accept: 0.8,
            max_leapfrog_steps: 1024,
            seed: 1,
            integration_time: std::f64::consts::PI,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        let bad = |m: &str| Err(SamplerError::Config(m.to_string()));
        if self.chains == 0 {
            return bad("chains must be positive");
        }
        if self.samples == 0 {
            return bad("sampling iterations must be positive");
        }
        if self.warmup == 0 {
            return bad("warmup iterations must be positive");
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return bad("target acceptance must lie in (0, 1)");
        }
        if self.max_leapfrog_steps == 0 {
            return bad("max leapfrog steps must be positive");
        }
        if !(self.integration_time > 0.0 && self.integration_time.is_finite()) {
            return bad("integration time must be positive");
        }
        Ok(())
    }
}

/// Post-warmup output of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDraws {
    /// Row-major: one row of quantities per iteration.
    pub values: Vec<f64>,
    pub divergent: Vec<bool>,
    pub accept_stat: Vec<f64>,
    pub leapfrog_steps: Vec<u32>,
    pub step_size: f64,
    pub inv_metric: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrawsMatrix {
    pub names: Vec<String>,
    pub warmup: usize,
    pub chains: Vec<ChainDraws>,
}

impl DrawsMatrix {
    pub fn n_quantities(&self) -> usize {
        self.names.len()
    }

    pub fn samples_per_chain(&self) -> usize {
        self.chains.first().map_or(0, |c| c.divergent.len())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Per-chain draws of quantity `q`.
    pub fn column(&self, q: usize) -> Vec<Vec<f64>> {
        let k = self.n_quantities();
        self.chains
            .iter()
            .map(|c| c.values.iter().skip(q).step_by(k).copied().collect())
            .collect()
    }

    pub fn quantity(&self, name: &str) -> Option<Vec<Vec<f64>>> {
        self.index_of(name).map(|q| self.column(q))
    }

    /// All chains of quantity `q` concatenated.
    pub fn pooled(&self, q: usize) -> Vec<f64> {
        self.column(q).concat()
    }

    pub fn divergences(&self) -> usize {
        self.chains
            .iter()
            .map(|c| c.divergent.iter().filter(|&&d| d).count())
            .sum()
    }
}
