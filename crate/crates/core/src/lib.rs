//! Bayesian sensitivity analysis for causal effects.
//!
//! The crate samples joint posteriors of five causal models with a built-in
//! gradient-based sampler, turns each posterior draw into an average
//! treatment effect through the g-formula, and sweeps grids of sensitivity
//! parameters to find where inferences tip.
//!
//! Module map:
//! - [`numkit`]: special functions, log densities, quadrature, RNG
//! - [`autodiff`]: reverse-mode gradients of scalar log targets
//! - [`sampler`]: constraint transforms, adaptive HMC, R-hat and ESS
//! - [`models`]: datasets, sensitivity configuration and the five posteriors
//! - [`estimands`]: g-formula evaluators, summaries, sweeps, tipping points
//! - [`synthdata`]: seeded data-generating processes with known effects

// Checks such as `!(x > 0.0)` are negated on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autodiff;
pub mod estimands;
pub mod models;
pub mod numkit;
pub mod sampler;
pub mod synthdata;
