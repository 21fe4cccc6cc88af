//! Causal estimands computed from posterior draws, posterior summaries,
//! sensitivity sweeps and tipping-point detection.

pub mod gformula;
pub mod summary;
pub mod sweep;
pub mod tipping;

use thiserror::Error;

pub use gformula::{
    gformula_binary_l, gformula_tsb, gformula_tsb_estimate, gformula_with_u,
    mixture_conditional_mean, mixture_effect_at, McEstimate, MixtureComponent,
};
pub use summary::{quantile_mcse, quantile_sorted, summarize, EstimandSummary};
pub use sweep::{fit_point, grid_sweep, point_seed, point_stats, sweep_points, PointStats, SweepRow, SweepTable};
pub use tipping::{tipping_point, Bound, GridPoint, Tipping, TippingReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimandError {
    #[error("no draws to summarize")]
    Empty,
    #[error("{0}")]
    Domain(String),
    #[error("invalid sweep configuration: {0}")]
    Config(String),
}
