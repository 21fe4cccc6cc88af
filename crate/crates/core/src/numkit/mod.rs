//! Numerical primitives shared by the rest of the crate: stable special
//! functions, log-density kernels, Gauss-Hermite quadrature and a seedable
//! random number generator.
//!
//! Everything here works in log space where a density is involved.

mod density;
mod quadrature;
mod rng;
mod special;

pub(crate) use density::HALF_LN_2PI;
pub use density::{
    bernoulli_logit_lpmf, bernoulli_lpmf, beta_lpdf, gamma_lpdf, half_normal_lpdf, normal_lpdf,
};
pub use quadrature::{gauss_hermite_standard_normal, QuadratureRule, MAX_QUADRATURE_ORDER};
pub use rng::{derive_seed, SeededRng};
pub use special::{expit, log_expit, log_sum_exp, log_sum_exp2, logit, softplus};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("{0}: empty input")]
    Empty(&'static str),
    #[error("{func}: {detail}")]
    Domain { func: &'static str, detail: String },
}

impl NumError {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        NumError::Domain {
            func,
            detail: detail.into(),
        }
    }
}
