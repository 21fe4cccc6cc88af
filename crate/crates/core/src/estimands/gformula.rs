//! Standardization of the outcome regression over the covariate
//! distribution, one evaluator per covariate/confounder structure.

use serde::{Deserialize, Serialize};

use super::EstimandError;
use crate::numkit::{bernoulli_logit_lpmf, expit, log_sum_exp, normal_lpdf, QuadratureRule, SeededRng};

/// ATE for a binary covariate with outcome model
/// `expit(eta[0] + eta[1] l + eta[2] a)` and `L ~ Bernoulli(theta)`.
pub fn gformula_binary_l(eta: [f64; 3], theta: f64) -> f64 {
    let arm = |l: f64| expit(eta[0] + eta[1] * l + eta[2]) - expit(eta[0] + eta[1] * l);
    (1.0 - theta) * arm(0.0) + theta * arm(1.0)
}

/// ATE with a standard normal unmeasured confounder integrated out by `rule`.
/// Here `eta[1]` multiplies the treatment and `eta[2]` the covariate.
pub fn gformula_with_u(eta: [f64; 3], xi1: f64, theta: f64, rule: &QuadratureRule) -> f64 {
    let arm = |l: f64| {
        rule.expectation(|u| {
            let base = eta[0] + eta[2] * l + xi1 * u;
            expit(base + eta[1]) - expit(base)
        })
    };
    (1.0 - theta) * arm(0.0) + theta * arm(1.0)
}

/// One component of the covariate/treatment/outcome mixture:
/// `Y | a, l ~ N(eta0 + eta1 l + eta2 a, sigma)`,
/// `A | l ~ Bernoulli(expit(gamma0 + gamma1 l))`, `L ~ N(theta0, phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub eta: [f64; 3],
    pub sigma: f64,
    pub gamma: [f64; 2],
    pub theta0: f64,
    pub phi: f64,
}

impl MixtureComponent {
    fn log_weight_terms(&self, a: u8, l: f64) -> f64 {
        let t = bernoulli_logit_lpmf(a, self.gamma[0] + self.gamma[1] * l).unwrap_or(f64::NEG_INFINITY);
        t + normal_lpdf(l, self.theta0, self.phi).unwrap_or(f64::NEG_INFINITY)
    }
}

/// Induced regression `E[Y | a, l]` of the mixture with weights `nu`.
pub fn mixture_conditional_mean(components: &[MixtureComponent], nu: &[f64], a: u8, l: f64) -> f64 {
    let logw: Vec<f64> = components
        .iter()
        .zip(nu)
        .map(|(c, &v)| v.ln() + c.log_weight_terms(a, l))
        .collect();
    let Ok(norm) = log_sum_exp(&logw) else {
        return f64::NAN;
    };
    if !norm.is_finite() {
        return f64::NAN;
    }
    components
        .iter()
        .zip(&logw)
        .map(|(c, lw)| (lw - norm).exp() * (c.eta[0] + c.eta[1] * l + c.eta[2] * f64::from(a)))
        .sum()
}

/// Difference of the induced regressions at `l`.
pub fn mixture_effect_at(components: &[MixtureComponent], nu: &[f64], l: f64) -> f64 {
    mixture_conditional_mean(components, nu, 1, l) - mixture_conditional_mean(components, nu, 0, l)
}

fn check_mixture(components: &[MixtureComponent], nu: &[f64]) -> Result<(), EstimandError> {
    if components.is_empty() || components.len() != nu.len() {
        return Err(EstimandError::Domain(format!(
            "{} components with {} weights",
            components.len(),
            nu.len()
        )));
    }
    if nu.iter().any(|&v| !(v > 0.0)) || (nu.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(EstimandError::Domain("mixture weights must lie in the open simplex".into()));
    }
    if components.iter().any(|c| !(c.sigma > 0.0 && c.phi > 0.0)) {
        return Err(EstimandError::Domain("component scales must be positive".into()));
    }
    Ok(())
}

/// Monte Carlo estimate and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// ATE of the mixture model, averaging the induced-regression contrast over
/// `n_mc` covariate draws from the mixture marginal of `L`.
pub fn gformula_tsb_estimate(
    components: &[MixtureComponent],
    nu: &[f64],
    n_mc: usize,
    rng: &mut SeededRng,
) -> Result<McEstimate, EstimandError> {
    check_mixture(components, nu)?;
    if n_mc == 0 {
        return Err(EstimandError::Domain("n_mc must be positive".into()));
    }
    if components.len() == 1 {
        return Ok(McEstimate {
            value: components[0].eta[2],
            std_error: 0.0,
        });
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..n_mc {
        let c = &components[rng.categorical(nu)];
        let l = rng.normal(c.theta0, c.phi);
        let d = mixture_effect_at(components, nu, l);
        let delta = d - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (d - mean);
    }
    let var = if n_mc > 1 { m2 / (n_mc - 1) as f64 } else { 0.0 };
    Ok(McEstimate {
        value: mean,
        std_error: (var / n_mc as f64).sqrt(),
    })
}

pub fn gformula_tsb(
    components: &[MixtureComponent],
    nu: &[f64],
    n_mc: usize,
    rng: &mut SeededRng,
) -> Result<f64, EstimandError> {
    gformula_tsb_estimate(components, nu, n_mc, rng).map(|e| e.value)
}
