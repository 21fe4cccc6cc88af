//! Log density and mass functions, normalizing constants included.

use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use super::special::log_expit;
use super::NumError;

pub(crate) const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn check_binary(func: &'static str, y: u8) -> Result<(), NumError> {
    if y > 1 {
        return Err(NumError::domain(func, format!("outcome {y} is not 0/1")));
    }
    Ok(())
}

fn check_positive(func: &'static str, name: &str, v: f64) -> Result<(), NumError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(NumError::domain(func, format!("{name} = {v} must be positive")));
    }
    Ok(())
}

pub fn bernoulli_lpmf(y: u8, p: f64) -> Result<f64, NumError> {
    check_binary("bernoulli_lpmf", y)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(NumError::domain(
            "bernoulli_lpmf",
            format!("probability {p} outside [0, 1]"),
        ));
    }
    Ok(if y == 1 { p.ln() } else { (-p).ln_1p() })
}

/// Bernoulli mass with the probability given on the logit scale.
pub fn bernoulli_logit_lpmf(y: u8, eta: f64) -> Result<f64, NumError> {
    check_binary("bernoulli_logit_lpmf", y)?;
    if eta.is_nan() {
        return Err(NumError::domain("bernoulli_logit_lpmf", "NaN logit"));
    }
    Ok(if y == 1 { log_expit(eta) } else { log_expit(-eta) })
}

pub fn normal_lpdf(x: f64, mu: f64, sigma: f64) -> Result<f64, NumError> {
    check_positive("normal_lpdf", "sigma", sigma)?;
    let z = (x - mu) / sigma;
    Ok(-HALF_LN_2PI - sigma.ln() - 0.5 * z * z)
}

pub fn beta_lpdf(x: f64, a: f64, b: f64) -> Result<f64, NumError> {
    check_positive("beta_lpdf", "a", a)?;
    check_positive("beta_lpdf", "b", b)?;
    if !(x > 0.0 && x < 1.0) {
        return Err(NumError::domain("beta_lpdf", format!("x = {x} outside (0, 1)")));
    }
    Ok((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b))
}

/// Gamma density in the shape/rate parameterization.
pub fn gamma_lpdf(x: f64, shape: f64, rate: f64) -> Result<f64, NumError> {
    check_positive("gamma_lpdf", "shape", shape)?;
    check_positive("gamma_lpdf", "rate", rate)?;
    check_positive("gamma_lpdf", "x", x)?;
    Ok(shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x)
}

pub fn half_normal_lpdf(x: f64, scale: f64) -> Result<f64, NumError> {
    check_positive("half_normal_lpdf", "scale", scale)?;
    if !(x >= 0.0) {
        return Err(NumError::domain(
            "half_normal_lpdf",
            format!("x = {x} must be non-negative"),
        ));
    }
    Ok(std::f64::consts::LN_2 + normal_lpdf(x, 0.0, scale)?)
}
