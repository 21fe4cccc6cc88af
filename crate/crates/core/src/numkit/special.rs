use super::NumError;

/// `log(sum(exp(values)))` without overflow.
///
/// `-inf` entries are allowed (they contribute nothing); NaN is rejected.
pub fn log_sum_exp(values: &[f64]) -> Result<f64, NumError> {
    if values.is_empty() {
        return Err(NumError::Empty("log_sum_exp"));
    }
    let mut max = f64::NEG_INFINITY;
    for &v in values {
        if v.is_nan() {
            return Err(NumError::domain("log_sum_exp", "NaN entry"));
        }
        if v > max {
            max = v;
        }
    }
    if max.is_infinite() {
        return Ok(max);
    }
    let acc: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    Ok(max + acc.ln())
}

/// Two-argument form used in hot loops.
#[inline]
pub fn log_sum_exp2(a: f64, b: f64) -> f64 {
    let max = a.max(b);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + ((a - max).exp() + (b - max).exp()).ln()
}

/// Logistic function `1 / (1 + exp(-x))`.
#[inline]
pub fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `log(1 + exp(x))`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `log(expit(x))`, accurate in both tails.
#[inline]
pub fn log_expit(x: f64) -> f64 {
    -softplus(-x)
}
