use statrs::function::gamma::digamma;

use super::AdError;
use crate::numkit::expit;

/// The primitive recorded at a tape node. Data that is not differentiated
/// (observed outcomes, affine constants) travels inside the kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpKind {
    Input,
    Constant,
    Add,
    Sub,
    Mul,
    Div,
    /// `scale * x + offset`
    Affine { scale: f64, offset: f64 },
    Recip,
    Exp,
    Log,
    Log1p,
    Expit,
    LogExpit,
    Square,
    Sum,
    LogSumExp,
    /// inputs `[p]`
    BernoulliLpmf { y: u8 },
    /// inputs `[eta]`, probability `expit(eta)`
    BernoulliLogitLpmf { y: u8 },
    /// inputs `[x, mu, sigma]`
    NormalLpdf,
    /// inputs `[x, a, b]`
    BetaLpdf,
    /// inputs `[x, shape, rate]`
    GammaLpdf,
    /// inputs `[x, scale]`
    HalfNormalLpdf,
    /// Model-specific composite whose partials are computed by the caller.
    Fused { name: &'static str },
}

impl OpKind {
    pub(crate) fn arity(&self) -> Option<usize> {
        use OpKind::*;
        match self {
            Input | Constant => Some(0),
            Affine { .. } | Recip | Exp | Log | Log1p | Expit | LogExpit | Square => Some(1),
            BernoulliLpmf { .. } | BernoulliLogitLpmf { .. } => Some(1),
            Add | Sub | Mul | Div | HalfNormalLpdf => Some(2),
            NormalLpdf | BetaLpdf | GammaLpdf => Some(3),
            Sum | LogSumExp | Fused { .. } => None,
        }
    }
}

/// Exact partial derivatives of a primitive with respect to each input.
pub fn local_partials(kind: OpKind, inputs: &[f64]) -> Result<Vec<f64>, AdError> {
    match kind.arity() {
        Some(k) if k != inputs.len() => {
            return Err(AdError::Internal(format!(
                "{kind:?} expects {k} inputs, got {}",
                inputs.len()
            )))
        }
        _ => {}
    }
    match kind {
        OpKind::Fused { name } => Err(AdError::Internal(format!(
            "{name} is a fused node; its partials are recorded on the tape"
        ))),
        OpKind::Sum => Ok(vec![1.0; inputs.len()]),
        OpKind::LogSumExp => {
            if inputs.is_empty() {
                return Err(AdError::Internal("log_sum_exp of no terms".into()));
            }
            let max = inputs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut w: Vec<f64> = inputs.iter().map(|&v| (v - max).exp()).collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
            Ok(w)
        }
        _ => {
            let mut out = [0.0; 3];
            fixed_partials(kind, inputs, &mut out);
            Ok(out[..inputs.len()].to_vec())
        }
    }
}

/// Partials for fixed-arity kinds, written into `out[..arity]`.
#[inline]
pub(crate) fn fixed_partials(kind: OpKind, x: &[f64], out: &mut [f64; 3]) {
    use OpKind::*;
    match kind {
        Input | Constant | Sum | LogSumExp | Fused { .. } => {}
        Add => {
            out[0] = 1.0;
            out[1] = 1.0;
        }
        Sub => {
            out[0] = 1.0;
            out[1] = -1.0;
        }
        Mul => {
            out[0] = x[1];
            out[1] = x[0];
        }
        Div => {
            out[0] = 1.0 / x[1];
            out[1] = -x[0] / (x[1] * x[1]);
        }
        Affine { scale, .. } => out[0] = scale,
        Recip => out[0] = -1.0 / (x[0] * x[0]),
        Exp => out[0] = x[0].exp(),
        Log => out[0] = 1.0 / x[0],
        Log1p => out[0] = 1.0 / (1.0 + x[0]),
        Expit => {
            let s = expit(x[0]);
            out[0] = s * (1.0 - s);
        }
        LogExpit => out[0] = expit(-x[0]),
        Square => out[0] = 2.0 * x[0],
        BernoulliLpmf { y } => {
            out[0] = if y == 1 { 1.0 / x[0] } else { -1.0 / (1.0 - x[0]) };
        }
        BernoulliLogitLpmf { y } => out[0] = f64::from(y) - expit(x[0]),
        NormalLpdf => {
            let sigma = x[2];
            let z = (x[0] - x[1]) / sigma;
            out[0] = -z / sigma;
            out[1] = z / sigma;
            out[2] = (z * z - 1.0) / sigma;
        }
        BetaLpdf => {
            let (v, a, b) = (x[0], x[1], x[2]);
            let ab = digamma(a + b);
            out[0] = (a - 1.0) / v - (b - 1.0) / (1.0 - v);
            out[1] = v.ln() - digamma(a) + ab;
            out[2] = (-v).ln_1p() - digamma(b) + ab;
        }
        GammaLpdf => {
            let (v, shape, rate) = (x[0], x[1], x[2]);
            out[0] = (shape - 1.0) / v - rate;
            out[1] = rate.ln() - digamma(shape) + v.ln();
            out[2] = shape / rate - v;
        }
        HalfNormalLpdf => {
            let z = x[0] / x[1];
            out[0] = -z / x[1];
            out[1] = (z * z - 1.0) / x[1];
        }
    }
}
