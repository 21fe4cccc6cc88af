//! Maps between constrained parameters and the unconstrained space the
//! sampler moves in.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::SamplerError;
use crate::autodiff::Var;
use crate::numkit::{expit, log_expit, logit};

/// Support of one scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Constraint {
    Unbounded,
    Lower { at: f64 },
    Upper { at: f64 },
    Interval { lo: f64, hi: f64 },
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Constraint::Unbounded => f.write_str("the real line"),
            Constraint::Lower { at } => write!(f, "({at}, inf)"),
            Constraint::Upper { at } => write!(f, "(-inf, {at})"),
            Constraint::Interval { lo, hi } => write!(f, "({lo}, {hi})"),
        }
    }
}

impl Constraint {
    pub const UNIT: Constraint = Constraint::Interval { lo: 0.0, hi: 1.0 };
    pub const POSITIVE: Constraint = Constraint::Lower { at: 0.0 };

    pub fn validate(&self) -> Result<(), SamplerError> {
        let ok = match *self {
            Constraint::Unbounded => true,
            Constraint::Lower { at } | Constraint::Upper { at } => at.is_finite(),
            Constraint::Interval { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
        };
        if ok {
            Ok(())
        } else {
            Err(SamplerError::Config(format!("invalid constraint {self:?}")))
        }
    }

    /// True when `x` lies strictly inside the support.
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Constraint::Unbounded => x.is_finite(),
            Constraint::Lower { at } => x > at && x.is_finite(),
            Constraint::Upper { at } => x < at && x.is_finite(),
            Constraint::Interval { lo, hi } => x > lo && x < hi,
        }
    }

    /// Inverse transform of a single value.
    pub fn unconstrain(&self, x: f64) -> Result<f64, SamplerError> {
        if !self.contains(x) {
            return Err(SamplerError::Domain(format!("{x} outside {self:?}")));
        }
        Ok(match *self {
            Constraint::Unbounded => x,
            Constraint::Lower { at } => (x - at).ln(),
            Constraint::Upper { at } => (at - x).ln(),
            Constraint::Interval { lo, hi } => logit((x - lo) / (hi - lo)),
        })
    }

    /// Constrained value and log absolute derivative of the forward map at `z`.
    pub fn constrain(&self, z: f64) -> (f64, f64) {
        match *self {
            Constraint::Unbounded => (z, 0.0),
            Constraint::Lower { at } => (at + z.exp(), z),
            Constraint::Upper { at } => (at - z.exp(), z),
            Constraint::Interval { lo, hi } => {
                let w = hi - lo;
                (lo + w * expit(z), w.ln() + log_expit(z) + log_expit(-z))
            }
        }
    }

    /// Differentiable version of [`Constraint::constrain`].
    pub fn constrain_var<'t>(&self, z: Var<'t>) -> (Var<'t>, Var<'t>) {
        let tape = z.tape();
        match *self {
            Constraint::Unbounded => (z, tape.constant(0.0)),
            Constraint::Lower { at } => (z.exp() + at, z),
            Constraint::Upper { at } => (at - z.exp(), z),
            Constraint::Interval { lo, hi } => {
                let w = hi - lo;
                let x = z.expit().affine(w, lo);
                let logjac = z.log_expit() + (-z).log_expit() + w.ln();
                (x, logjac)
            }
        }
    }
}

/// Maps constrained values to unconstrained space, returning the summed log
/// Jacobian of the forward map evaluated at the result.
pub fn to_unconstrained(
    params: &[f64],
    spec: &[Constraint],
) -> Result<(Vec<f64>, f64), SamplerError> {
    if params.len() != spec.len() {
        return Err(SamplerError::Config(format!(
            "{} values for {} constraints",
            params.len(),
            spec.len()
        )));
    }
    let mut z = Vec::with_capacity(params.len());
    let mut logjac = 0.0;
    for (&x, c) in params.iter().zip(spec) {
        let u = c.unconstrain(x)?;
        logjac += c.constrain(u).1;
        z.push(u);
    }
    Ok((z, logjac))
}

/// Forward map: constrained values plus the summed log Jacobian.
pub fn from_unconstrained(z: &[f64], spec: &[Constraint]) -> (Vec<f64>, f64) {
    let mut logjac = 0.0;
    let x = z
        .iter()
        .zip(spec)
        .map(|(&u, c)| {
            let (x, lj) = c.constrain(u);
            logjac += lj;
            x
        })
        .collect();
    (x, logjac)
}
