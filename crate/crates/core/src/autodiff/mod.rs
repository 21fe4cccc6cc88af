//! Reverse-mode automatic differentiation over scalar expression graphs.
//!
//! A [`Tape`] records every primitive as a node holding its value, its
//! parents and the local partial derivatives with respect to them. Parents
//! always precede children, so the backward sweep is a single reverse pass.
//!
//! ```
//! use causens_core::autodiff::grad;
//!
//! let (value, g) = grad(|_, x| x[0] * x[1], &[2.0, 3.0]).unwrap();
//! assert_eq!(value, 6.0);
//! assert_eq!(g, vec![3.0, 2.0]);
//! ```
//!
//! Domain violations (log of a negative number, a non-positive scale in a
//! density) do not panic: the tape remembers the first offending node and
//! [`Tape::gradient`] reports it as [`AdError::Domain`].

mod ops;
mod partials;
mod tape;

pub use partials::{local_partials, OpKind};
pub use ops::Operand;
pub use tape::{Gradient, Tape, Var};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdError {
    #[error("domain error at node {node} ({op:?}): {detail}")]
    Domain {
        node: usize,
        op: OpKind,
        detail: String,
    },
    #[error("internal autodiff error: {0}")]
    Internal(String),
}

/// Value and gradient of `f` at `at`.
///
/// `f` receives the tape and one input variable per coordinate of `at`.
pub fn grad<F>(f: F, at: &[f64]) -> Result<(f64, Vec<f64>), AdError>
where
    F: for<'t> FnOnce(&'t Tape, &[Var<'t>]) -> Var<'t>,
{
    let tape = Tape::new();
    let inputs: Vec<Var<'_>> = at.iter().map(|&v| tape.input(v)).collect();
    let out = f(&tape, &inputs);
    let g = tape.gradient(out)?;
    Ok((out.value(), inputs.iter().map(|v| g.wrt(*v)).collect()))
}

#[cfg(test)]
mod tests;
