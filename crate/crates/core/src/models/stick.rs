//! Truncated stick-breaking weights.

use super::ModelError;
use crate::autodiff::{Tape, Var};

/// `nu_k = V_k prod_{j<k} (1 - V_j)` for k < K and `nu_K = prod_j (1 - V_j)`.
pub fn stick_breaking(v: &[f64]) -> Result<Vec<f64>, ModelError> {
    if let Some(x) = v.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(ModelError::Domain(format!("stick fraction {x} outside (0, 1)")));
    }
    let mut nu = Vec::with_capacity(v.len() + 1);
    let mut rest = 1.0;
    for &x in v {
        nu.push(x * rest);
        rest *= 1.0 - x;
    }
    nu.push(rest);
    Ok(nu)
}

/// Log weights on the tape.
pub(crate) fn log_stick_breaking<'t>(tape: &'t Tape, v: &[Var<'t>]) -> Vec<Var<'t>> {
    let mut out = Vec::with_capacity(v.len() + 1);
    let mut log_rest: Option<Var<'t>> = None;
    for &x in v {
        let lv = x.ln();
        out.push(match log_rest {
            Some(r) => lv + r,
            None => lv,
        });
        let l1m = (-x).ln_1p();
        log_rest = Some(match log_rest {
            Some(r) => r + l1m,
            None => l1m,
        });
    }
    out.push(log_rest.unwrap_or_else(|| tape.constant(0.0)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(stick_breaking(&[0.3]).unwrap(), vec![0.3, 0.7]);
        assert_eq!(stick_breaking(&[0.5, 0.5]).unwrap(), vec![0.5, 0.25, 0.25]);
        assert_eq!(stick_breaking(&[]).unwrap(), vec![1.0]);
        assert!(stick_breaking(&[0.2, 1.0]).is_err());
        assert!(stick_breaking(&[0.0]).is_err());
    }
}
