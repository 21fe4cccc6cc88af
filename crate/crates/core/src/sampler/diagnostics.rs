//! Split-chain convergence diagnostics.
//!
//! Both functions take one slice per chain. Each chain is split in half
//! (dropping the middle draw when the length is odd), so a single chain is
//! accepted and compared against itself. `None` is the undefined marker for
//! zero or non-finite variance.

use super::SamplerError;

fn split(chains: &[&[f64]]) -> Result<Vec<Vec<f64>>, SamplerError> {
    let Some(first) = chains.first() else {
        return Err(SamplerError::Config("no chains".into()));
    };
    let n = first.len();
    if chains.iter().any(|c| c.len() != n) {
        return Err(SamplerError::Config("chains differ in length".into()));
    }
    if n < 4 {
        return Err(SamplerError::Config(format!("{n} draws per chain, need at least 4")));
    }
    let half = n / 2;
    let mut out = Vec::with_capacity(2 * chains.len());
    for c in chains {
        out.push(c[..half].to_vec());
        out.push(c[n - half..].to_vec());
    }
    Ok(out)
}

struct Moments {
    means: Vec<f64>,
    within: f64,
    between_over_n: f64,
}

fn moments(chains: &[Vec<f64>]) -> Moments {
    let n = chains[0].len() as f64;
    let means: Vec<f64> = chains.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    let within = chains
        .iter()
        .zip(&means)
        .map(|(c, m)| c.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
        .sum::<f64>()
        / chains.len() as f64;
    let grand = means.iter().sum::<f64>() / means.len() as f64;
    let between_over_n = if means.len() > 1 {
        means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (means.len() as f64 - 1.0)
    } else {
        0.0
    };
    Moments {
        means,
        within,
        between_over_n,
    }
}

/// Split potential scale reduction, `sqrt((W + B/n) / W)`.
pub fn split_rhat(chains: &[&[f64]]) -> Result<Option<f64>, SamplerError> {
    let parts = split(chains)?;
    let m = moments(&parts);
    if !(m.within > 0.0) || !m.within.is_finite() || !m.between_over_n.is_finite() {
        return Ok(None);
    }
    Ok(Some(((m.within + m.between_over_n) / m.within).sqrt()))
}

/// Effective sample size from split chains using Geyer's initial monotone
/// positive sequence, capped at 1.5 times the total number of draws.
pub fn effective_sample_size(chains: &[&[f64]]) -> Result<Option<f64>, SamplerError> {
    let parts = split(chains)?;
    let m = moments(&parts);
    let n = parts[0].len();
    let nf = n as f64;
    let var_plus = m.within * (nf - 1.0) / nf + m.between_over_n;
    if !(var_plus > 0.0) || !var_plus.is_finite() || !(m.within > 0.0) {
        return Ok(None);
    }
    let centered: Vec<Vec<f64>> = parts
        .iter()
        .zip(&m.means)
        .map(|(c, mu)| c.iter().map(|x| x - mu).collect())
        .collect();
    let rho = |lag: usize| -> f64 {
        let mean_acov = centered
            .iter()
            .map(|c| c[..n - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum::<f64>() / nf)
            .sum::<f64>()
            / centered.len() as f64;
        1.0 - (m.within - mean_acov) / var_plus
    };
    let mut tau = -1.0;
    let mut prev_pair = f64::INFINITY;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = rho(lag) + rho(lag + 1);
        if pair < 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        lag += 2;
    }
    let total = (parts.len() * n) as f64;
    let ess = total / tau.max(1.0 / 1.5);
    Ok(Some(ess.min(1.5 * total)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::SeededRng;

    fn normals(seed: u64, n: usize) -> Vec<f64> {
        let mut r = SeededRng::new(seed);
        (0..n).map(|_| r.standard_normal()).collect()
    }

    #[test]
    fn rhat_iid_is_near_one() {
        let a = normals(1, 1000);
        let b = normals(2, 1000);
        let r = split_rhat(&[&a, &b]).unwrap().unwrap();
        assert!(r > 0.99 && r < 1.01, "{r}");
    }

    #[test]
    fn rhat_separated_means() {
        let a = normals(1, 1000);
        let b: Vec<f64> = normals(2, 1000).iter().map(|x| x + 10.0).collect();
        assert!(split_rhat(&[&a, &b]).unwrap().unwrap() > 3.0);
    }

    #[test]
    fn rhat_is_exactly_one_for_identical_halves() {
        let half = [0.3, -1.0, 2.0, 0.5];
        let chain: Vec<f64> = half.iter().chain(&half).copied().collect();
        assert_eq!(split_rhat(&[&chain, &chain]).unwrap(), Some(1.0));
    }

    #[test]
    fn constant_chains_are_undefined() {
        let c = vec![2.5; 100];
        assert_eq!(split_rhat(&[&c, &c]).unwrap(), None);
        assert_eq!(effective_sample_size(&[&c, &c]).unwrap(), None);
    }

    #[test]
    fn shape_errors() {
        let a = vec![1.0, 2.0, 3.0];
        assert!(split_rhat(&[&a, &a]).is_err());
        let b = vec![1.0; 10];
        let c = vec![1.0; 11];
        assert!(effective_sample_size(&[&b, &c]).is_err());
        assert!(split_rhat(&[]).is_err());
    }

    #[test]
    fn ess_iid() {
        let chains: Vec<Vec<f64>> = (0..4).map(|s| normals(10 + s, 1000)).collect();
        let refs: Vec<&[f64]> = chains.iter().map(|c| c.as_slice()).collect();
        let e = effective_sample_size(&refs).unwrap().unwrap();
        assert!((3000.0..=4400.0).contains(&e), "{e}");
    }

    #[test]
    fn ess_ar1() {
        let rho: f64 = 0.9;
        let mut r = SeededRng::new(5);
        let chains: Vec<Vec<f64>> = (0..4)
            .map(|_| {
                let mut x = r.standard_normal();
                (0..1000)
                    .map(|_| {
                        x = rho * x + (1.0 - rho * rho).sqrt() * r.standard_normal();
                        x
                    })
                    .collect()
            })
            .collect();
        let refs: Vec<&[f64]> = chains.iter().map(|c| c.as_slice()).collect();
        let e = effective_sample_size(&refs).unwrap().unwrap();
        let expected = 4000.0 * (1.0 - rho) / (1.0 + rho);
        assert!(e > expected / 1.5 && e < expected * 1.5, "{e} vs {expected}");
    }

    #[test]
    fn ess_never_exceeds_cap() {
        // Perfectly anticorrelated draws push the raw estimate far above N.
        let c: Vec<f64> = (0..400).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let d: Vec<f64> = c.iter().map(|x| x + 0.01).collect();
        let e = effective_sample_size(&[&c, &d]).unwrap().unwrap();
        assert!(e <= 1.5 * 800.0 + 1e-9);
    }
}
