//! Posterior summaries of a tracked quantity.

use serde::{Deserialize, Serialize};

use super::EstimandError;
use crate::sampler::{effective_sample_size, split_rhat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimandSummary {
    pub mean: f64,
    pub sd: f64,
    /// `sd / sqrt(ess)`; undefined with the ESS.
    pub mcse: Option<f64>,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
    pub ess: Option<f64>,
    pub rhat: Option<f64>,
}

/// Type-7 quantile (linear interpolation between order statistics) of a
/// sorted, nonempty slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted_copy(chains: &[Vec<f64>]) -> Vec<f64> {
    let mut all = chains.concat();
    all.sort_by(f64::total_cmp);
    all
}

fn chain_refs(chains: &[Vec<f64>]) -> Vec<&[f64]> {
    chains.iter().map(|c| c.as_slice()).collect()
}

/// Summarizes per-chain draws. ESS and R-hat are left undefined when the
/// chains are too short or have zero variance.
pub fn summarize(chains: &[Vec<f64>]) -> Result<EstimandSummary, EstimandError> {
    let sorted = sorted_copy(chains);
    if sorted.is_empty() {
        return Err(EstimandError::Empty);
    }
    if sorted.iter().any(|x| x.is_nan()) {
        return Err(EstimandError::Domain("draws contain NaN".into()));
    }
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let sd = if sorted.len() > 1 {
        (sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let refs = chain_refs(chains);
    let ess = effective_sample_size(&refs).ok().flatten();
    let rhat = split_rhat(&refs).ok().flatten();
    Ok(EstimandSummary {
        mean,
        sd,
        mcse: ess.map(|e| sd / e.sqrt()),
        q025: quantile_sorted(&sorted, 0.025),
        q50: quantile_sorted(&sorted, 0.5),
        q975: quantile_sorted(&sorted, 0.975),
        ess,
        rhat,
    })
}

/// Monte Carlo standard error of the `p` quantile, from the effective sample
/// size of the indicator `x <= q_p`: half the distance between the quantiles
/// at `p -/+ sqrt(p (1 - p) / ess)`.
pub fn quantile_mcse(chains: &[Vec<f64>], p: f64) -> Option<f64> {
    let sorted = sorted_copy(chains);
    if sorted.is_empty() || !(0.0..=1.0).contains(&p) {
        return None;
    }
    let q = quantile_sorted(&sorted, p);
    let indicators: Vec<Vec<f64>> = chains
        .iter()
        .map(|c| c.iter().map(|&x| if x <= q { 1.0 } else { 0.0 }).collect())
        .collect();
    let ess = effective_sample_size(&chain_refs(&indicators)).ok().flatten()?;
    let half = (p * (1.0 - p) / ess).sqrt();
    let lo = quantile_sorted(&sorted, p - half);
    let hi = quantile_sorted(&sorted, p + half);
    Some((hi - lo) / 2.0)
}
