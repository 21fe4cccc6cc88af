//! Sensitivity grid sweeps: one full posterior fit per grid point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{summarize, EstimandError};
use crate::models::{build_model, fit, Dataset, ModelKind, ModelOptions, SensitivityConfig};
use crate::numkit::derive_seed;
use crate::sampler::{DrawsMatrix, SamplerConfig};

/// Posterior summary of the ATE at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub mean: f64,
    pub sd: f64,
    pub mcse: Option<f64>,
    pub q025: f64,
    pub q975: f64,
    /// Largest R-hat over all tracked quantities.
    pub max_rhat: Option<f64>,
    /// Smallest ESS over all tracked quantities.
    pub min_ess: Option<f64>,
    pub divergences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    /// Values of the swept parameters, in axis order.
    pub values: Vec<f64>,
    /// Summary, or the error message of a failed fit.
    pub outcome: Result<PointStats, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axes: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }
}

/// Cartesian product of the grid axes, first axis varying slowest.
pub fn sweep_points(axes: &[(String, Vec<f64>)]) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for (_, grid) in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                grid.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

/// Sampler seed used for grid point `index`.
pub fn point_seed(base: u64, index: usize) -> u64 {
    derive_seed(base, index as u64)
}

/// Fits one grid point exactly as [`grid_sweep`] does.
pub fn fit_point(
    kind: ModelKind,
    data: &Dataset,
    sens: &SensitivityConfig,
    options: &ModelOptions,
    sampler: &SamplerConfig,
    index: usize,
) -> Result<DrawsMatrix, String> {
    let axes = sens.grid_axes();
    let points = sweep_points(&axes);
    let values = points
        .get(index)
        .ok_or_else(|| format!("grid has {} points, no index {index}", points.len()))?;
    let fixed: Vec<(String, f64)> = axes.iter().map(|(n, _)| n.clone()).zip(values.iter().copied()).collect();
    let model = build_model(kind, data, &sens.fixing(&fixed), options).map_err(|e| e.to_string())?;
    let config = SamplerConfig {
        seed: point_seed(sampler.seed, index),
        ..sampler.clone()
    };
    fit(model.as_ref(), &config).map_err(|e| e.to_string())
}

/// Summarizes the ATE and convergence diagnostics of a fit.
pub fn point_stats(draws: &DrawsMatrix) -> Result<PointStats, EstimandError> {
    let ate = draws
        .index_of("ate")
        .ok_or_else(|| EstimandError::Domain("draws have no ate column".into()))?;
    let s = summarize(&draws.column(ate))?;
    let mut max_rhat: Option<f64> = None;
    let mut min_ess: Option<f64> = None;
    for q in 0..draws.n_quantities() {
        let qs = summarize(&draws.column(q))?;
        if let Some(r) = qs.rhat {
            max_rhat = Some(max_rhat.map_or(r, |m| m.max(r)));
        }
        if let Some(e) = qs.ess {
            min_ess = Some(min_ess.map_or(e, |m| m.min(e)));
        }
    }
    Ok(PointStats {
        mean: s.mean,
        sd: s.sd,
        mcse: s.mcse,
        q025: s.q025,
        q975: s.q975,
        max_rhat,
        min_ess,
        divergences: draws.divergences(),
    })
}

/// Fits every point of the grid in `sens`. Points run in parallel with seeds
/// derived from `(sampler.seed, index)`, so rows do not depend on scheduling.
/// A failed point yields an error row instead of aborting the sweep.
pub fn grid_sweep(
    kind: ModelKind,
    data: &Dataset,
    sens: &SensitivityConfig,
    options: &ModelOptions,
    sampler: &SamplerConfig,
) -> Result<SweepTable, EstimandError> {
    sens.validate_for(kind).map_err(|e| EstimandError::Config(e.to_string()))?;
    sampler.validate().map_err(|e| EstimandError::Config(e.to_string()))?;
    let axes = sens.grid_axes();
    if axes.is_empty() {
        return Err(EstimandError::Config("no sensitivity parameter has a grid".into()));
    }
    let points = sweep_points(&axes);
    let rows = points
        .into_par_iter()
        .enumerate()
        .map(|(index, values)| {
            let outcome = fit_point(kind, data, sens, options, sampler, index)
                .and_then(|d| point_stats(&d).map_err(|e| e.to_string()));
            SweepRow { index, values, outcome }
        })
        .collect();
    Ok(SweepTable {
        axes: axes.into_iter().map(|(n, _)| n).collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_row_major() {
        let axes = vec![("a".to_string(), vec![1.0, 2.0]), ("b".to_string(), vec![10.0, 20.0, 30.0])];
        let p = sweep_points(&axes);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![1.0, 10.0]);
        assert_eq!(p[1], vec![1.0, 20.0]);
        assert_eq!(p[3], vec![2.0, 10.0]);
    }
}
