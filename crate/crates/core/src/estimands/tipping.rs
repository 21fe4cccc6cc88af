//! Where a credible-interval bound crosses a decision threshold.

use serde::{Deserialize, Serialize};

use super::{EstimandError, SweepTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    pub values: Vec<f64>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Tipping {
    /// One swept axis: first point, in sweep order, past the threshold.
    Point { point: Option<GridPoint> },
    /// Several axes: every cell whose bound lies on the other side.
    Heatmap { cells: Vec<GridPoint> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TippingReport {
    pub bound: Bound,
    pub threshold: f64,
    /// Reference row: the first successful row in sweep order, which is the
    /// null-value point when grids start at their null values.
    pub reference: GridPoint,
    pub result: Tipping,
    pub warnings: Vec<String>,
}

/// Finds grid points whose chosen CrI bound lies on the opposite side of
/// `threshold` from the reference row. A bound equal to the threshold
/// counts as the side below it.
pub fn tipping_point(table: &SweepTable, bound: Bound, threshold: f64) -> Result<TippingReport, EstimandError> {
    if !threshold.is_finite() {
        return Err(EstimandError::Domain("threshold must be finite".into()));
    }
    let mut warnings = Vec::new();
    let mut valid = Vec::new();
    for row in &table.rows {
        match &row.outcome {
            Ok(s) => valid.push(GridPoint {
                index: row.index,
                values: row.values.clone(),
                bound: match bound {
                    Bound::Lower => s.q025,
                    Bound::Upper => s.q975,
                },
            }),
            Err(e) => warnings.push(format!("skipping grid point {} ({e})", row.index)),
        }
    }
    let Some(reference) = valid.first().cloned() else {
        return Err(EstimandError::Domain("sweep table has no successful rows".into()));
    };
    let above = |b: f64| b > threshold;
    let side = above(reference.bound);
    let mut crossing = valid.into_iter().filter(|p| above(p.bound) != side);
    let result = if table.axes.len() <= 1 {
        Tipping::Point { point: crossing.next() }
    } else {
        Tipping::Heatmap { cells: crossing.collect() }
    };
    Ok(TippingReport {
        bound,
        threshold,
        reference,
        result,
        warnings,
    })
}
