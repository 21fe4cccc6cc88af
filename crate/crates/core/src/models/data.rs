use std::collections::BTreeMap;

use super::ModelError;

/// Observed data, column oriented. `y[i]` is `None` exactly where the
/// outcome is missing (`delta[i] == 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    delta: Vec<u8>,
    y: Vec<Option<f64>>,
    a: Vec<u8>,
    l: Vec<f64>,
}

/// Rows of a dataset with binary outcome and covariate, grouped by value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pattern {
    pub y: Option<u8>,
    pub a: u8,
    pub l: u8,
    pub count: usize,
}

impl Dataset {
    pub fn new(y: Vec<Option<f64>>, a: Vec<u8>, l: Vec<f64>) -> Result<Self, ModelError> {
        let n = y.len();
        if n == 0 {
            return Err(ModelError::Data("dataset has no rows".into()));
        }
        if a.len() != n || l.len() != n {
            return Err(ModelError::Data(format!(
                "column lengths differ: y {n}, a {}, l {}",
                a.len(),
                l.len()
            )));
        }
        if let Some(i) = a.iter().position(|&v| v > 1) {
            return Err(ModelError::Data(format!("row {i}: treatment must be 0 or 1")));
        }
        if let Some(i) = l.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::Data(format!("row {i}: covariate is not finite")));
        }
        if let Some(i) = y.iter().position(|v| v.is_some_and(|v| !v.is_finite())) {
            return Err(ModelError::Data(format!("row {i}: outcome is not finite")));
        }
        let delta = y.iter().map(|v| u8::from(v.is_none())).collect();
        Ok(Self { delta, y, a, l })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self) -> &[Option<f64>] {
        &self.y
    }

    pub fn a(&self) -> &[u8] {
        &self.a
    }

    pub fn l(&self) -> &[f64] {
        &self.l
    }

    pub fn delta(&self) -> &[u8] {
        &self.delta
    }

    pub fn n_missing(&self) -> usize {
        self.delta.iter().filter(|&&d| d == 1).count()
    }

    pub fn n_observed(&self) -> usize {
        self.n() - self.n_missing()
    }

    pub fn binary_outcome(&self) -> bool {
        self.y.iter().flatten().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn binary_covariate(&self) -> bool {
        self.l.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Rows with an observed outcome.
    pub fn complete_cases(&self) -> Result<Dataset, ModelError> {
        let keep: Vec<usize> = (0..self.n()).filter(|&i| self.delta[i] == 0).collect();
        Dataset::new(
            keep.iter().map(|&i| self.y[i]).collect(),
            keep.iter().map(|&i| self.a[i]).collect(),
            keep.iter().map(|&i| self.l[i]).collect(),
        )
    }

    /// Mean of the observed outcomes.
    pub fn observed_mean(&self) -> Option<f64> {
        let obs: Vec<f64> = self.y.iter().flatten().copied().collect();
        (!obs.is_empty()).then(|| obs.iter().sum::<f64>() / obs.len() as f64)
    }

    /// Groups rows by (y, a, l); requires binary outcome and covariate.
    pub(crate) fn binary_patterns(&self) -> Vec<Pattern> {
        let mut counts: BTreeMap<(Option<u8>, u8, u8), usize> = BTreeMap::new();
        for i in 0..self.n() {
            let key = (self.y[i].map(|v| v as u8), self.a[i], self.l[i] as u8);
            *counts.entry(key).or_default() += 1;
        }
        counts
            .into_iter()
            .map(|((y, a, l), count)| Pattern { y, a, l, count })
            .collect()
    }

    /// Number of rows with l == 1 and with l == 0.
    pub(crate) fn covariate_counts(&self) -> (usize, usize) {
        let ones = self.l.iter().filter(|&&v| v == 1.0).count();
        (ones, self.n() - ones)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_follows_missing_outcomes() {
        let d = Dataset::new(vec![Some(1.0), None, Some(0.0)], vec![1, 0, 1], vec![0.0, 1.0, 1.0]).unwrap();
        assert_eq!(d.delta(), &[0, 1, 0]);
        assert_eq!((d.n_observed(), d.n_missing()), (2, 1));
        assert_eq!(d.complete_cases().unwrap().n(), 2);
        let p = d.binary_patterns();
        assert_eq!(p.iter().map(|p| p.count).sum::<usize>(), 3);
        assert_eq!(p[0], Pattern { y: None, a: 0, l: 1, count: 1 });
    }

    #[test]
    fn rejects_malformed_columns() {
        assert!(Dataset::new(vec![], vec![], vec![]).is_err());
        assert!(Dataset::new(vec![Some(1.0)], vec![2], vec![0.0]).is_err());
        assert!(Dataset::new(vec![Some(1.0)], vec![1, 0], vec![0.0]).is_err());
        assert!(Dataset::new(vec![Some(f64::NAN)], vec![1], vec![0.0]).is_err());
    }
}
