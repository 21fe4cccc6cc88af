//! Gauss-Hermite rules rescaled to expectations under a standard normal.

use super::NumError;

pub const MAX_QUADRATURE_ORDER: usize = 64;

/// Nodes and weights such that `sum(w_i * f(x_i))` approximates `E[f(U)]`
/// for `U ~ N(0, 1)`. Weights sum to one; nodes are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Builds the `order`-point rule by Newton iteration on orthonormal Hermite
/// polynomials, then maps nodes by `sqrt(2)` and weights by `1/sqrt(pi)`.
pub fn gauss_hermite_standard_normal(order: usize) -> Result<QuadratureRule, NumError> {
    if order == 0 || order > MAX_QUADRATURE_ORDER {
        return Err(NumError::domain(
            "gauss_hermite_standard_normal",
            format!("order {order} outside 1..={MAX_QUADRATURE_ORDER}"),
        ));
    }
    let n = order;
    let nf = n as f64;
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let step = p1 / pp;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    // x is decreasing from the construction; flip and rescale.
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut nodes: Vec<f64> = x.iter().rev().map(|v| v * sqrt2).collect();
    let mut weights: Vec<f64> = w.iter().rev().copied().collect();
    let total: f64 = weights.iter().sum();
    for wi in &mut weights {
        *wi /= total;
    }
    // Exact antisymmetry of nodes.
    for i in 0..n / 2 {
        let m = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -m;
        nodes[n - 1 - i] = m;
    }
    Ok(QuadratureRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::expit;

    fn standard_normal_trapezoid(f: impl Fn(f64) -> f64) -> f64 {
        let steps = 400_000;
        let (lo, hi) = (-10.0, 10.0);
        let h: f64 = (hi - lo) / steps as f64;
        let phi = |u: f64| (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = 0.5 * (f(lo) * phi(lo) + f(hi) * phi(hi));
        for i in 1..steps {
            let u = lo + i as f64 * h;
            acc += f(u) * phi(u);
        }
        acc * h
    }

    #[test]
    fn order_one_is_the_mean() {
        let rule = gauss_hermite_standard_normal(1).unwrap();
        assert_eq!(rule.nodes(), &[0.0]);
        assert!((rule.weights()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range_orders() {
        assert!(gauss_hermite_standard_normal(0).is_err());
        assert!(gauss_hermite_standard_normal(65).is_err());
    }

    #[test]
    fn weights_normalized_and_nodes_increasing() {
        for order in 1..=MAX_QUADRATURE_ORDER {
            let rule = gauss_hermite_standard_normal(order).unwrap();
            let total: f64 = rule.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "order {order}");
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            assert!(rule.nodes().windows(2).all(|p| p[0] < p[1]), "order {order}");
        }
    }

    #[test]
    fn polynomial_exactness() {
        let rule = gauss_hermite_standard_normal(8).unwrap();
        assert!((rule.expectation(|u| u * u) - 1.0).abs() < 1e-12);
        // Moments up to degree 15: E[U^4] = 3, E[U^6] = 15, E[U^8] = 105, E[U^14] = 135135.
        assert!((rule.expectation(|u| u.powi(4)) - 3.0).abs() < 1e-11);
        assert!((rule.expectation(|u| u.powi(8)) - 105.0).abs() < 1e-9);
        assert!((rule.expectation(|u| u.powi(14)) - 135_135.0).abs() < 1e-5);
        assert!(rule.expectation(|u| u.powi(15)).abs() < 1e-6);
        let big = gauss_hermite_standard_normal(64).unwrap();
        assert!((big.expectation(|u| u * u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_logistic_integrand_matches_trapezoid() {
        let rule = gauss_hermite_standard_normal(32).unwrap();
        let f = |u: f64| expit(0.3 + 0.9 * u);
        let quad = rule.expectation(f);
        let oracle = standard_normal_trapezoid(f);
        assert!((quad - oracle).abs() < 1e-8, "{quad} vs {oracle}");
    }
}
