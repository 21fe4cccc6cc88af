//! Warmup adaptation: dual averaging of the step size and a running
//! variance estimate for the diagonal metric.

#[derive(Debug, Clone)]
pub(crate) struct DualAveraging {
    target: f64,
    mu: f64,
    h_bar: f64,
    log_eps_bar: f64,
    t: f64,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    pub fn new(step_size: f64, target: f64) -> Self {
        Self {
            target,
            mu: (10.0 * step_size).ln(),
            h_bar: 0.0,
            log_eps_bar: 0.0,
            t: 0.0,
        }
    }

    /// Records one acceptance statistic and returns the next step size.
    pub fn update(&mut self, accept_stat: f64) -> f64 {
        self.t += 1.0;
        let w = 1.0 / (self.t + Self::T0);
        self.h_bar = (1.0 - w) * self.h_bar + w * (self.target - accept_stat);
        let log_eps = self.mu - self.t.sqrt() / Self::GAMMA * self.h_bar;
        let x = self.t.powf(-Self::KAPPA);
        self.log_eps_bar = x * log_eps + (1.0 - x) * self.log_eps_bar;
        log_eps.exp()
    }

    /// Averaged step size to freeze at the end of warmup.
    pub fn final_step_size(&self) -> f64 {
        self.log_eps_bar.exp()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct RunningVariance {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningVariance {
    pub fn new(dim: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
    }

    /// Sample variances shrunk toward 1e-3 with weight 5/(n+5).
    pub fn regularized(&self) -> Option<Vec<f64>> {
        if self.n < 3 {
            return None;
        }
        let n = self.n as f64;
        Some(
            self.m2
                .iter()
                .map(|s| {
                    let var = s / (n - 1.0);
                    (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_averaging_shrinks_step_when_acceptance_is_low() {
        let mut da = DualAveraging::new(1.0, 0.8);
        let mut eps = 1.0;
        for _ in 0..50 {
            eps = da.update(0.1);
        }
        assert!(eps < 1.0);
        let mut da = DualAveraging::new(1.0, 0.8);
        for _ in 0..50 {
            eps = da.update(1.0);
        }
        assert!(eps > 1.0);
    }

    #[test]
    fn running_variance_matches_two_pass() {
        let xs = [1.0, 4.0, -2.0, 3.5, 0.25];
        let mut rv = RunningVariance::new(1);
        for x in xs {
            rv.push(&[x]);
        }
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        let reg = rv.regularized().unwrap()[0];
        assert!((reg - (5.0 / 10.0 * var + 1e-3 * 0.5)).abs() < 1e-12);
    }
}
