use causens_core::autodiff::AdError;
use causens_core::estimands::summarize;
use causens_core::numkit::{expit, SeededRng};
use causens_core::sampler::{hmc_sample, Constraint, LogDensity, SamplerConfig};

struct StdNormal(usize);

impl LogDensity for StdNormal {
    fn dim(&self) -> usize {
        self.0
    }
    fn log_density_grad(&self, x: &[f64], g: &mut [f64]) -> Result<f64, AdError> {
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi = -xi;
        }
        Ok(-0.5 * x.iter().map(|v| v * v).sum::<f64>())
    }
}

/// Beta(1,1) prior, 20 Bernoulli observations with 14 ones, sampled on the
/// logit scale. The posterior is Beta(15, 7).
struct BetaBernoulli;

impl LogDensity for BetaBernoulli {
    fn dim(&self) -> usize {
        1
    }
    fn log_density_grad(&self, x: &[f64], g: &mut [f64]) -> Result<f64, AdError> {
        let t = expit(x[0]);
        // 14 ln t + 6 ln(1-t) plus the Jacobian ln t + ln(1-t).
        g[0] = 15.0 * (1.0 - t) - 7.0 * t;
        Ok(15.0 * t.ln() + 7.0 * (1.0 - t).ln())
    }
    fn quantity_names(&self) -> Vec<String> {
        vec!["theta".into()]
    }
    fn quantities(&self, x: &[f64], _: &mut SeededRng, out: &mut Vec<f64>) -> Result<(), String> {
        out.push(Constraint::UNIT.constrain(x[0]).0);
        Ok(())
    }
}

fn config(seed: u64) -> SamplerConfig {
    SamplerConfig {
        seed,
        ..SamplerConfig::default()
    }
}

#[test]
fn ten_dimensional_normal_is_calibrated() {
    let draws = hmc_sample(&StdNormal(10), &config(42)).unwrap();
    assert_eq!(draws.divergences(), 0);
    for q in 0..10 {
        let s = summarize(&draws.column(q)).unwrap();
        assert!(s.mean.abs() < 0.05, "mean {q}: {}", s.mean);
        assert!((s.sd * s.sd - 1.0).abs() < 0.1, "var {q}: {}", s.sd * s.sd);
        assert!(s.rhat.unwrap() < 1.01);
    }
}

#[test]
fn beta_bernoulli_posterior_mean() {
    let draws = hmc_sample(&BetaBernoulli, &config(7)).unwrap();
    let s = summarize(&draws.column(0)).unwrap();
    let exact = 15.0 / 22.0;
    assert!((s.mean - exact).abs() < 3.0 * s.mcse.unwrap(), "{} vs {exact}", s.mean);
    let all = draws.pooled(0);
    assert!(all.iter().all(|&t| t > 0.0 && t < 1.0));
}

#[test]
fn one_dimensional_normal_passes_ks() {
    let draws = hmc_sample(&StdNormal(1), &config(3)).unwrap();
    let mut xs = draws.pooled(0);
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let normal = statrs::distribution::Normal::standard();
    use statrs::distribution::ContinuousCDF;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 0.03, "KS distance {d}");
}

#[test]
fn same_seed_same_draws() {
    let small = SamplerConfig {
        warmup: 200,
        samples: 200,
        ..config(9)
    };
    let a = hmc_sample(&StdNormal(3), &small).unwrap();
    let b = hmc_sample(&StdNormal(3), &small).unwrap();
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = pool.install(|| hmc_sample(&StdNormal(3), &small).unwrap());
    assert_eq!(a, c);
    let d = hmc_sample(&StdNormal(3), &SamplerConfig { seed: 10, ..small }).unwrap();
    assert_ne!(a, d);
}

#[test]
fn longer_warmup_does_not_hurt() {
    let exact = 15.0 / 22.0;
    let err = |warmup: usize| {
        let draws = hmc_sample(&BetaBernoulli, &SamplerConfig { warmup, ..config(21) }).unwrap();
        let s = summarize(&draws.column(0)).unwrap();
        ((s.mean - exact).abs(), s.mcse.unwrap())
    };
    let (e1, m1) = err(500);
    let (e2, m2) = err(1000);
    assert!(e2 <= e1 + 3.0 * (m1 * m1 + m2 * m2).sqrt(), "{e1} {e2}");
}

struct Broken;

impl LogDensity for Broken {
    fn dim(&self) -> usize {
        2
    }
    fn log_density_grad(&self, _: &[f64], _: &mut [f64]) -> Result<f64, AdError> {
        Ok(f64::NAN)
    }
}

#[test]
fn initialization_failure_is_reported() {
    let err = hmc_sample(&Broken, &config(1)).unwrap_err();
    assert!(err.to_string().contains("100"), "{err}");
}

#[test]
fn leapfrog_budget_is_enforced() {
    // A very narrow target forces a tiny step size.
    struct Narrow;
    impl LogDensity for Narrow {
        fn dim(&self) -> usize {
            1
        }
        fn log_density_grad(&self, x: &[f64], g: &mut [f64]) -> Result<f64, AdError> {
            g[0] = -1e6 * x[0];
            Ok(-0.5e6 * x[0] * x[0])
        }
    }
    let cfg = SamplerConfig {
        max_leapfrog_steps: 2,
        warmup: 10,
        samples: 10,
        ..config(1)
    };
    assert!(hmc_sample(&Narrow, &cfg).is_err());
    assert!(SamplerConfig { chains: 0, ..config(1) }.validate().is_err());
    assert!(SamplerConfig { target_accept: 1.0, ..config(1) }.validate().is_err());
}
