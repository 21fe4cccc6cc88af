use rayon::prelude::*;

use super::adapt::{DualAveraging, RunningVariance};
use super::{ChainDraws, DrawsMatrix, LogDensity, SamplerConfig, SamplerError};
use crate::numkit::{derive_seed, SeededRng};

const DIVERGENCE_THRESHOLD: f64 = 1000.0;
const INIT_ATTEMPTS: usize = 100;
const INIT_RADIUS: f64 = 2.0;

/// Runs `config.chains` independent chains and returns their post-warmup draws.
pub fn hmc_sample<M: LogDensity + ?Sized>(
    model: &M,
    config: &SamplerConfig,
) -> Result<DrawsMatrix, SamplerError> {
    config.validate()?;
    if model.dim() == 0 {
        return Err(SamplerError::Config("target has no parameters".into()));
    }
    let names = model.quantity_names();
    let chains = (0..config.chains)
        .into_par_iter()
        .map(|c| run_chain(model, config, c, names.len()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DrawsMatrix {
        names,
        warmup: config.warmup,
        chains,
    })
}

struct State<'m, M: ?Sized> {
    model: &'m M,
    x: Vec<f64>,
    grad: Vec<f64>,
    logp: f64,
    inv_metric: Vec<f64>,
    x_new: Vec<f64>,
    g_new: Vec<f64>,
    p: Vec<f64>,
}

impl<M: LogDensity + ?Sized> State<'_, M> {
    fn kinetic(&self) -> f64 {
        0.5 * self
            .p
            .iter()
            .zip(&self.inv_metric)
            .map(|(p, m)| p * p * m)
            .sum::<f64>()
    }

    fn draw_momentum(&mut self, rng: &mut SeededRng) {
        for (p, m) in self.p.iter_mut().zip(&self.inv_metric) {
            *p = rng.standard_normal() / m.sqrt();
        }
    }

    /// Integrates `steps` leapfrog steps from the current point with the
    /// momentum in `self.p`. Returns the final log density, or `None` when the
    /// trajectory diverged.
    fn integrate(&mut self, eps: f64, steps: usize, h0: f64) -> Option<f64> {
        self.x_new.copy_from_slice(&self.x);
        self.g_new.copy_from_slice(&self.grad);
        let mut logp = self.logp;
        for _ in 0..steps {
            for (p, g) in self.p.iter_mut().zip(&self.g_new) {
                *p += 0.5 * eps * g;
            }
            for ((x, p), m) in self.x_new.iter_mut().zip(&self.p).zip(&self.inv_metric) {
                *x += eps * m * p;
            }
            logp = match self.model.log_density_grad(&self.x_new, &mut self.g_new) {
                Ok(v) if v.is_finite() && self.g_new.iter().all(|g| g.is_finite()) => v,
                _ => return None,
            };
            for (p, g) in self.p.iter_mut().zip(&self.g_new) {
                *p += 0.5 * eps * g;
            }
            let h = -logp + self.kinetic();
            if !(h - h0 <= DIVERGENCE_THRESHOLD) {
                return None;
            }
        }
        Some(logp)
    }

    /// One HMC transition; returns (acceptance statistic, divergent).
    fn transition(&mut self, eps: f64, steps: usize, rng: &mut SeededRng) -> (f64, bool) {
        self.draw_momentum(rng);
        let h0 = -self.logp + self.kinetic();
        let Some(logp) = self.integrate(eps, steps, h0) else {
            return (0.0, true);
        };
        let h1 = -logp + self.kinetic();
        let accept = (h0 - h1).exp().min(1.0);
        if rng.uniform() < accept {
            std::mem::swap(&mut self.x, &mut self.x_new);
            std::mem::swap(&mut self.grad, &mut self.g_new);
            self.logp = logp;
        }
        (accept, false)
    }

    /// Log acceptance ratio of a single leapfrog step from the current point.
    fn single_step_log_ratio(&mut self, eps: f64, rng: &mut SeededRng) -> f64 {
        self.draw_momentum(rng);
        let h0 = -self.logp + self.kinetic();
        match self.integrate(eps, 1, h0) {
            Some(logp) => h0 - (-logp + self.kinetic()),
            None => f64::NEG_INFINITY,
        }
    }

    /// Doubles or halves `eps` until a single step's acceptance crosses 0.8.
    fn reasonable_step_size(&mut self, mut eps: f64, rng: &mut SeededRng) -> f64 {
        let threshold = 0.8f64.ln();
        let up = self.single_step_log_ratio(eps, rng) > threshold;
        for _ in 0..60 {
            eps = if up { eps * 2.0 } else { eps * 0.5 };
            let ratio = self.single_step_log_ratio(eps, rng);
            if up != (ratio > threshold) {
                break;
            }
        }
        eps
    }
}

fn initialize<'m, M: LogDensity + ?Sized>(
    model: &'m M,
    chain: usize,
    rng: &mut SeededRng,
) -> Result<State<'m, M>, SamplerError> {
    let dim = model.dim();
    let mut x = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let mut detail = String::from("non-finite log density");
    for _ in 0..INIT_ATTEMPTS {
        for v in x.iter_mut() {
            *v = rng.uniform_range(-INIT_RADIUS, INIT_RADIUS);
        }
        model.init_hint(&mut x);
        match model.log_density_grad(&x, &mut grad) {
            Ok(lp) if lp.is_finite() && grad.iter().all(|g| g.is_finite()) => {
                return Ok(State {
                    model,
                    x,
                    grad,
                    logp: lp,
                    inv_metric: vec![1.0; dim],
                    x_new: vec![0.0; dim],
                    g_new: vec![0.0; dim],
                    p: vec![0.0; dim],
                });
            }
            Ok(_) => detail = "non-finite log density or gradient".into(),
            Err(e) => detail = e.to_string(),
        }
    }
    Err(SamplerError::Initialization {
        chain,
        attempts: INIT_ATTEMPTS,
        detail,
    })
}

fn trajectory_steps(config: &SamplerConfig, eps: f64) -> usize {
    let l = (config.integration_time / eps).ceil();
    if l.is_finite() && l >= 1.0 {
        (l as usize).min(usize::MAX / 2)
    } else if l < 1.0 {
        1
    } else {
        usize::MAX / 2
    }
}

fn run_chain<M: LogDensity + ?Sized>(
    model: &M,
    config: &SamplerConfig,
    chain: usize,
    n_quantities: usize,
) -> Result<ChainDraws, SamplerError> {
    let chain_seed = derive_seed(config.seed, chain as u64);
    let mut rng = SeededRng::new(chain_seed);
    let quantity_seed = derive_seed(chain_seed, u64::MAX);
    let mut st = initialize(model, chain, &mut rng)?;

    let warmup = config.warmup;
    let adapt_metric = warmup >= 20;
    let window = (warmup / 2, warmup * 4 / 5);
    let mut eps = st.reasonable_step_size(1.0, &mut rng);
    let mut da = DualAveraging::new(eps, config.target_accept);
    let mut variance = RunningVariance::new(model.dim());

    for it in 0..warmup {
        let max = trajectory_steps(config, eps).min(config.max_leapfrog_steps);
        let steps = rng.int_inclusive(1, max as u64) as usize;
        let (accept, _) = st.transition(eps, steps, &mut rng);
        eps = da.update(accept);
        if adapt_metric && it >= window.0 && it < window.1 {
            variance.push(&st.x);
            if it + 1 == window.1 {
                if let Some(v) = variance.regularized() {
                    st.inv_metric = v;
                }
                eps = st.reasonable_step_size(eps, &mut rng);
                da = DualAveraging::new(eps, config.target_accept);
            }
        }
    }
    let eps = da.final_step_size();
    let max = trajectory_steps(config, eps);
    if !eps.is_finite() || eps <= 0.0 || max > config.max_leapfrog_steps {
        return Err(SamplerError::Config(format!(
            "chain {chain}: adapted step size {eps:.3e} needs {max} leapfrog steps, above the limit of {}",
            config.max_leapfrog_steps
        )));
    }

    let n = config.samples;
    let mut out = ChainDraws {
        values: Vec::with_capacity(n * n_quantities),
        divergent: Vec::with_capacity(n),
        accept_stat: Vec::with_capacity(n),
        leapfrog_steps: Vec::with_capacity(n),
        step_size: eps,
        inv_metric: st.inv_metric.clone(),
    };
    for it in 0..n {
        let steps = rng.int_inclusive(1, max as u64) as usize;
        let (accept, divergent) = st.transition(eps, steps, &mut rng);
        out.divergent.push(divergent);
        out.accept_stat.push(accept);
        out.leapfrog_steps.push(steps as u32);
        let before = out.values.len();
        let mut qrng = SeededRng::new(derive_seed(quantity_seed, it as u64));
        model
            .quantities(&st.x, &mut qrng, &mut out.values)
            .map_err(|detail| SamplerError::Quantities { chain, detail })?;
        if out.values.len() - before != n_quantities {
            return Err(SamplerError::Quantities {
                chain,
                detail: format!(
                    "{} values for {n_quantities} names",
                    out.values.len() - before
                ),
            });
        }
    }
    Ok(out)
}
