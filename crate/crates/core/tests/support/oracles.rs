//! Independent reference implementations used by the model tests: log
//! targets written row by row with plain floats, brute-force enumeration
//! of latent binary values, and central finite differences.

#![allow(dead_code)]

use causens_core::models::{
    build_model, Dataset, Model, ModelKind, ModelOptions, Params, Posterior, SensitivityConfig, SensitivityEntry,
};
use causens_core::numkit::SeededRng;
use causens_core::sampler::LogDensity;
use rand::Rng;

fn ln_2pi_half() -> f64 {
    0.5 * (2.0 * std::f64::consts::PI).ln()
}

pub fn ln_normal(x: f64, m: f64, s: f64) -> f64 {
    let z = (x - m) / s;
    -0.5 * z * z - s.ln() - ln_2pi_half()
}

pub fn ln_half_normal(x: f64, s: f64) -> f64 {
    std::f64::consts::LN_2 + ln_normal(x, 0.0, s)
}

pub fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Bernoulli mass with probability `p`.
pub fn ln_bern(y: u8, p: f64) -> f64 {
    if y == 1 {
        p.ln()
    } else {
        (1.0 - p).ln()
    }
}

/// Bernoulli mass with probability `expit(eta)`.
pub fn ln_bern_logit(y: u8, eta: f64) -> f64 {
    let s = if y == 1 { eta } else { -eta };
    if s >= 0.0 {
        -(-s).exp().ln_1p()
    } else {
        s - s.exp().ln_1p()
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Priors of sensitivity parameters that the configuration samples.
fn sensitivity_priors(kind: ModelKind, sens: &SensitivityConfig, p: &Params<'_, f64>) -> f64 {
    kind.sensitivity_names()
        .iter()
        .map(|name| match sens.get(name).cloned().unwrap_or(kind.default_sensitivity(name)) {
            SensitivityEntry::Normal { mean, sd } => ln_normal(p.get(name), mean, sd),
            _ => 0.0,
        })
        .sum()
}

fn coefficient_priors(xs: &[f64]) -> f64 {
    xs.iter().map(|&x| ln_normal(x, 0.0, 3.0)).sum()
}

fn bin(v: f64) -> u8 {
    v as u8
}

/// Log posterior kernel on the constrained scale, written per row without
/// grouping, marginalizing or autodiff.
pub fn direct_log_target(kind: ModelKind, data: &Dataset, sens: &SensitivityConfig, p: &Params<'_, f64>) -> f64 {
    let n = data.n();
    let (y, a, l) = (data.y(), data.a(), data.l());
    let mut lp = sensitivity_priors(kind, sens, p);
    match kind {
        ModelKind::Complete => {
            let e = p.block("eta");
            let theta = p.get("theta");
            lp += coefficient_priors(e);
            for i in 0..n {
                let lin = e[0] + e[1] * l[i] + e[2] * f64::from(a[i]);
                lp += ln_bern_logit(bin(y[i].unwrap()), lin) + ln_bern(bin(l[i]), theta);
            }
        }
        ModelKind::Misclassification => {
            let (e, g) = (p.block("eta"), p.block("gamma"));
            let (theta, xi1, xi2) = (p.get("theta"), p.get("xi1"), p.get("xi2"));
            lp += coefficient_priors(e) + coefficient_priors(g);
            for i in 0..n {
                let pa = expit(g[0] + g[1] * l[i]);
                let mut lik = 0.0;
                for true_a in [0.0, 1.0] {
                    let p_rec = if true_a == 1.0 { xi1 } else { xi2 };
                    let p_true = if true_a == 1.0 { pa } else { 1.0 - pa };
                    let py = expit(e[0] + e[1] * l[i] + e[2] * true_a);
                    let py = if y[i].unwrap() == 1.0 { py } else { 1.0 - py };
                    let pr = if a[i] == 1 { p_rec } else { 1.0 - p_rec };
                    lik += p_true * pr * py;
                }
                lp += lik.ln() + ln_bern(bin(l[i]), theta);
            }
        }
        ModelKind::Unmeasured => {
            let (e, g, u) = (p.block("eta"), p.block("gamma"), p.block("u"));
            let (theta, xi1, xi2) = (p.get("theta"), p.get("xi1"), p.get("xi2"));
            lp += coefficient_priors(e) + coefficient_priors(g);
            for i in 0..n {
                let af = f64::from(a[i]);
                lp += ln_bern_logit(bin(y[i].unwrap()), e[0] + e[1] * af + e[2] * l[i] + xi1 * u[i]);
                lp += ln_bern_logit(a[i], g[0] + g[1] * l[i] + xi2 * u[i]);
                lp += ln_normal(u[i], 0.0, 1.0) + ln_bern(bin(l[i]), theta);
            }
        }
        ModelKind::MnarBinary => {
            let e = p.block("eta");
            let theta = p.get("theta");
            let xi = ["xi0", "xi1", "xi2", "xi3"].map(|s| p.get(s));
            lp += coefficient_priors(e);
            let p_miss = |a: f64, y: f64| expit(xi[0] + xi[1] * a + xi[2] * y + xi[3] * a * y);
            for i in 0..n {
                let af = f64::from(a[i]);
                let py1 = expit(e[0] + e[1] * l[i] + e[2] * af);
                let lik = match y[i] {
                    Some(yv) => (1.0 - p_miss(af, yv)) * if yv == 1.0 { py1 } else { 1.0 - py1 },
                    None => p_miss(af, 1.0) * py1 + p_miss(af, 0.0) * (1.0 - py1),
                };
                lp += lik.ln() + ln_bern(bin(l[i]), theta);
            }
        }
        ModelKind::TsbMnar => {
            let v = p.block("v");
            let alpha = p.get("alpha");
            let k = v.len() + 1;
            let mut nu = Vec::with_capacity(k);
            let mut rest = 1.0;
            for &vj in v {
                nu.push(vj * rest);
                rest *= 1.0 - vj;
            }
            nu.push(rest);
            for name in ["eta0", "eta1", "eta2", "gamma0", "gamma1", "theta0"] {
                lp += coefficient_priors(p.block(name));
            }
            for name in ["sigma", "phi"] {
                lp += p.block(name).iter().map(|&s| ln_half_normal(s, 2.0)).sum::<f64>();
            }
            for &vj in v {
                lp += alpha.ln() + (alpha - 1.0) * (1.0 - vj).ln();
            }
            if p.layout().block("alpha").is_some_and(|b| b.is_sampled()) {
                lp -= alpha;
            }
            let b = |name: &str, j: usize| p.block(name)[j];
            let y_miss = p.block("y_miss");
            let xi = ["xi0", "xi1", "xi3"].map(|s| p.get(s));
            let mut slot = 0;
            for i in 0..n {
                let yv = match y[i] {
                    Some(v) => v,
                    None => {
                        slot += 1;
                        y_miss[slot - 1]
                    }
                };
                let af = f64::from(a[i]);
                let dens: f64 = (0..k)
                    .map(|j| {
                        let mean = b("eta0", j) + b("eta1", j) * l[i] + b("eta2", j) * af;
                        let pa = expit(b("gamma0", j) + b("gamma1", j) * l[i]);
                        let pa = if a[i] == 1 { pa } else { 1.0 - pa };
                        nu[j]
                            * ln_normal(yv, mean, b("sigma", j)).exp()
                            * pa
                            * ln_normal(l[i], b("theta0", j), b("phi", j)).exp()
                    })
                    .sum();
                let pm = expit(xi[0] + xi[1] * af + xi[2] * af * yv);
                lp += dens.ln() + if y[i].is_none() { pm.ln() } else { (1.0 - pm).ln() };
            }
        }
    }
    lp
}

/// Log target by summing the full joint over every configuration of the
/// latent binary values: true treatments for the misclassification model,
/// missing outcomes for the binary MNAR model.
pub fn enumerated_log_target(kind: ModelKind, data: &Dataset, sens: &SensitivityConfig, p: &Params<'_, f64>) -> f64 {
    let n = data.n();
    let (y, a, l) = (data.y(), data.a(), data.l());
    let e = p.block("eta");
    let theta = p.get("theta");
    let mut lp = sensitivity_priors(kind, sens, p) + coefficient_priors(e);
    lp += (0..n).map(|i| ln_bern(bin(l[i]), theta)).sum::<f64>();
    let mut terms = Vec::new();
    match kind {
        ModelKind::Misclassification => {
            let g = p.block("gamma");
            let (xi1, xi2) = (p.get("xi1"), p.get("xi2"));
            lp += coefficient_priors(g);
            assert!(n <= 16, "enumeration is exponential in n");
            for mask in 0u32..(1 << n) {
                let mut t = 0.0;
                for i in 0..n {
                    let true_a = ((mask >> i) & 1) as u8;
                    let taf = f64::from(true_a);
                    t += ln_bern_logit(true_a, g[0] + g[1] * l[i]);
                    t += ln_bern(a[i], if true_a == 1 { xi1 } else { xi2 });
                    t += ln_bern_logit(bin(y[i].unwrap()), e[0] + e[1] * l[i] + e[2] * taf);
                }
                terms.push(t);
            }
        }
        ModelKind::MnarBinary => {
            let xi = ["xi0", "xi1", "xi2", "xi3"].map(|s| p.get(s));
            let missing: Vec<usize> = (0..n).filter(|&i| y[i].is_none()).collect();
            assert!(missing.len() <= 16, "enumeration is exponential in the missing count");
            for mask in 0u32..(1 << missing.len()) {
                let mut filled: Vec<f64> = y.iter().map(|v| v.unwrap_or(0.0)).collect();
                for (bit, &i) in missing.iter().enumerate() {
                    filled[i] = f64::from((mask >> bit) & 1);
                }
                let mut t = 0.0;
                for i in 0..n {
                    let (af, yv) = (f64::from(a[i]), filled[i]);
                    t += ln_bern_logit(bin(yv), e[0] + e[1] * l[i] + e[2] * af);
                    let delta = u8::from(y[i].is_none());
                    t += ln_bern_logit(delta, xi[0] + xi[1] * af + xi[2] * yv + xi[3] * af * yv);
                }
                terms.push(t);
            }
        }
        _ => panic!("no latent binary values in {kind}"),
    }
    lp + log_sum_exp(&terms)
}

/// A small random dataset that suits `kind`.
pub fn random_dataset(kind: ModelKind, n: usize, rng: &mut SeededRng) -> Dataset {
    let mut y = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    let mut l = Vec::with_capacity(n);
    for i in 0..n {
        let continuous = kind == ModelKind::TsbMnar;
        let li = if continuous { rng.random_range(-2.0..2.0) } else { f64::from(rng.random_range(0..2u8)) };
        let yi = if continuous { rng.random_range(-3.0..3.0) } else { f64::from(rng.random_range(0..2u8)) };
        // The first row always keeps its outcome so every dataset has one.
        let may_miss = matches!(kind, ModelKind::MnarBinary | ModelKind::TsbMnar) && i > 0;
        y.push(if may_miss && rng.random_bool(0.4) { None } else { Some(yi) });
        a.push(rng.random_range(0..2u8));
        l.push(li);
    }
    Dataset::new(y, a, l).expect("valid random dataset")
}

/// Random sensitivity configuration: each parameter is either fixed or
/// given a normal prior.
pub fn random_sensitivity(kind: ModelKind, rng: &mut SeededRng) -> SensitivityConfig {
    let mut sens = SensitivityConfig::new();
    for name in kind.sensitivity_names() {
        let entry = if kind == ModelKind::Misclassification {
            if rng.random_bool(0.5) {
                SensitivityEntry::Point(rng.random_range(0.05..0.95))
            } else {
                SensitivityEntry::Normal { mean: 0.5, sd: 0.3 }
            }
        } else if rng.random_bool(0.5) {
            SensitivityEntry::Point(rng.random_range(-1.5..1.5))
        } else {
            SensitivityEntry::Normal {
                mean: rng.random_range(-1.0..1.0),
                sd: rng.random_range(0.5..2.0),
            }
        };
        sens.set(name, entry);
    }
    sens
}

pub struct Instance {
    pub kind: ModelKind,
    pub data: Dataset,
    pub sens: SensitivityConfig,
    pub model: Box<dyn Model>,
}

impl Instance {
    pub fn random(kind: ModelKind, n: usize, rng: &mut SeededRng) -> Self {
        let data = random_dataset(kind, n, rng);
        let sens = random_sensitivity(kind, rng);
        let options = ModelOptions {
            components: 3,
            n_mc: 10,
            quadrature_order: 8,
            ..ModelOptions::default()
        };
        let model = build_model(kind, &data, &sens, &options).expect("model builds");
        Self { kind, data, sens, model }
    }

    pub fn posterior(&self) -> Posterior<'_> {
        Posterior::new(self.model.as_ref())
    }

    /// A random unconstrained point.
    pub fn random_point(&self, rng: &mut SeededRng) -> Vec<f64> {
        (0..self.model.layout().dim()).map(|_| rng.random_range(-1.5..1.5)).collect()
    }

    /// Constrained values of the sampled blocks at `z`.
    pub fn sampled(&self, z: &[f64]) -> Vec<f64> {
        let full = self.posterior().constrain(z);
        let layout = self.model.layout();
        layout
            .blocks()
            .iter()
            .filter(|b| b.is_sampled())
            .flat_map(|b| full[layout.range(&b.name)].to_vec())
            .collect()
    }
}

/// Central finite-difference gradient.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let hi = f(&xp);
            xp[i] = x[i] - h;
            let lo = f(&xp);
            xp[i] = x[i];
            (hi - lo) / (2.0 * h)
        })
        .collect()
}

/// Largest relative error `|ad - fd| / max(1, |fd|)` of the autodiff
/// gradient against finite differences at `z`.
pub fn gradient_error(post: &Posterior<'_>, z: &[f64]) -> f64 {
    let mut g = vec![0.0; z.len()];
    post.log_density_grad(z, &mut g).expect("gradient evaluates");
    let fd = fd_gradient(|x| post.log_density(x).expect("density evaluates"), z, 1e-5);
    g.iter()
        .zip(&fd)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// ATE of a linear-Gaussian mixture by trapezoid integration of the
/// induced-regression contrast against the mixture density of `L`.
pub fn mixture_ate_trapezoid(components: &[causens_core::estimands::MixtureComponent], weights: &[f64]) -> f64 {
    let lo = components.iter().map(|c| c.theta0 - 10.0 * c.phi).fold(f64::INFINITY, f64::min);
    let hi = components.iter().map(|c| c.theta0 + 10.0 * c.phi).fold(f64::NEG_INFINITY, f64::max);
    let steps = 40_000;
    let h = (hi - lo) / steps as f64;
    let mut acc = 0.0;
    for i in 0..=steps {
        let l = lo + i as f64 * h;
        let mut dens = 0.0;
        let mut mean = [0.0; 2];
        for (arm, m) in mean.iter_mut().enumerate() {
            let af = arm as f64;
            let mut num = 0.0;
            let mut den = 0.0;
            for (c, &w) in components.iter().zip(weights) {
                let pl = ln_normal(l, c.theta0, c.phi).exp();
                let pa = expit(c.gamma[0] + c.gamma[1] * l);
                let pa = if arm == 1 { pa } else { 1.0 - pa };
                num += w * pl * pa * (c.eta[0] + c.eta[1] * l + c.eta[2] * af);
                den += w * pl * pa;
                if arm == 0 {
                    dens += w * pl;
                }
            }
            *m = num / den;
        }
        let f = dens * (mean[1] - mean[0]);
        acc += if i == 0 || i == steps { 0.5 * f } else { f };
    }
    acc * h
}
