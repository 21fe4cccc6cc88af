//! Continuous outcome missing not at random, with the joint law of
//! (L, A, Y) modeled as a truncated stick-breaking mixture of K
//! components. Missing outcomes are sampled as latent parameters.
//!
//! Component k: `L ~ N(theta0[k], phi[k])`,
//! `A | L ~ Bernoulli(expit(gamma0[k] + gamma1[k] L))`,
//! `Y | A, L ~ N(eta0[k] + eta1[k] L + eta2[k] A, sigma[k])`.
//! Missingness: `expit(xi0 + xi1 a + xi3 a y)`.

use super::stick::log_stick_breaking;
use super::{resolved, Dataset, Layout, Model, ModelError, ModelKind, ModelOptions, Params, Resolved};
use crate::autodiff::{Operand, Tape, Var};
use crate::estimands::{gformula_tsb, MixtureComponent};
use crate::numkit::{SeededRng, HALF_LN_2PI};
use crate::sampler::Constraint;

pub const MAX_COMPONENTS: usize = 50;

const COMPONENT_BLOCKS: [&str; 8] = ["eta0", "eta1", "eta2", "sigma", "gamma0", "gamma1", "theta0", "phi"];

pub struct TsbModel {
    layout: Layout,
    k: usize,
    y: Vec<Option<f64>>,
    a: Vec<u8>,
    l: Vec<f64>,
    /// Index into `y_miss` for each missing row.
    miss_slot: Vec<Option<usize>>,
    miss_treated: Vec<usize>,
    miss_control: Vec<usize>,
    y_miss_offset: usize,
    init_y: f64,
    n_mc: usize,
}

impl TsbModel {
    pub fn new(data: &Dataset, sens: &[(String, Resolved)], options: &ModelOptions) -> Result<Self, ModelError> {
        let k = options.components;
        if !(1..=MAX_COMPONENTS).contains(&k) {
            return Err(ModelError::Config(format!(
                "number of mixture components must be between 1 and {MAX_COMPONENTS}, got {k}"
            )));
        }
        if options.n_mc == 0 {
            return Err(ModelError::Config("n_mc must be positive".into()));
        }
        let Some(init_y) = data.observed_mean() else {
            return Err(ModelError::Mismatch {
                model: "tsb-mnar",
                detail: "no observed outcomes".into(),
            });
        };
        let mut layout = Layout::new();
        for name in COMPONENT_BLOCKS {
            let c = if matches!(name, "sigma" | "phi") {
                Constraint::POSITIVE
            } else {
                Constraint::Unbounded
            };
            layout.vector(name, k, c);
        }
        layout.vector("v", k - 1, Constraint::UNIT);
        match options.alpha {
            Some(a) if a > 0.0 && a.is_finite() => {
                layout.fixed("alpha", a);
            }
            Some(a) => return Err(ModelError::Config(format!("alpha must be positive, got {a}"))),
            None => {
                layout.scalar("alpha", Constraint::POSITIVE);
            }
        }
        let y_miss_offset = layout.dim();
        let n_missing = data.n_missing();
        layout.vector("y_miss", n_missing, Constraint::Unbounded);
        for name in ["xi0", "xi1", "xi3"] {
            layout.sensitivity(name, Constraint::Unbounded, resolved(sens, name))?;
        }
        let mut miss_slot = Vec::with_capacity(data.n());
        let (mut miss_treated, mut miss_control) = (Vec::new(), Vec::new());
        let mut next = 0;
        for i in 0..data.n() {
            if data.y()[i].is_none() {
                miss_slot.push(Some(next));
                if data.a()[i] == 1 {
                    miss_treated.push(next);
                } else {
                    miss_control.push(next);
                }
                next += 1;
            } else {
                miss_slot.push(None);
            }
        }
        Ok(Self {
            layout,
            k,
            y: data.y().to_vec(),
            a: data.a().to_vec(),
            l: data.l().to_vec(),
            miss_slot,
            miss_treated,
            miss_control,
            y_miss_offset,
            init_y,
            n_mc: options.n_mc,
        })
    }

    pub fn components(&self) -> usize {
        self.k
    }

    /// Component parameters and weights of one constrained draw.
    pub fn mixture(&self, p: &Params<'_, f64>) -> (Vec<MixtureComponent>, Vec<f64>) {
        let [eta0, eta1, eta2, sigma, gamma0, gamma1, theta0, phi] = COMPONENT_BLOCKS.map(|n| p.block(n));
        let comps = (0..self.k)
            .map(|j| MixtureComponent {
                eta: [eta0[j], eta1[j], eta2[j]],
                sigma: sigma[j],
                gamma: [gamma0[j], gamma1[j]],
                theta0: theta0[j],
                phi: phi[j],
            })
            .collect();
        let mut nu = Vec::with_capacity(self.k);
        let mut rest = 1.0;
        for &v in p.block("v") {
            nu.push(v * rest);
            rest *= 1.0 - v;
        }
        nu.push(rest);
        (comps, nu)
    }
}

impl Model for TsbModel {
    fn kind(&self) -> ModelKind {
        ModelKind::TsbMnar
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn log_target<'t>(&self, tape: &'t Tape, p: &Params<'_, Var<'t>>) -> Var<'t> {
        let [eta0, eta1, eta2, sigma, gamma0, gamma1, theta0, phi] = COMPONENT_BLOCKS.map(|n| p.block(n));
        let v = p.block("v");
        let alpha = p.get("alpha");
        let y_miss = p.block("y_miss");
        let [xi0, xi1, xi3] = ["xi0", "xi1", "xi3"].map(|n| p.get(n));
        let k = self.k;

        let mut terms = Vec::with_capacity(self.y.len() * 2 + 10 * k);
        for block in [eta0, eta1, eta2, gamma0, gamma1, theta0] {
            for &x in block {
                terms.push(tape.normal_lpdf(x, 0.0, 3.0));
            }
        }
        for &s in sigma.iter().chain(phi) {
            terms.push(tape.half_normal_lpdf(s, 2.0));
        }
        for &vj in v {
            terms.push(tape.beta_lpdf(vj, 1.0, alpha));
        }
        if self.layout.block("alpha").is_some_and(|b| b.is_sampled()) {
            terms.push(tape.gamma_lpdf(alpha, 1.0, 1.0));
        }

        let log_nu = log_stick_breaking(tape, v);
        let comps: Vec<ComponentVars> = (0..k)
            .map(|j| ComponentVars::new([
                log_nu[j], eta0[j], eta1[j], eta2[j], sigma[j], gamma0[j], gamma1[j], theta0[j], phi[j],
            ]))
            .collect();
        let mut scratch = RowScratch::with_components(k);
        let treated_miss = xi0 + xi1;
        for i in 0..self.y.len() {
            let (a, l) = (self.a[i], self.l[i]);
            let y: Operand<'t> = match self.miss_slot[i] {
                Some(s) => y_miss[s].into(),
                None => self.y[i].expect("observed").into(),
            };
            terms.push(mixture_row(tape, &comps, y, a, l, &mut scratch));
            let delta = u8::from(self.miss_slot[i].is_some());
            let lin = if a == 1 {
                let ay = match y {
                    Operand::Var(yv) => xi3 * yv,
                    Operand::Const(c) => xi3 * c,
                };
                treated_miss + ay
            } else {
                xi0
            };
            terms.push(tape.bernoulli_logit_lpmf(delta, lin));
        }
        tape.sum(&terms)
    }

    fn generated_names(&self) -> Vec<String> {
        let mut names = vec!["ate".to_string()];
        if !self.miss_treated.is_empty() {
            names.push("ymiss_treated_mean".into());
        }
        if !self.miss_control.is_empty() {
            names.push("ymiss_control_mean".into());
        }
        names
    }

    fn generated(&self, p: &Params<'_, f64>, rng: &mut SeededRng, out: &mut Vec<f64>) -> Result<(), ModelError> {
        let (comps, nu) = self.mixture(p);
        out.push(gformula_tsb(&comps, &nu, self.n_mc, rng)?);
        let y_miss = p.block("y_miss");
        for group in [&self.miss_treated, &self.miss_control] {
            if !group.is_empty() {
                out.push(group.iter().map(|&s| y_miss[s]).sum::<f64>() / group.len() as f64);
            }
        }
        Ok(())
    }

    fn init_hint(&self, z: &mut [f64]) {
        let n_missing = self.miss_treated.len() + self.miss_control.len();
        for zi in &mut z[self.y_miss_offset..self.y_miss_offset + n_missing] {
            *zi = self.init_y;
        }
    }
}


/// Tape ids and values of one component's parameters, in the order
/// log weight, eta0, eta1, eta2, sigma, gamma0, gamma1, theta0, phi.
struct ComponentVars {
    ids: [u32; 9],
    x: [f64; 9],
    ln_sigma: f64,
    inv_sigma: f64,
    ln_phi: f64,
    inv_phi: f64,
}

impl ComponentVars {
    fn new(vars: [Var<'_>; 9]) -> Self {
        let x = vars.map(|v| v.value());
        Self {
            ids: vars.map(|v| v.id() as u32),
            x,
            ln_sigma: x[4].ln(),
            inv_sigma: 1.0 / x[4],
            ln_phi: x[8].ln(),
            inv_phi: 1.0 / x[8],
        }
    }
}

#[derive(Default)]
struct RowScratch {
    t: Vec<f64>,
    r: Vec<f64>,
    s: Vec<f64>,
    p_treat: Vec<f64>,
    parents: Vec<u32>,
    partials: Vec<f64>,
}

impl RowScratch {
    fn with_components(k: usize) -> Self {
        Self {
            parents: Vec::with_capacity(9 * k + 1),
            partials: Vec::with_capacity(9 * k + 1),
            ..Self::default()
        }
    }
}

/// `log sum_k nu_k N(y; eta0 + eta1 l + eta2 a, sigma) Bernoulli(a; expit(gamma0 + gamma1 l)) N(l; theta0, phi)`
/// recorded as one node with analytic partials.
fn mixture_row<'t>(
    tape: &'t Tape,
    comps: &[ComponentVars],
    y: Operand<'t>,
    a: u8,
    l: f64,
    sc: &mut RowScratch,
) -> Var<'t> {
    let af = f64::from(a);
    let yv = y.value();
    sc.t.clear();
    sc.r.clear();
    sc.s.clear();
    sc.p_treat.clear();
    let mut max = f64::NEG_INFINITY;
    for c in comps {
        let x = &c.x;
        let r = (yv - (x[1] + x[2] * l + x[3] * af)) * c.inv_sigma;
        let g = x[5] + x[6] * l;
        // One exponential serves both expit(g) and log expit(+-g).
        let e = (-g.abs()).exp();
        let ln_denom = e.ln_1p();
        let p = if g >= 0.0 { 1.0 / (1.0 + e) } else { e / (1.0 + e) };
        let treat = match (a == 1, g >= 0.0) {
            (true, true) | (false, false) => -ln_denom,
            _ => -g.abs() - ln_denom,
        };
        let s = (l - x[7]) * c.inv_phi;
        let t = x[0] - 0.5 * r * r - c.ln_sigma + treat - 0.5 * s * s - c.ln_phi - 2.0 * HALF_LN_2PI;
        max = max.max(t);
        sc.t.push(t);
        sc.r.push(r);
        sc.s.push(s);
        sc.p_treat.push(p);
    }
    let total: f64 = sc.t.iter().map(|t| (t - max).exp()).sum();
    let value = max + total.ln();
    sc.parents.clear();
    sc.partials.clear();
    let mut dy = 0.0;
    for (j, c) in comps.iter().enumerate() {
        let w = (sc.t[j] - value).exp();
        let (r, s) = (sc.r[j], sc.s[j]);
        let d_mean = w * r * c.inv_sigma;
        let d_treat = w * (af - sc.p_treat[j]);
        dy -= d_mean;
        let d = [
            w,
            d_mean,
            d_mean * l,
            d_mean * af,
            w * (r * r - 1.0) * c.inv_sigma,
            d_treat,
            d_treat * l,
            w * s * c.inv_phi,
            w * (s * s - 1.0) * c.inv_phi,
        ];
        sc.parents.extend_from_slice(&c.ids);
        sc.partials.extend_from_slice(&d);
    }
    if let Operand::Var(v) = y {
        sc.parents.push(v.id() as u32);
        sc.partials.push(dy);
    }
    tape.fused("mixture_row", value, &sc.parents, &sc.partials)
}
