//! Seeded data-generating processes with known average treatment effects.
//!
//! Every generator draws (l, a, y) row by row from one stream seeded by the
//! spec, and draws the extra ingredients (latent confounder, recorded
//! treatment, missingness) from separate substreams. A spec whose extra
//! ingredient is switched off therefore reproduces the complete-data rows
//! of the same seed.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimands::{gformula_binary_l, gformula_with_u, mixture_effect_at, MixtureComponent};
use crate::models::{Dataset, ModelError};
use crate::numkit::{expit, gauss_hermite_standard_normal, normal_lpdf, SeededRng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid data-generating process: {0}")]
    Spec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Binary covariate, treatment and outcome:
/// `L ~ Bernoulli(theta)`, `A ~ Bernoulli(expit(gamma[0] + gamma[1] L))`,
/// `Y ~ Bernoulli(expit(eta[0] + eta[1] L + eta[2] A))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryDgp {
    pub n: usize,
    pub seed: u64,
    pub eta: [f64; 3],
    pub gamma: [f64; 2],
    pub theta: f64,
}

impl Default for BinaryDgp {
    fn default() -> Self {
        Self {
            n: 500,
            seed: 1,
            eta: [-0.5, 0.8, 0.7],
            gamma: [0.2, -0.6],
            theta: 0.4,
        }
    }
}

/// [`BinaryDgp`] plus a recorded treatment with
/// `P(recorded 1 | A = 1) = xi1` and `P(recorded 1 | A = 0) = xi2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisclassificationDgp {
    pub n: usize,
    pub seed: u64,
    pub eta: [f64; 3],
    pub gamma: [f64; 2],
    pub theta: f64,
    pub xi1: f64,
    pub xi2: f64,
}

impl Default for MisclassificationDgp {
    fn default() -> Self {
        let b = BinaryDgp::default();
        Self {
            n: b.n,
            seed: b.seed,
            eta: b.eta,
            gamma: b.gamma,
            theta: b.theta,
            xi1: 0.9,
            xi2: 0.1,
        }
    }
}

/// Latent `U ~ N(0, 1)`: `A ~ Bernoulli(expit(gamma[0] + gamma[1] L + xi2 U))`,
/// `Y ~ Bernoulli(expit(eta[0] + eta[1] A + eta[2] L + xi1 U))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnmeasuredDgp {
    pub n: usize,
    pub seed: u64,
    pub eta: [f64; 3],
    pub gamma: [f64; 2],
    pub theta: f64,
    pub xi1: f64,
    pub xi2: f64,
}

impl Default for UnmeasuredDgp {
    fn default() -> Self {
        Self {
            n: 300,
            seed: 1,
            eta: [0.0, 0.0, 0.5],
            gamma: [-0.2, 0.5],
            theta: 0.5,
            xi1: -1.5,
            xi2: 1.5,
        }
    }
}

/// [`BinaryDgp`] with outcomes masked by
/// `Delta ~ Bernoulli(expit(xi0 + xi1 A + xi2 Y + xi3 A Y))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnarBinaryDgp {
    pub n: usize,
    pub seed: u64,
    pub eta: [f64; 3],
    pub gamma: [f64; 2],
    pub theta: f64,
    pub xi0: f64,
    pub xi1: f64,
    #[serde(default)]
    pub xi2: f64,
    pub xi3: f64,
}

impl Default for MnarBinaryDgp {
    fn default() -> Self {
        Self {
            n: 1000,
            seed: 1,
            eta: [-0.5, 0.4, 0.8],
            gamma: [0.0, 0.3],
            theta: 0.5,
            xi0: 2.5,
            xi1: 0.0,
            xi2: 0.0,
            xi3: 0.75,
        }
    }
}

/// Finite mixture of linear-Gaussian components with outcomes masked by
/// `Delta ~ Bernoulli(expit(xi0 + xi1 A + xi3 A Y))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnarContinuousDgp {
    pub n: usize,
    pub seed: u64,
    pub weights: Vec<f64>,
    pub components: Vec<MixtureComponent>,
    pub xi0: f64,
    pub xi1: f64,
    pub xi3: f64,
}

impl Default for MnarContinuousDgp {
    fn default() -> Self {
        Self {
            n: 300,
            seed: 1,
            weights: vec![0.6, 0.4],
            components: vec![
                MixtureComponent {
                    eta: [0.0, 0.5, 1.0],
                    sigma: 0.5,
                    gamma: [0.0, 0.5],
                    theta0: -1.0,
                    phi: 0.7,
                },
                MixtureComponent {
                    eta: [1.0, -0.5, 0.5],
                    sigma: 0.5,
                    gamma: [0.3, -0.3],
                    theta0: 1.2,
                    phi: 0.6,
                },
            ],
            xi0: -1.0,
            xi1: 0.5,
            xi3: -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DgpFamily {
    Complete,
    Misclassification,
    Unmeasured,
    MnarBinary,
    MnarContinuous,
}

impl DgpFamily {
    pub const ALL: [DgpFamily; 5] = [
        DgpFamily::Complete,
        DgpFamily::Misclassification,
        DgpFamily::Unmeasured,
        DgpFamily::MnarBinary,
        DgpFamily::MnarContinuous,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DgpFamily::Complete => "complete",
            DgpFamily::Misclassification => "misclassification",
            DgpFamily::Unmeasured => "unmeasured",
            DgpFamily::MnarBinary => "mnar-binary",
            DgpFamily::MnarContinuous => "mnar-continuous",
        }
    }

    pub fn default_spec(self) -> DgpSpec {
        match self {
            DgpFamily::Complete => DgpSpec::Complete(BinaryDgp::default()),
            DgpFamily::Misclassification => DgpSpec::Misclassification(MisclassificationDgp::default()),
            DgpFamily::Unmeasured => DgpSpec::Unmeasured(UnmeasuredDgp::default()),
            DgpFamily::MnarBinary => DgpSpec::MnarBinary(MnarBinaryDgp::default()),
            DgpFamily::MnarContinuous => DgpSpec::MnarContinuous(MnarContinuousDgp::default()),
        }
    }
}

impl fmt::Display for DgpFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DgpFamily {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DgpFamily::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<&str> = DgpFamily::ALL.iter().map(|f| f.name()).collect();
            SynthError::Spec(format!("unknown family {s:?} (expected one of: {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DgpSpec {
    Complete(BinaryDgp),
    Misclassification(MisclassificationDgp),
    Unmeasured(UnmeasuredDgp),
    MnarBinary(MnarBinaryDgp),
    MnarContinuous(MnarContinuousDgp),
}

impl DgpSpec {
    pub fn family(&self) -> DgpFamily {
        match self {
            DgpSpec::Complete(_) => DgpFamily::Complete,
            DgpSpec::Misclassification(_) => DgpFamily::Misclassification,
            DgpSpec::Unmeasured(_) => DgpFamily::Unmeasured,
            DgpSpec::MnarBinary(_) => DgpFamily::MnarBinary,
            DgpSpec::MnarContinuous(_) => DgpFamily::MnarContinuous,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            DgpSpec::Complete(s) => s.seed,
            DgpSpec::Misclassification(s) => s.seed,
            DgpSpec::Unmeasured(s) => s.seed,
            DgpSpec::MnarBinary(s) => s.seed,
            DgpSpec::MnarContinuous(s) => s.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            DgpSpec::Complete(s) => s.seed = seed,
            DgpSpec::Misclassification(s) => s.seed = seed,
            DgpSpec::Unmeasured(s) => s.seed = seed,
            DgpSpec::MnarBinary(s) => s.seed = seed,
            DgpSpec::MnarContinuous(s) => s.seed = seed,
        }
    }

    pub fn generate(&self) -> Result<Synthetic, SynthError> {
        match self {
            DgpSpec::Complete(s) => gen_complete(s),
            DgpSpec::Misclassification(s) => gen_misclassified(s),
            DgpSpec::Unmeasured(s) => gen_unmeasured(s),
            DgpSpec::MnarBinary(s) => gen_mnar_binary(s),
            DgpSpec::MnarContinuous(s) => gen_mnar_continuous(s),
        }
    }
}

/// A generated dataset and the effect implied by its generating parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub data: Dataset,
    pub true_ate: f64,
}

fn check(cond: bool, what: &str) -> Result<(), SynthError> {
    if cond {
        Ok(())
    } else {
        Err(SynthError::Spec(what.to_string()))
    }
}

fn open_unit(p: f64) -> bool {
    p > 0.0 && p < 1.0
}

fn finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

fn check_binary(n: usize, eta: &[f64; 3], gamma: &[f64; 2], theta: f64) -> Result<(), SynthError> {
    check(n >= 1, "n must be at least 1")?;
    check(finite(eta) && finite(gamma), "coefficients must be finite")?;
    check(open_unit(theta), "theta must lie in (0, 1)")
}

struct BinaryRow {
    l: u8,
    a: u8,
    y: u8,
}

fn binary_rows(n: usize, eta: &[f64; 3], gamma: &[f64; 2], theta: f64, rng: &mut SeededRng) -> Vec<BinaryRow> {
    (0..n)
        .map(|_| {
            let l = u8::from(rng.bernoulli(theta));
            let lf = f64::from(l);
            let a = u8::from(rng.bernoulli(expit(gamma[0] + gamma[1] * lf)));
            let y = u8::from(rng.bernoulli(expit(eta[0] + eta[1] * lf + eta[2] * f64::from(a))));
            BinaryRow { l, a, y }
        })
        .collect()
}

fn to_dataset(rows: &[BinaryRow], a: impl Fn(usize) -> u8, missing: impl Fn(usize) -> bool) -> Result<Dataset, SynthError> {
    Ok(Dataset::new(
        rows.iter()
            .enumerate()
            .map(|(i, r)| (!missing(i)).then_some(f64::from(r.y)))
            .collect(),
        (0..rows.len()).map(a).collect(),
        rows.iter().map(|r| f64::from(r.l)).collect(),
    )?)
}

pub fn gen_complete(spec: &BinaryDgp) -> Result<Synthetic, SynthError> {
    check_binary(spec.n, &spec.eta, &spec.gamma, spec.theta)?;
    let mut rng = SeededRng::new(spec.seed);
    let rows = binary_rows(spec.n, &spec.eta, &spec.gamma, spec.theta, &mut rng);
    Ok(Synthetic {
        data: to_dataset(&rows, |i| rows[i].a, |_| false)?,
        true_ate: gformula_binary_l(spec.eta, spec.theta),
    })
}

/// The returned treatment column holds the recorded treatment.
pub fn gen_misclassified(spec: &MisclassificationDgp) -> Result<Synthetic, SynthError> {
    check_binary(spec.n, &spec.eta, &spec.gamma, spec.theta)?;
    check(open_unit(spec.xi1) && open_unit(spec.xi2), "xi1 and xi2 must lie in (0, 1)")?;
    let mut rng = SeededRng::new(spec.seed);
    let rows = binary_rows(spec.n, &spec.eta, &spec.gamma, spec.theta, &mut rng);
    let mut side = rng.substream(1);
    let recorded: Vec<u8> = rows
        .iter()
        .map(|r| u8::from(side.bernoulli(if r.a == 1 { spec.xi1 } else { spec.xi2 })))
        .collect();
    Ok(Synthetic {
        data: to_dataset(&rows, |i| recorded[i], |_| false)?,
        true_ate: gformula_binary_l(spec.eta, spec.theta),
    })
}

pub fn gen_unmeasured(spec: &UnmeasuredDgp) -> Result<Synthetic, SynthError> {
    check_binary(spec.n, &spec.eta, &spec.gamma, spec.theta)?;
    check(spec.xi1.is_finite() && spec.xi2.is_finite(), "xi1 and xi2 must be finite")?;
    let mut rng = SeededRng::new(spec.seed);
    let mut side = rng.substream(1);
    let (g, e) = (&spec.gamma, &spec.eta);
    let rows: Vec<BinaryRow> = (0..spec.n)
        .map(|_| {
            let u = side.standard_normal();
            let l = u8::from(rng.bernoulli(spec.theta));
            let lf = f64::from(l);
            let a = u8::from(rng.bernoulli(expit(g[0] + g[1] * lf + spec.xi2 * u)));
            let y = u8::from(rng.bernoulli(expit(e[0] + e[1] * f64::from(a) + e[2] * lf + spec.xi1 * u)));
            BinaryRow { l, a, y }
        })
        .collect();
    let rule = gauss_hermite_standard_normal(32).expect("order 32 is supported");
    Ok(Synthetic {
        data: to_dataset(&rows, |i| rows[i].a, |_| false)?,
        true_ate: gformula_with_u(spec.eta, spec.xi1, spec.theta, &rule),
    })
}

pub fn gen_mnar_binary(spec: &MnarBinaryDgp) -> Result<Synthetic, SynthError> {
    check_binary(spec.n, &spec.eta, &spec.gamma, spec.theta)?;
    check(finite(&[spec.xi0, spec.xi1, spec.xi2, spec.xi3]), "missingness coefficients must be finite")?;
    let mut rng = SeededRng::new(spec.seed);
    let rows = binary_rows(spec.n, &spec.eta, &spec.gamma, spec.theta, &mut rng);
    let mut side = rng.substream(2);
    let missing: Vec<bool> = rows
        .iter()
        .map(|r| {
            let (a, y) = (f64::from(r.a), f64::from(r.y));
            side.bernoulli(expit(spec.xi0 + spec.xi1 * a + spec.xi2 * y + spec.xi3 * a * y))
        })
        .collect();
    Ok(Synthetic {
        data: to_dataset(&rows, |i| rows[i].a, |i| missing[i])?,
        true_ate: gformula_binary_l(spec.eta, spec.theta),
    })
}

pub fn gen_mnar_continuous(spec: &MnarContinuousDgp) -> Result<Synthetic, SynthError> {
    check(spec.n >= 1, "n must be at least 1")?;
    check(!spec.components.is_empty(), "at least one mixture component is required")?;
    check(spec.weights.len() == spec.components.len(), "one weight per component is required")?;
    check(
        spec.weights.iter().all(|&w| w > 0.0) && (spec.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9,
        "weights must be positive and sum to 1",
    )?;
    check(
        spec.components.iter().all(|c| c.sigma > 0.0 && c.phi > 0.0),
        "component scales must be positive",
    )?;
    check(finite(&[spec.xi0, spec.xi1, spec.xi3]), "missingness coefficients must be finite")?;
    let mut rng = SeededRng::new(spec.seed);
    let mut side = rng.substream(2);
    let (mut y, mut a, mut l) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..spec.n {
        let c = &spec.components[rng.categorical(&spec.weights)];
        let li = rng.normal(c.theta0, c.phi);
        let ai = u8::from(rng.bernoulli(expit(c.gamma[0] + c.gamma[1] * li)));
        let yi = rng.normal(c.eta[0] + c.eta[1] * li + c.eta[2] * f64::from(ai), c.sigma);
        let af = f64::from(ai);
        let miss = side.bernoulli(expit(spec.xi0 + spec.xi1 * af + spec.xi3 * af * yi));
        y.push((!miss).then_some(yi));
        a.push(ai);
        l.push(li);
    }
    Ok(Synthetic {
        data: Dataset::new(y, a, l)?,
        true_ate: mixture_ate_by_grid(&spec.components, &spec.weights),
    })
}

/// ATE of a linear-Gaussian mixture by composite Simpson integration of the
/// induced-regression contrast against the mixture density of `L`, over
/// +/- 12 component standard deviations.
pub fn mixture_ate_by_grid(components: &[MixtureComponent], weights: &[f64]) -> f64 {
    if components.len() == 1 {
        return components[0].eta[2];
    }
    let lo = components.iter().map(|c| c.theta0 - 12.0 * c.phi).fold(f64::INFINITY, f64::min);
    let hi = components.iter().map(|c| c.theta0 + 12.0 * c.phi).fold(f64::NEG_INFINITY, f64::max);
    let steps = 20_000;
    let h = (hi - lo) / steps as f64;
    let density = |l: f64| -> f64 {
        components
            .iter()
            .zip(weights)
            .map(|(c, w)| w * normal_lpdf(l, c.theta0, c.phi).map_or(0.0, f64::exp))
            .sum()
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..=steps {
        let l = lo + i as f64 * h;
        let w = if i == 0 || i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let f = density(l);
        if f > 0.0 {
            num += w * f * mixture_effect_at(components, weights, l);
        }
        den += w * f;
    }
    num / den
}
