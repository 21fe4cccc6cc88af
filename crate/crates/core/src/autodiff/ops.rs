//! Arithmetic, elementary functions and density kernels on [`Var`].

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use super::partials::{local_partials, OpKind};
use super::tape::{Tape, Var};
use crate::numkit;

/// A kernel argument: a recorded variable or a plain constant.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'t> {
    Const(f64),
    Var(Var<'t>),
}

impl Operand<'_> {
    pub fn value(&self) -> f64 {
        match self {
            Operand::Const(v) => *v,
            Operand::Var(v) => v.value,
        }
    }

    fn id(&self) -> Option<u32> {
        match self {
            Operand::Const(_) => None,
            Operand::Var(v) => Some(v.id),
        }
    }
}

impl From<f64> for Operand<'_> {
    fn from(v: f64) -> Self {
        Operand::Const(v)
    }
}

impl<'t> From<Var<'t>> for Operand<'t> {
    fn from(v: Var<'t>) -> Self {
        Operand::Var(v)
    }
}

impl<'t> Var<'t> {
    fn unary(self, op: OpKind, value: f64) -> Var<'t> {
        self.tape.record(op, value, [Some(self.id)], [self.value])
    }

    pub fn exp(self) -> Var<'t> {
        self.unary(OpKind::Exp, self.value.exp())
    }

    pub fn ln(self) -> Var<'t> {
        let v = self.unary(OpKind::Log, self.value.ln());
        if !(self.value >= 0.0) {
            self.tape.fail(v.id, OpKind::Log, format!("log of {}", self.value));
        }
        v
    }

    pub fn ln_1p(self) -> Var<'t> {
        let v = self.unary(OpKind::Log1p, self.value.ln_1p());
        if !(self.value >= -1.0) {
            self.tape.fail(v.id, OpKind::Log1p, format!("log1p of {}", self.value));
        }
        v
    }

    pub fn expit(self) -> Var<'t> {
        self.unary(OpKind::Expit, numkit::expit(self.value))
    }

    /// `log(expit(self))`, stable in both tails.
    pub fn log_expit(self) -> Var<'t> {
        self.unary(OpKind::LogExpit, numkit::log_expit(self.value))
    }

    pub fn square(self) -> Var<'t> {
        self.unary(OpKind::Square, self.value * self.value)
    }

    pub fn recip(self) -> Var<'t> {
        let v = self.unary(OpKind::Recip, 1.0 / self.value);
        if self.value == 0.0 {
            self.tape.fail(v.id, OpKind::Recip, "reciprocal of zero");
        }
        v
    }

    /// `scale * self + offset` as a single node.
    pub fn affine(self, scale: f64, offset: f64) -> Var<'t> {
        self.unary(
            OpKind::Affine { scale, offset },
            scale * self.value + offset,
        )
    }
}

impl Tape {
    pub fn sum<'t>(&'t self, terms: &[Var<'t>]) -> Var<'t> {
        let value = terms.iter().map(|v| v.value).sum();
        let parents: Vec<u32> = terms.iter().map(|v| v.id).collect();
        let partials = vec![1.0; terms.len()];
        self.push(OpKind::Sum, value, &parents, &partials)
    }

    /// `log(sum(exp(terms)))`, with softmax weights as partials.
    pub fn log_sum_exp<'t>(&'t self, terms: &[Var<'t>]) -> Var<'t> {
        let values: Vec<f64> = terms.iter().map(|v| v.value).collect();
        let parents: Vec<u32> = terms.iter().map(|v| v.id).collect();
        match (numkit::log_sum_exp(&values), local_partials(OpKind::LogSumExp, &values)) {
            (Ok(value), Ok(partials)) if value.is_finite() => {
                self.push(OpKind::LogSumExp, value, &parents, &partials)
            }
            (Ok(value), _) => {
                // All terms -inf (or one +inf): the value is exact, the slope is not.
                let v = self.push(OpKind::LogSumExp, value, &parents, &vec![0.0; terms.len()]);
                if value == f64::INFINITY || terms.is_empty() {
                    self.fail(v.id, OpKind::LogSumExp, "non-finite log_sum_exp");
                }
                v
            }
            (Err(e), _) => {
                let v = self.push(OpKind::LogSumExp, f64::NAN, &parents, &vec![0.0; terms.len()]);
                self.fail(v.id, OpKind::LogSumExp, e.to_string());
                v
            }
        }
    }

    /// Records a composite node whose value and partials the caller computed.
    /// A non-finite value is recorded as a domain error.
    pub(crate) fn fused<'t>(&'t self, name: &'static str, value: f64, parents: &[u32], partials: &[f64]) -> Var<'t> {
        let op = OpKind::Fused { name };
        let v = self.push(op, value, parents, partials);
        if !value.is_finite() {
            self.fail(v.id, op, format!("non-finite value {value}"));
        }
        v
    }

    fn kernel<'t, const N: usize>(
        &'t self,
        op: OpKind,
        args: [Operand<'t>; N],
        eval: impl FnOnce([f64; N]) -> Result<f64, numkit::NumError>,
    ) -> Var<'t> {
        let inputs = args.map(|a| a.value());
        let ids = args.map(|a| a.id());
        match eval(inputs) {
            Ok(value) => self.record(op, value, ids, inputs),
            Err(e) => {
                let v = self.push(op, f64::NAN, &[], &[]);
                self.fail(v.id, op, e.to_string());
                v
            }
        }
    }

    pub fn bernoulli_lpmf<'t>(&'t self, y: u8, p: impl Into<Operand<'t>>) -> Var<'t> {
        self.kernel(OpKind::BernoulliLpmf { y }, [p.into()], |[p]| {
            numkit::bernoulli_lpmf(y, p)
        })
    }

    pub fn bernoulli_logit_lpmf<'t>(&'t self, y: u8, eta: impl Into<Operand<'t>>) -> Var<'t> {
        self.kernel(OpKind::BernoulliLogitLpmf { y }, [eta.into()], |[eta]| {
            numkit::bernoulli_logit_lpmf(y, eta)
        })
    }

    pub fn normal_lpdf<'t>(
        &'t self,
        x: impl Into<Operand<'t>>,
        mu: impl Into<Operand<'t>>,
        sigma: impl Into<Operand<'t>>,
    ) -> Var<'t> {
        self.kernel(
            OpKind::NormalLpdf,
            [x.into(), mu.into(), sigma.into()],
            |[x, mu, sigma]| numkit::normal_lpdf(x, mu, sigma),
        )
    }

    pub fn beta_lpdf<'t>(
        &'t self,
        x: impl Into<Operand<'t>>,
        a: impl Into<Operand<'t>>,
        b: impl Into<Operand<'t>>,
    ) -> Var<'t> {
        self.kernel(
            OpKind::BetaLpdf,
            [x.into(), a.into(), b.into()],
            |[x, a, b]| numkit::beta_lpdf(x, a, b),
        )
    }

    pub fn gamma_lpdf<'t>(
        &'t self,
        x: impl Into<Operand<'t>>,
        shape: impl Into<Operand<'t>>,
        rate: impl Into<Operand<'t>>,
    ) -> Var<'t> {
        self.kernel(
            OpKind::GammaLpdf,
            [x.into(), shape.into(), rate.into()],
            |[x, shape, rate]| numkit::gamma_lpdf(x, shape, rate),
        )
    }

    pub fn half_normal_lpdf<'t>(
        &'t self,
        x: impl Into<Operand<'t>>,
        scale: impl Into<Operand<'t>>,
    ) -> Var<'t> {
        self.kernel(
            OpKind::HalfNormalLpdf,
            [x.into(), scale.into()],
            |[x, scale]| numkit::half_normal_lpdf(x, scale),
        )
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Var<'t>) -> Var<'t> {
        self.tape.record(
            OpKind::Add,
            self.value + rhs.value,
            [Some(self.id), Some(rhs.id)],
            [self.value, rhs.value],
        )
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        self.tape.record(
            OpKind::Sub,
            self.value - rhs.value,
            [Some(self.id), Some(rhs.id)],
            [self.value, rhs.value],
        )
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        self.tape.record(
            OpKind::Mul,
            self.value * rhs.value,
            [Some(self.id), Some(rhs.id)],
            [self.value, rhs.value],
        )
    }
}

impl<'t> Div for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: Var<'t>) -> Var<'t> {
        let v = self.tape.record(
            OpKind::Div,
            self.value / rhs.value,
            [Some(self.id), Some(rhs.id)],
            [self.value, rhs.value],
        );
        if rhs.value == 0.0 {
            self.tape.fail(v.id, OpKind::Div, "division by zero");
        }
        v
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        self.affine(-1.0, 0.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: f64) -> Var<'t> {
        self.affine(1.0, rhs)
    }
}

impl<'t> Add<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn add(self, rhs: Var<'t>) -> Var<'t> {
        rhs.affine(1.0, self)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: f64) -> Var<'t> {
        self.affine(1.0, -rhs)
    }
}

impl<'t> Sub<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        rhs.affine(-1.0, self)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: f64) -> Var<'t> {
        self.affine(rhs, 0.0)
    }
}

impl<'t> Mul<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        rhs.affine(self, 0.0)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: f64) -> Var<'t> {
        let v = self.affine(1.0 / rhs, 0.0);
        if rhs == 0.0 {
            self.tape.fail(v.id, OpKind::Div, "division by zero");
        }
        v
    }
}

impl<'t> Div<Var<'t>> for f64 {
    type Output = Var<'t>;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Var<'t>) -> Var<'t> {
        rhs.recip() * self
    }
}

impl<'t> AddAssign for Var<'t> {
    fn add_assign(&mut self, rhs: Var<'t>) {
        *self = *self + rhs;
    }
}

impl AddAssign<f64> for Var<'_> {
    fn add_assign(&mut self, rhs: f64) {
        *self = *self + rhs;
    }
}
