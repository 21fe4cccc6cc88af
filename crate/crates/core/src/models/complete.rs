//! Outcome and covariate model for fully observed binary data; the
//! treatment model factors out of the posterior of the estimand.

use super::{
    binary_covariate_terms, normal_prior, require_binary, require_complete, Dataset, Layout, Model, ModelError,
    ModelKind, Params, Pattern,
};
use crate::autodiff::{Tape, Var};
use crate::estimands::gformula_binary_l;
use crate::numkit::SeededRng;
use crate::sampler::Constraint;

const NAME: &str = "complete";

pub struct CompleteModel {
    layout: Layout,
    patterns: Vec<Pattern>,
    l_counts: (usize, usize),
}

impl CompleteModel {
    pub fn new(data: &Dataset) -> Result<Self, ModelError> {
        require_complete(NAME, data)?;
        require_binary(NAME, data)?;
        let mut layout = Layout::new();
        layout.vector("eta", 3, Constraint::Unbounded).scalar("theta", Constraint::UNIT);
        Ok(Self {
            layout,
            patterns: data.binary_patterns(),
            l_counts: data.covariate_counts(),
        })
    }
}

/// `eta[0] + eta[1] l + eta[2] a` for binary `l` and `a`.
pub(super) fn binary_linear<'t>(eta: &[Var<'t>], l: u8, a: u8) -> Var<'t> {
    let mut lin = eta[0];
    if l == 1 {
        lin += eta[1];
    }
    if a == 1 {
        lin += eta[2];
    }
    lin
}

impl Model for CompleteModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Complete
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn log_target<'t>(&self, tape: &'t Tape, p: &Params<'_, Var<'t>>) -> Var<'t> {
        let eta = p.block("eta");
        let theta = p.get("theta");
        let mut terms = Vec::with_capacity(self.patterns.len() + 6);
        normal_prior(tape, eta, 3.0, &mut terms);
        terms.push(tape.beta_lpdf(theta, 1.0, 1.0));
        for pat in &self.patterns {
            let y = pat.y.expect("complete data");
            let lin = binary_linear(eta, pat.l, pat.a);
            terms.push(tape.bernoulli_logit_lpmf(y, lin) * pat.count as f64);
        }
        binary_covariate_terms(tape, theta, self.l_counts.0, self.l_counts.1, &mut terms);
        tape.sum(&terms)
    }

    fn generated_names(&self) -> Vec<String> {
        vec!["ate".into()]
    }

    fn generated(&self, p: &Params<'_, f64>, _: &mut SeededRng, out: &mut Vec<f64>) -> Result<(), ModelError> {
        let e = p.block("eta");
        out.push(gformula_binary_l([e[0], e[1], e[2]], p.get("theta")));
        Ok(())
    }
}
