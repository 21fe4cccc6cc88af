//! Misclassified binary treatment. The recorded column holds the
//! error-prone treatment; the true treatment is summed out row by row.
//! `xi1` is P(recorded 1 | true 1) and `xi2` is P(recorded 1 | true 0).

use super::{
    binary_covariate_terms, normal_prior, require_binary, require_complete, resolved, Dataset, Layout, Model,
    ModelError, ModelKind, Params, Pattern, Resolved,
};
use crate::autodiff::{Tape, Var};
use crate::estimands::gformula_binary_l;
use crate::numkit::SeededRng;
use crate::sampler::Constraint;

const NAME: &str = "misclassification";

pub struct MisclassificationModel {
    layout: Layout,
    patterns: Vec<Pattern>,
    l_counts: (usize, usize),
}

impl MisclassificationModel {
    pub fn new(data: &Dataset, sens: &[(String, Resolved)]) -> Result<Self, ModelError> {
        require_complete(NAME, data)?;
        require_binary(NAME, data)?;
        let mut layout = Layout::new();
        layout
            .vector("eta", 3, Constraint::Unbounded)
            .vector("gamma", 2, Constraint::Unbounded)
            .scalar("theta", Constraint::UNIT);
        for name in ["xi1", "xi2"] {
            layout.sensitivity(name, Constraint::UNIT, resolved(sens, name))?;
        }
        Ok(Self {
            layout,
            patterns: data.binary_patterns(),
            l_counts: data.covariate_counts(),
        })
    }
}

impl Model for MisclassificationModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Misclassification
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn log_target<'t>(&self, tape: &'t Tape, p: &Params<'_, Var<'t>>) -> Var<'t> {
        let eta = p.block("eta");
        let gamma = p.block("gamma");
        let theta = p.get("theta");
        let (xi1, xi2) = (p.get("xi1"), p.get("xi2"));
        let mut terms = Vec::with_capacity(self.patterns.len() + 8);
        normal_prior(tape, eta, 3.0, &mut terms);
        normal_prior(tape, gamma, 3.0, &mut terms);
        terms.push(tape.beta_lpdf(theta, 1.0, 1.0));
        let treat_lin = [gamma[0], gamma[0] + gamma[1]];
        let outcome_base = [eta[0], eta[0] + eta[1]];
        for pat in &self.patterns {
            let y = pat.y.expect("complete data");
            let l = pat.l as usize;
            let treated = tape.bernoulli_lpmf(pat.a, xi1)
                + tape.bernoulli_logit_lpmf(y, outcome_base[l] + eta[2])
                + tape.bernoulli_logit_lpmf(1, treat_lin[l]);
            let untreated = tape.bernoulli_lpmf(pat.a, xi2)
                + tape.bernoulli_logit_lpmf(y, outcome_base[l])
                + tape.bernoulli_logit_lpmf(0, treat_lin[l]);
            terms.push(tape.log_sum_exp(&[treated, untreated]) * pat.count as f64);
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
