//! Binary outcome missing not at random. Missingness follows
//! `expit(xi0 + xi1 a + xi2 y + xi3 a y)`; missing outcomes are summed out.
//! The treatment model does not involve the estimand and is left out.

use super::{
    binary_covariate_terms, complete::binary_linear, normal_prior, require_binary, resolved, Dataset, Layout, Model,
    ModelError, ModelKind, Params, Pattern, Resolved,
};
use crate::autodiff::{Tape, Var};
use crate::estimands::gformula_binary_l;
use crate::numkit::SeededRng;
use crate::sampler::Constraint;

const NAME: &str = "mnar-binary";

pub struct MnarBinaryModel {
    layout: Layout,
    patterns: Vec<Pattern>,
    l_counts: (usize, usize),
}

impl MnarBinaryModel {
    pub fn new(data: &Dataset, sens: &[(String, Resolved)]) -> Result<Self, ModelError> {
        require_binary(NAME, data)?;
        let mut layout = Layout::new();
        layout.vector("eta", 3, Constraint::Unbounded).scalar("theta", Constraint::UNIT);
        for name in ["xi0", "xi1", "xi2", "xi3"] {
            layout.sensitivity(name, Constraint::Unbounded, resolved(sens, name))?;
        }
        Ok(Self {
            layout,
            patterns: data.binary_patterns(),
            l_counts: data.covariate_counts(),
        })
    }
}

impl Model for MnarBinaryModel {
    fn kind(&self) -> ModelKind {
        ModelKind::MnarBinary
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn log_target<'t>(&self, tape: &'t Tape, p: &Params<'_, Var<'t>>) -> Var<'t> {
        let eta = p.block("eta");
        let theta = p.get("theta");
        let [xi0, xi1, xi2, xi3] = ["xi0", "xi1", "xi2", "xi3"].map(|n| p.get(n));
        let mut terms = Vec::with_capacity(self.patterns.len() + 6);
        normal_prior(tape, eta, 3.0, &mut terms);
        terms.push(tape.beta_lpdf(theta, 1.0, 1.0));
        // Missingness linear predictor indexed by [a][y].
        let miss = [[xi0, xi0 + xi2], [xi0 + xi1, xi0 + xi1 + xi2 + xi3]];
        for pat in &self.patterns {
            let a = pat.a as usize;
            let lin = binary_linear(eta, pat.l, pat.a);
            let term = match pat.y {
                Some(y) => tape.bernoulli_logit_lpmf(0, miss[a][y as usize]) + tape.bernoulli_logit_lpmf(y, lin),
                None => {
                    let parts = [0u8, 1].map(|y| {
                        tape.bernoulli_logit_lpmf(1, miss[a][y as usize]) + tape.bernoulli_logit_lpmf(y, lin)
                    });
                    tape.log_sum_exp(&parts)
                }
            };
            terms.push(term * pat.count as f64);
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
