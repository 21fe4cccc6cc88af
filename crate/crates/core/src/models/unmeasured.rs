//! Binary outcome with a latent standard normal confounder `u` per row.
//! Outcome: `expit(eta[0] + eta[1] a + eta[2] l + xi1 u)`; treatment:
//! `expit(gamma[0] + gamma[1] l + xi2 u)`.

use super::{
    binary_covariate_terms, normal_prior, require_binary, require_complete, resolved, Dataset, Layout, Model,
    ModelError, ModelKind, ModelOptions, Params, Resolved,
};
use crate::autodiff::{Tape, Var};
use crate::estimands::gformula_with_u;
use crate::numkit::{gauss_hermite_standard_normal, QuadratureRule, SeededRng};
use crate::sampler::Constraint;

const NAME: &str = "unmeasured";

pub struct UnmeasuredModel {
    layout: Layout,
    rows: Vec<(u8, u8, u8)>,
    l_counts: (usize, usize),
    rule: QuadratureRule,
}

impl UnmeasuredModel {
    pub fn new(data: &Dataset, sens: &[(String, Resolved)], options: &ModelOptions) -> Result<Self, ModelError> {
        require_complete(NAME, data)?;
        require_binary(NAME, data)?;
        let rule = gauss_hermite_standard_normal(options.quadrature_order)?;
        let mut layout = Layout::new();
        layout
            .vector("eta", 3, Constraint::Unbounded)
            .vector("gamma", 2, Constraint::Unbounded)
            .scalar("theta", Constraint::UNIT)
            .vector("u", data.n(), Constraint::Unbounded);
        for name in ["xi1", "xi2"] {
            layout.sensitivity(name, Constraint::Unbounded, resolved(sens, name))?;
        }
        let rows = (0..data.n())
            .map(|i| (data.y()[i].unwrap_or(0.0) as u8, data.a()[i], data.l()[i] as u8))
            .collect();
        Ok(Self {
            layout,
            rows,
            l_counts: data.covariate_counts(),
            rule,
        })
    }
}

impl Model for UnmeasuredModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Unmeasured
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn log_target<'t>(&self, tape: &'t Tape, p: &Params<'_, Var<'t>>) -> Var<'t> {
        let eta = p.block("eta");
        let gamma = p.block("gamma");
        let theta = p.get("theta");
        let u = p.block("u");
        let (xi1, xi2) = (p.get("xi1"), p.get("xi2"));
        let mut terms = Vec::with_capacity(3 * self.rows.len() + 10);
        normal_prior(tape, eta, 3.0, &mut terms);
        normal_prior(tape, gamma, 3.0, &mut terms);
        terms.push(tape.beta_lpdf(theta, 1.0, 1.0));
        // Indexed by [a][l] and [l].
        let outcome_base = [[eta[0], eta[0] + eta[2]], [eta[0] + eta[1], eta[0] + eta[1] + eta[2]]];
        let treat_base = [gamma[0], gamma[0] + gamma[1]];
        for (&(y, a, l), &ui) in self.rows.iter().zip(u) {
            let (a_i, l_i) = (a as usize, l as usize);
            terms.push(tape.bernoulli_logit_lpmf(y, outcome_base[a_i][l_i] + xi1 * ui));
            terms.push(tape.bernoulli_logit_lpmf(a, treat_base[l_i] + xi2 * ui));
            terms.push(tape.normal_lpdf(ui, 0.0, 1.0));
        }
        binary_covariate_terms(tape, theta, self.l_counts.0, self.l_counts.1, &mut terms);
        tape.sum(&terms)
    }

    fn generated_names(&self) -> Vec<String> {
        vec!["ate".into()]
    }

    fn generated(&self, p: &Params<'_, f64>, _: &mut SeededRng, out: &mut Vec<f64>) -> Result<(), ModelError> {
        let e = p.block("eta");
        out.push(gformula_with_u([e[0], e[1], e[2]], p.get("xi1"), p.get("theta"), &self.rule));
        Ok(())
    }
}
