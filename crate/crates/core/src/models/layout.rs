//! Parameter layout shared by every model, and the adapter that turns a
//! model into an unconstrained log density for the sampler.

use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::{Model, ModelError, Resolved};
use crate::autodiff::{AdError, Tape};
use crate::numkit::SeededRng;
use crate::sampler::{Constraint, LogDensity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Role {
    Sampled,
    /// Sampled sensitivity parameter with a normal prior on its constrained value.
    Sensitivity { mean: f64, sd: f64 },
    /// Held at a value; enters the target as a constant.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    pub len: usize,
    pub scalar: bool,
    pub constraint: Constraint,
    pub role: Role,
    offset: usize,
}

impl Block {
    pub fn is_sampled(&self) -> bool {
        !matches!(self.role, Role::Fixed(_))
    }
}

/// Named parameter blocks. Fixed blocks take part in lookups but not in the
/// sampled vector.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layout {
    blocks: Vec<Block>,
    full_len: usize,
    dim: usize,
}

impl Layout {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, name: &str, len: usize, scalar: bool, constraint: Constraint, role: Role) {
        debug_assert!(self.blocks.iter().all(|b| b.name != name), "duplicate block {name}");
        self.blocks.push(Block {
            name: name.to_string(),
            len,
            scalar,
            constraint,
            role,
            offset: self.full_len,
        });
        self.full_len += len;
        if !matches!(role, Role::Fixed(_)) {
            self.dim += len;
        }
    }

    pub fn vector(&mut self, name: &str, len: usize, constraint: Constraint) -> &mut Self {
        self.push(name, len, false, constraint, Role::Sampled);
        self
    }

    pub fn scalar(&mut self, name: &str, constraint: Constraint) -> &mut Self {
        self.push(name, 1, true, constraint, Role::Sampled);
        self
    }

    pub fn fixed(&mut self, name: &str, value: f64) -> &mut Self {
        self.push(name, 1, true, Constraint::Unbounded, Role::Fixed(value));
        self
    }

    pub fn sensitivity(&mut self, name: &str, constraint: Constraint, r: Resolved) -> Result<&mut Self, ModelError> {
        match r {
            Resolved::Fixed(v) => {
                if !constraint.contains(v) {
                    return Err(ModelError::Domain(format!("{name} = {v} lies outside {constraint}")));
                }
                self.push(name, 1, true, constraint, Role::Fixed(v));
            }
            Resolved::Normal { mean, sd } => {
                self.push(name, 1, true, constraint, Role::Sensitivity { mean, sd });
            }
        }
        Ok(self)
    }

    /// Number of sampled scalars.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn full_len(&self) -> usize {
        self.full_len
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn range(&self, name: &str) -> Range<usize> {
        let b = self
            .block(name)
            .unwrap_or_else(|| panic!("layout has no block {name}"));
        b.offset..b.offset + b.len
    }

    /// Names of sampled scalars, `eta[0]` style for vector blocks.
    pub fn names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.dim);
        for b in self.blocks.iter().filter(|b| b.is_sampled()) {
            if b.scalar {
                out.push(b.name.clone());
            } else {
                out.extend((0..b.len).map(|i| format!("{}[{i}]", b.name)));
            }
        }
        out
    }

    /// Constraints of the sampled scalars, in sampled order.
    pub fn constraints(&self) -> Vec<Constraint> {
        self.blocks
            .iter()
            .filter(|b| b.is_sampled())
            .flat_map(|b| std::iter::repeat_n(b.constraint, b.len))
            .collect()
    }
}

/// Constrained values of every block, looked up by name.
#[derive(Clone, Copy)]
pub struct Params<'a, T> {
    layout: &'a Layout,
    values: &'a [T],
}

impl<'a, T: Copy> Params<'a, T> {
    pub fn new(layout: &'a Layout, values: &'a [T]) -> Self {
        debug_assert_eq!(values.len(), layout.full_len());
        Self { layout, values }
    }

    pub fn block(&self, name: &str) -> &'a [T] {
        &self.values[self.layout.range(name)]
    }

    pub fn get(&self, name: &str) -> T {
        self.values[self.layout.range(name).start]
    }

    pub fn layout(&self) -> &'a Layout {
        self.layout
    }
}

/// Adapts a [`Model`] to the sampler: unconstrained coordinates, Jacobian
/// terms, priors on sampled sensitivity parameters, and tracked quantities.
pub struct Posterior<'m> {
    model: &'m dyn Model,
    /// Tape sizes seen on the previous evaluation, used to preallocate.
    nodes_hint: AtomicUsize,
    edges_hint: AtomicUsize,
}

impl<'m> Posterior<'m> {
    pub fn new(model: &'m dyn Model) -> Self {
        let nodes = 64 * model.layout().full_len() + 1024;
        Self {
            model,
            nodes_hint: AtomicUsize::new(nodes),
            edges_hint: AtomicUsize::new(2 * nodes),
        }
    }

    pub fn model(&self) -> &'m dyn Model {
        self.model
    }

    /// Constrained values of all blocks for the unconstrained point `z`.
    pub fn constrain(&self, z: &[f64]) -> Vec<f64> {
        let layout = self.model.layout();
        let mut full = Vec::with_capacity(layout.full_len());
        let mut k = 0;
        for b in layout.blocks() {
            match b.role {
                Role::Fixed(v) => full.push(v),
                _ => {
                    for &u in &z[k..k + b.len] {
                        full.push(b.constraint.constrain(u).0);
                    }
                    k += b.len;
                }
            }
        }
        full
    }

    /// Unconstrained point for constrained values of the sampled scalars.
    pub fn unconstrain(&self, sampled: &[f64]) -> Result<Vec<f64>, ModelError> {
        let cons = self.model.layout().constraints();
        if sampled.len() != cons.len() {
            return Err(ModelError::Config(format!(
                "{} values for {} sampled parameters",
                sampled.len(),
                cons.len()
            )));
        }
        sampled
            .iter()
            .zip(&cons)
            .map(|(&x, c)| c.unconstrain(x).map_err(|e| ModelError::Domain(e.to_string())))
            .collect()
    }

    fn evaluate(&self, z: &[f64], grad: Option<&mut [f64]>, jacobian: bool) -> Result<f64, AdError> {
        let layout = self.model.layout();
        let tape = Tape::with_capacities(
            self.nodes_hint.load(Ordering::Relaxed),
            self.edges_hint.load(Ordering::Relaxed),
        );
        let mut inputs = Vec::with_capacity(z.len());
        let mut full = Vec::with_capacity(layout.full_len());
        let mut extra = Vec::new();
        let mut k = 0;
        for b in layout.blocks() {
            if let Role::Fixed(v) = b.role {
                full.push(tape.constant(v));
                continue;
            }
            for &u in &z[k..k + b.len] {
                let zi = tape.input(u);
                inputs.push(zi);
                let x = if jacobian {
                    let (x, lj) = b.constraint.constrain_var(zi);
                    if b.constraint != Constraint::Unbounded {
                        extra.push(lj);
                    }
                    x
                } else {
                    zi
                };
                if let Role::Sensitivity { mean, sd } = b.role {
                    extra.push(tape.normal_lpdf(x, mean, sd));
                }
                full.push(x);
            }
            k += b.len;
        }
        let params = Params::new(layout, &full);
        let mut total = self.model.log_target(&tape, &params);
        if !extra.is_empty() {
            total += tape.sum(&extra);
        }
        self.nodes_hint.fetch_max(tape.len(), Ordering::Relaxed);
        self.edges_hint.fetch_max(tape.edges(), Ordering::Relaxed);
        match grad {
            Some(g) => {
                let adj = tape.gradient(total)?;
                for (gi, v) in g.iter_mut().zip(&inputs) {
                    *gi = adj.wrt(*v);
                }
            }
            None => {
                if let Some(e) = tape.error() {
                    return Err(e);
                }
            }
        }
        Ok(total.value())
    }

    /// Log target on the constrained scale (no Jacobian), including the
    /// priors of sampled sensitivity parameters.
    pub fn log_target_constrained(&self, sampled: &[f64]) -> Result<f64, AdError> {
        self.evaluate(sampled, None, false)
    }

    /// Log density on the unconstrained scale, Jacobian included.
    pub fn log_density(&self, z: &[f64]) -> Result<f64, AdError> {
        self.evaluate(z, None, true)
    }
}

impl LogDensity for Posterior<'_> {
    fn dim(&self) -> usize {
        self.model.layout().dim()
    }

    fn log_density_grad(&self, x: &[f64], grad: &mut [f64]) -> Result<f64, AdError> {
        self.evaluate(x, Some(grad), true)
    }

    fn init_hint(&self, x: &mut [f64]) {
        self.model.init_hint(x);
    }

    fn quantity_names(&self) -> Vec<String> {
        let mut names = self.model.layout().names();
        names.extend(self.model.generated_names());
        names
    }

    fn quantities(&self, x: &[f64], rng: &mut SeededRng, out: &mut Vec<f64>) -> Result<(), String> {
        let full = self.constrain(x);
        let layout = self.model.layout();
        for b in layout.blocks().iter().filter(|b| b.is_sampled()) {
            out.extend_from_slice(&full[b.offset..b.offset + b.len]);
        }
        self.model
            .generated(&Params::new(layout, &full), rng, out)
            .map_err(|e| e.to_string())
    }
}
