use std::cell::RefCell;
use std::fmt;

use super::partials::{fixed_partials, OpKind};
use super::AdError;

#[derive(Default)]
struct Inner {
    values: Vec<f64>,
    ops: Vec<OpKind>,
    /// Node `i` owns edges `edge_end[i-1]..edge_end[i]`.
    edge_end: Vec<u32>,
    parents: Vec<u32>,
    partials: Vec<f64>,
    error: Option<AdError>,
}

/// Single-owner recording of one function evaluation.
#[derive(Default)]
pub struct Tape {
    inner: RefCell<Inner>,
}

/// A node on a [`Tape`]. Cheap to copy; arithmetic records new nodes.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    pub(crate) tape: &'t Tape,
    pub(crate) id: u32,
    pub(crate) value: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Var(#{} = {})", self.id, self.value)
    }
}

impl<'t> Var<'t> {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn id(&self) -> usize {
        self.id as usize
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }
}

/// Adjoints of every node with respect to one output.
#[derive(Debug, Clone)]
pub struct Gradient {
    adjoints: Vec<f64>,
}

impl Gradient {
    pub fn wrt(&self, v: Var<'_>) -> f64 {
        self.adjoints.get(v.id as usize).copied().unwrap_or(0.0)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(nodes: usize) -> Self {
        Self::with_capacities(nodes, 2 * nodes)
    }

    /// Preallocates room for `nodes` nodes and `edges` parent links.
    pub fn with_capacities(nodes: usize, edges: usize) -> Self {
        Self {
            inner: RefCell::new(Inner {
                values: Vec::with_capacity(nodes),
                ops: Vec::with_capacity(nodes),
                edge_end: Vec::with_capacity(nodes),
                parents: Vec::with_capacity(edges),
                partials: Vec::with_capacity(edges),
                error: None,
            }),
        }
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().values.len()
    }

    /// Number of recorded parent links.
    pub fn edges(&self) -> usize {
        self.inner.borrow().parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input(&self, value: f64) -> Var<'_> {
        self.push(OpKind::Input, value, &[], &[])
    }

    pub fn constant(&self, value: f64) -> Var<'_> {
        self.push(OpKind::Constant, value, &[], &[])
    }

    /// First domain violation recorded on this tape, if any.
    pub fn error(&self) -> Option<AdError> {
        self.inner.borrow().error.clone()
    }

    /// The operation, parent ids and local partials recorded at `node`.
    pub fn node(&self, node: usize) -> Option<(OpKind, Vec<usize>, Vec<f64>)> {
        let inner = self.inner.borrow();
        if node >= inner.ops.len() {
            return None;
        }
        let start = if node == 0 { 0 } else { inner.edge_end[node - 1] as usize };
        let end = inner.edge_end[node] as usize;
        Some((
            inner.ops[node],
            inner.parents[start..end].iter().map(|&p| p as usize).collect(),
            inner.partials[start..end].to_vec(),
        ))
    }

    pub(crate) fn push(&self, op: OpKind, value: f64, parents: &[u32], partials: &[f64]) -> Var<'_> {
        let mut inner = self.inner.borrow_mut();
        let id = inner.values.len() as u32;
        inner.values.push(value);
        inner.ops.push(op);
        inner.parents.extend_from_slice(parents);
        inner.partials.extend_from_slice(partials);
        let end = inner.parents.len() as u32;
        inner.edge_end.push(end);
        Var {
            tape: self,
            id,
            value,
        }
    }

    pub(crate) fn fail(&self, node: u32, op: OpKind, detail: impl Into<String>) {
        let mut inner = self.inner.borrow_mut();
        if inner.error.is_none() {
            inner.error = Some(AdError::Domain {
                node: node as usize,
                op,
                detail: detail.into(),
            });
        }
    }

    /// Records a fixed-arity primitive over `args`. Constant operands are
    /// passed as `None` ids and receive no edge.
    pub(crate) fn record<const N: usize>(
        &self,
        op: OpKind,
        value: f64,
        ids: [Option<u32>; N],
        inputs: [f64; N],
    ) -> Var<'_> {
        let mut d = [0.0; 3];
        fixed_partials(op, &inputs, &mut d);
        let mut parents = [0u32; 3];
        let mut partials = [0.0; 3];
        let mut k = 0;
        for i in 0..N {
            if let Some(id) = ids[i] {
                parents[k] = id;
                partials[k] = d[i];
                k += 1;
            }
        }
        self.push(op, value, &parents[..k], &partials[..k])
    }

    /// Reverse sweep from `output`.
    pub fn gradient(&self, output: Var<'_>) -> Result<Gradient, AdError> {
        let inner = self.inner.borrow();
        if let Some(err) = &inner.error {
            return Err(err.clone());
        }
        let n = output.id as usize + 1;
        let mut adj = vec![0.0; n];
        adj[n - 1] = 1.0;
        for i in (0..n).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let start = if i == 0 { 0 } else { inner.edge_end[i - 1] as usize };
            let end = inner.edge_end[i] as usize;
            for e in start..end {
                adj[inner.parents[e] as usize] += a * inner.partials[e];
            }
        }
        Ok(Gradient { adjoints: adj })
    }
}
