//! Reverse-mode tape with precomputed local partials.
//!
//! Every recorded node stores the partial derivatives of its value with
//! respect to its parents at record time, so the reverse sweep is a single
//! sparse accumulation pass. Parents always precede children, which makes
//! the tape order a topological order by construction.

use std::fmt;

const UNTRACKED: u32 = u32::MAX;

/// A scalar that is either recorded on a [`Tape`] or an untracked constant.
///
/// The value travels with the handle so reading it never touches the tape.
#[derive(Clone, Copy, PartialEq)]
pub struct Var {
    node: u32,
    value: f64,
}

impl Var {
    pub const ZERO: Var = Var::constant(0.0);
    pub const ONE: Var = Var::constant(1.0);

    pub const fn constant(value: f64) -> Self {
        Var {
            node: UNTRACKED,
            value,
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.value
    }

    #[inline]
    pub fn is_tracked(self) -> bool {
        self.node != UNTRACKED
    }

    /// Tape index, or `None` for constants.
    pub fn node(self) -> Option<usize> {
        self.is_tracked().then_some(self.node as usize)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Some(n) => write!(f, "Var#{n}({})", self.value),
            None => write!(f, "Const({})", self.value),
        }
    }
}

/// One recorded node: its parents and the local partials toward them.
#[derive(Debug, Clone, PartialEq)]
pub struct TapeNode {
    pub parents: Vec<(usize, f64)>,
}

/// Wengert list of scalar nodes.
#[derive(Debug, Clone)]
pub struct Tape {
    offsets: Vec<u32>,
    parents: Vec<u32>,
    partials: Vec<f64>,
    open: Option<usize>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            offsets: vec![0],
            parents: Vec::new(),
            partials: Vec::new(),
            open: None,
        }
    }

    pub fn with_capacity(nodes: usize, edges: usize) -> Self {
        let mut offsets = Vec::with_capacity(nodes + 1);
        offsets.push(0);
        Tape {
            offsets,
            parents: Vec::with_capacity(edges),
            partials: Vec::with_capacity(edges),
            open: None,
        }
    }

    /// Drops all nodes, keeping allocations.
    pub fn clear(&mut self) {
        self.offsets.truncate(1);
        self.parents.clear();
        self.partials.clear();
        self.open = None;
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of stored partial entries.
    pub fn edge_count(&self) -> usize {
        self.partials.len()
    }

    /// A fresh independent variable.
    pub fn var(&mut self, value: f64) -> Var {
        debug_assert!(self.open.is_none());
        let node = self.len() as u32;
        self.offsets.push(self.parents.len() as u32);
        Var { node, value }
    }

    /// Independent variables for a whole slice; they occupy consecutive
    /// node indices starting at the returned vector's first element.
    pub fn vars(&mut self, values: &[f64]) -> Vec<Var> {
        values.iter().map(|&v| self.var(v)).collect()
    }

    /// Starts a node; add parents with [`Tape::arg`], close with [`Tape::finish`].
    #[inline]
    pub fn begin(&mut self) {
        debug_assert!(self.open.is_none(), "nested node construction");
        self.open = Some(self.parents.len());
    }

    /// Adds a parent with local partial `d`; untracked parents are dropped.
    #[inline]
    pub fn arg(&mut self, parent: Var, d: f64) {
        if parent.node != UNTRACKED {
            self.parents.push(parent.node);
            self.partials.push(d);
        }
    }

    /// Closes the open node. A node without tracked parents is returned as
    /// a constant and not stored.
    #[inline]
    pub fn finish(&mut self, value: f64) -> Var {
        let start = self.open.take().expect("finish without begin");
        if self.parents.len() == start {
            return Var::constant(value);
        }
        let node = self.len() as u32;
        self.offsets.push(self.parents.len() as u32);
        Var { node, value }
    }

    /// Records `value` with the given `(parent, partial)` pairs.
    pub fn push(&mut self, value: f64, args: &[(Var, f64)]) -> Var {
        self.begin();
        for &(p, d) in args {
            self.arg(p, d);
        }
        self.finish(value)
    }

    pub fn node(&self, index: usize) -> TapeNode {
        let (lo, hi) = (self.offsets[index] as usize, self.offsets[index + 1] as usize);
        TapeNode {
            parents: (lo..hi)
                .map(|k| (self.parents[k] as usize, self.partials[k]))
                .collect(),
        }
    }

    /// Adjoints of every node with respect to `output`.
    ///
    /// Entry `i` is d(output)/d(node i). For an untracked output every
    /// adjoint is zero.
    pub fn backward(&self, output: Var) -> Vec<f64> {
        let mut adjoints = Vec::new();
        self.backward_into(output, &mut adjoints);
        adjoints
    }

    /// Like [`Tape::backward`], reusing `adjoints` as the output buffer.
    pub fn backward_into(&self, output: Var, adjoints: &mut Vec<f64>) {
        adjoints.clear();
        adjoints.resize(self.len(), 0.0);
        let Some(root) = output.node() else {
            return;
        };
        adjoints[root] = 1.0;
        for n in (0..=root).rev() {
            let a = adjoints[n];
            if a == 0.0 {
                continue;
            }
            let (lo, hi) = (self.offsets[n] as usize, self.offsets[n + 1] as usize);
            for k in lo..hi {
                let p = self.parents[k] as usize;
                adjoints[p] += self.partials[k] * a;
            }
        }
    }

    // ---- elementary arithmetic ------------------------------------------------

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.begin();
        self.arg(a, 1.0);
        self.arg(b, 1.0);
        self.finish(a.value + b.value)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.begin();
        self.arg(a, 1.0);
        self.arg(b, -1.0);
        self.finish(a.value - b.value)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.begin();
        self.arg(a, b.value);
        self.arg(b, a.value);
        self.finish(a.value * b.value)
    }

    pub fn div(&mut self, a: Var, b: Var) -> Var {
        let q = a.value / b.value;
        self.begin();
        self.arg(a, 1.0 / b.value);
        self.arg(b, -q / b.value);
        self.finish(q)
    }

    pub fn neg(&mut self, a: Var) -> Var {
        self.scale(a, -1.0)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        self.begin();
        self.arg(a, c);
        self.finish(a.value * c)
    }

    /// `c * a + shift`.
    pub fn affine(&mut self, a: Var, c: f64, shift: f64) -> Var {
        self.begin();
        self.arg(a, c);
        self.finish(c * a.value + shift)
    }

    pub fn add_const(&mut self, a: Var, c: f64) -> Var {
        self.affine(a, 1.0, c)
    }

    pub fn unary(&mut self, a: Var, f: Unary) -> Var {
        let (v, d) = f.eval1(a.value);
        self.begin();
        self.arg(a, d);
        self.finish(v)
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.unary(a, Unary::Square)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.unary(a, Unary::Exp)
    }

    pub fn sin(&mut self, a: Var) -> Var {
        self.unary(a, Unary::Sin)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(a, Unary::Tanh)
    }

    pub fn sum(&mut self, terms: &[Var]) -> Var {
        self.begin();
        let mut s = 0.0;
        for &t in terms {
            s += t.value;
            self.arg(t, 1.0);
        }
        self.finish(s)
    }

    /// `sum_k w_k * a_k` with constant weights.
    pub fn weighted_sum(&mut self, terms: &[(f64, Var)]) -> Var {
        self.begin();
        let mut s = 0.0;
        for &(w, t) in terms {
            s += w * t.value;
            self.arg(t, w);
        }
        self.finish(s)
    }

    /// `sum_k (a_k - target_k)^2` in one node.
    pub fn sum_sq_diff(&mut self, outputs: &[Var], targets: &[f64]) -> Var {
        assert_eq!(outputs.len(), targets.len());
        self.begin();
        let mut s = 0.0;
        for (&o, &t) in outputs.iter().zip(targets) {
            let r = o.value - t;
            s += r * r;
            self.arg(o, 2.0 * r);
        }
        self.finish(s)
    }

    /// `sum_k a_k * b_k` in one node.
    pub fn dot(&mut self, a: &[Var], b: &[Var]) -> Var {
        assert_eq!(a.len(), b.len());
        self.begin();
        let mut s = 0.0;
        for (&x, &y) in a.iter().zip(b) {
            s += x.value * y.value;
            self.arg(x, y.value);
            self.arg(y, x.value);
        }
        self.finish(s)
    }
}

/// Elementwise functions with closed-form derivatives through order 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unary {
    Exp,
    Sin,
    Cos,
    Tanh,
    Sigmoid,
    Silu,
    Square,
}

impl Unary {
    /// Value and first derivative.
    #[inline]
    pub fn eval1(self, x: f64) -> (f64, f64) {
        match self {
            Unary::Exp => {
                let e = x.exp();
                (e, e)
            }
            Unary::Sin => (x.sin(), x.cos()),
            Unary::Cos => (x.cos(), -x.sin()),
            Unary::Tanh => {
                let t = x.tanh();
                (t, 1.0 - t * t)
            }
            Unary::Sigmoid => {
                let s = sigmoid(x);
                (s, s * (1.0 - s))
            }
            Unary::Silu => {
                let s = sigmoid(x);
                (x * s, s + x * s * (1.0 - s))
            }
            Unary::Square => (x * x, 2.0 * x),
        }
    }

    /// `[f, f', f'', f''']` at `x`.
    #[inline]
    pub fn eval3(self, x: f64) -> [f64; 4] {
        match self {
            Unary::Exp => {
                let e = x.exp();
                [e; 4]
            }
            Unary::Sin => {
                let (s, c) = x.sin_cos();
                [s, c, -s, -c]
            }
            Unary::Cos => {
                let (s, c) = x.sin_cos();
                [c, -s, -c, s]
            }
            Unary::Tanh => {
                let t = x.tanh();
                let q = 1.0 - t * t;
                [t, q, -2.0 * t * q, q * (6.0 * t * t - 2.0)]
            }
            Unary::Sigmoid => {
                let [s, d1, d2, d3] = sigmoid3(x);
                [s, d1, d2, d3]
            }
            Unary::Silu => {
                let [s, d1, d2, d3] = sigmoid3(x);
                [x * s, s + x * d1, 2.0 * d1 + x * d2, 3.0 * d2 + x * d3]
            }
            Unary::Square => [x * x, 2.0 * x, 2.0, 0.0],
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        self.eval1(x).0
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn sigmoid3(x: f64) -> [f64; 4] {
    let s = sigmoid(x);
    let d1 = s * (1.0 - s);
    let d2 = d1 * (1.0 - 2.0 * s);
    let d3 = d2 * (1.0 - 2.0 * s) - 2.0 * d1 * d1;
    [s, d1, d2, d3]
}
