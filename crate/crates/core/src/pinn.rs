//! Physics-informed losses for the heat and Helmholtz benchmarks.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{eval_with_input_derivs, Context, Dual2, Fwd2, Rev, Tape, Unary, Var};
use crate::error::{Error, Result};
use crate::layers::Network;
use crate::rng::substream;
use crate::train::Workspace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdeKind {
    /// `u_t = u_xx / (K pi)^2` on `[0,1]^2`, inputs `(x, t)`.
    Heat { k_freq: f64 },
    /// `u_xx + u_yy + k^2 u = q` on `[-3,3]^2`.
    Helmholtz { a1: f64, a2: f64, k: f64 },
}

/// Points with `x[axis] == value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub axis: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeProblem {
    pub name: String,
    pub kind: PdeKind,
    pub bounds: Vec<(f64, f64)>,
    pub segments: Vec<Segment>,
    /// Whether `exact` is available for error evaluation.
    pub has_exact: bool,
}

pub fn heat_problem(k_freq: f64) -> PdeProblem {
    let seg = |name: &str, axis, value| Segment {
        name: name.into(),
        axis,
        value,
    };
    PdeProblem {
        name: "heat".into(),
        kind: PdeKind::Heat { k_freq },
        bounds: vec![(0.0, 1.0), (0.0, 1.0)],
        segments: vec![seg("t=0", 1, 0.0), seg("x=0", 0, 0.0), seg("x=1", 0, 1.0)],
        has_exact: true,
    }
}

pub fn helmholtz_problem(a1: f64, a2: f64, k: f64) -> PdeProblem {
    let seg = |name: &str, axis, value| Segment {
        name: name.into(),
        axis,
        value,
    };
    PdeProblem {
        name: "helmholtz".into(),
        kind: PdeKind::Helmholtz { a1, a2, k },
        bounds: vec![(-3.0, 3.0), (-3.0, 3.0)],
        segments: vec![
            seg("x=-3", 0, -3.0),
            seg("x=3", 0, 3.0),
            seg("y=-3", 1, -3.0),
            seg("y=3", 1, 3.0),
        ],
        has_exact: true,
    }
}

impl PdeProblem {
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn exact(&self, x: &[f64]) -> f64 {
        match self.kind {
            PdeKind::Heat { k_freq } => (-x[1]).exp() * (k_freq * PI * x[0]).sin(),
            PdeKind::Helmholtz { a1, a2, .. } => (a1 * PI * x[0]).sin() * (a2 * PI * x[1]).sin(),
        }
    }

    /// Right-hand side `f` of `N[u] = f`.
    pub fn source(&self, x: &[f64]) -> f64 {
        match self.kind {
            PdeKind::Heat { .. } => 0.0,
            PdeKind::Helmholtz { a1, a2, k } => {
                let s = (a1 * PI * x[0]).sin() * (a2 * PI * x[1]).sin();
                (-(a1 * PI).powi(2) - (a2 * PI).powi(2) + k * k) * s
            }
        }
    }

    /// Boundary target `g` on segment `seg`.
    pub fn boundary_target(&self, seg: usize, x: &[f64]) -> f64 {
        match self.kind {
            PdeKind::Heat { k_freq } if seg == 0 => (k_freq * PI * x[0]).sin(),
            _ => 0.0,
        }
    }

    /// Input axes and whether each needs a second derivative.
    pub fn derivative_plan(&self) -> &'static [(usize, bool)] {
        match self.kind {
            PdeKind::Heat { .. } => &[(0, true), (1, false)],
            PdeKind::Helmholtz { .. } => &[(0, true), (1, true)],
        }
    }

    /// `N[u](x) - f(x)` from the per-axis derivatives in plan order.
    pub fn residual(&self, tape: &mut Tape, d: &[Dual2], x: &[f64]) -> Var {
        match self.kind {
            PdeKind::Heat { k_freq } => {
                let c = 1.0 / (k_freq * PI).powi(2);
                tape.weighted_sum(&[(1.0, d[1].d1), (-c, d[0].d2)])
            }
            PdeKind::Helmholtz { k, .. } => {
                let r = tape.weighted_sum(&[(1.0, d[0].d2), (1.0, d[1].d2), (k * k, d[0].v)]);
                tape.add_const(r, -self.source(x))
            }
        }
    }

    /// Plain-value residual from `[u, u_a, u_aa]` per plan axis.
    pub fn residual_value(&self, d: &[[f64; 3]], x: &[f64]) -> f64 {
        match self.kind {
            PdeKind::Heat { k_freq } => d[1][1] - d[0][2] / (k_freq * PI).powi(2),
            PdeKind::Helmholtz { k, .. } => d[0][2] + d[1][2] + k * k * d[0][0] - self.source(x),
        }
    }
}

/// The closed-form solution as a parameter-free network.
pub struct ExactSolution<'a>(pub &'a PdeProblem);

impl Network for ExactSolution<'_> {
    type Prepared<P: Copy> = ();

    fn n_inputs(&self) -> usize {
        self.0.dim()
    }
    fn n_outputs(&self) -> usize {
        1
    }
    fn n_params(&self) -> usize {
        0
    }
    fn prepare<C: Context>(&self, _: &mut C, _: &[C::P]) {}

    fn forward<C: Context>(&self, ctx: &mut C, _: &[C::P], _: &(), x: &[C::S]) -> Vec<C::S> {
        let out = match self.0.kind {
            PdeKind::Heat { k_freq } => {
                let e = ctx.s_affine(x[1], -1.0, 0.0);
                let e = ctx.s_unary(e, Unary::Exp);
                let s = ctx.s_affine(x[0], k_freq * PI, 0.0);
                let s = ctx.s_unary(s, Unary::Sin);
                ctx.s_mul(e, s)
            }
            PdeKind::Helmholtz { a1, a2, .. } => {
                let a = ctx.s_affine(x[0], a1 * PI, 0.0);
                let a = ctx.s_unary(a, Unary::Sin);
                let b = ctx.s_affine(x[1], a2 * PI, 0.0);
                let b = ctx.s_unary(b, Unary::Sin);
                ctx.s_mul(a, b)
            }
        };
        vec![out]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSet {
    pub interior: Vec<Vec<f64>>,
    /// `(point, target, segment index)`.
    pub boundary: Vec<(Vec<f64>, f64, usize)>,
}

/// Uniform i.i.d. samples: interior points strictly inside the box and
/// `n_boundary` points on each segment.
pub fn sample_collocation(problem: &PdeProblem, n_interior: usize, n_boundary: usize, seed: u64) -> CollocationSet {
    sample_collocation_with(problem, n_interior, n_boundary, &mut substream(seed, "collocation"))
}

pub fn sample_collocation_with(
    problem: &PdeProblem,
    n_interior: usize,
    n_boundary: usize,
    rng: &mut impl Rng,
) -> CollocationSet {
    let mut open = |lo: f64, hi: f64| loop {
        let v = lo + (hi - lo) * rng.random::<f64>();
        if v > lo && v < hi {
            break v;
        }
    };
    let interior = (0..n_interior)
        .map(|_| problem.bounds.iter().map(|&(lo, hi)| open(lo, hi)).collect())
        .collect();
    let mut boundary = Vec::with_capacity(n_boundary * problem.segments.len());
    for (s, seg) in problem.segments.iter().enumerate() {
        for _ in 0..n_boundary {
            let p: Vec<f64> = problem
                .bounds
                .iter()
                .enumerate()
                .map(|(a, &(lo, hi))| if a == seg.axis { seg.value } else { open(lo, hi) })
                .collect();
            let g = problem.boundary_target(s, &p);
            boundary.push((p, g, s));
        }
    }
    CollocationSet { interior, boundary }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinnLoss {
    pub loss: f64,
    pub interior: f64,
    pub boundary: f64,
    pub grad: Vec<f64>,
}

/// Interior points per tape.
const PINN_CHUNK: usize = 32;

/// `lc/Nc sum |N[u] - f|^2 + lb/Nb sum |u - g|^2` and its parameter gradient.
pub fn pinn_loss<N: Network>(
    net: &N,
    params: &[f64],
    problem: &PdeProblem,
    colloc: &CollocationSet,
    lambda_c: f64,
    lambda_b: f64,
    ws: &mut Workspace,
) -> Result<PinnLoss> {
    if net.n_inputs() != problem.dim() || net.n_outputs() != 1 {
        return Err(Error::Shape(format!(
            "problem '{}' needs a {}-input scalar network",
            problem.name,
            problem.dim()
        )));
    }
    let plan = problem.derivative_plan();
    let needed = if plan.iter().any(|&(_, s)| s) { 2 } else { 1 };
    if net.continuity() < needed {
        return Err(Error::Smoothness(format!(
            "problem '{}' needs C{needed} outputs, network is C{}",
            problem.name,
            net.continuity()
        )));
    }
    let mut grad = vec![0.0; params.len()];
    let mut interior = 0.0;
    let mut boundary = 0.0;
    let sc = if colloc.interior.is_empty() {
        0.0
    } else {
        lambda_c / colloc.interior.len() as f64
    };
    let sb = if colloc.boundary.is_empty() {
        0.0
    } else {
        lambda_b / colloc.boundary.len() as f64
    };

    let mut derivs = Vec::with_capacity(plan.len());
    for chunk in colloc.interior.chunks(PINN_CHUNK) {
        ws.tape.clear();
        let p = ws.tape.vars(params);
        let prep = net.prepare(&mut Fwd2::new(&mut ws.tape), &p);
        let mut parts = Vec::with_capacity(chunk.len());
        for x in chunk {
            derivs.clear();
            for &(axis, second) in plan {
                derivs.push(eval_with_input_derivs(&mut ws.tape, net, &p, &prep, x, axis, second)?);
            }
            let r = problem.residual(&mut ws.tape, &derivs, x);
            parts.push(ws.tape.square(r));
        }
        let total = ws.tape.sum(&parts);
        interior += sc * total.value();
        ws.accumulate(total, sc, &mut grad);
    }

    for chunk in colloc.boundary.chunks(4 * PINN_CHUNK) {
        ws.tape.clear();
        let p = ws.tape.vars(params);
        let mut ctx = Rev::new(&mut ws.tape);
        let prep = net.prepare(&mut ctx, &p);
        let mut outs = Vec::with_capacity(chunk.len());
        let mut targets = Vec::with_capacity(chunk.len());
        for (x, g, _) in chunk {
            let xs: Vec<Var> = x.iter().map(|&v| Var::constant(v)).collect();
            outs.push(net.forward(&mut ctx, &p, &prep, &xs)[0]);
            targets.push(*g);
        }
        let total = ws.tape.sum_sq_diff(&outs, &targets);
        boundary += sb * total.value();
        ws.accumulate(total, sb, &mut grad);
    }

    let loss = interior + boundary;
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("{} loss", problem.name)));
    }
    Ok(PinnLoss {
        loss,
        interior,
        boundary,
        grad,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub rel_l2: f64,
    pub rel_linf: f64,
}

/// One row of the predicted field: `(coords, u_pred, u_exact)`.
pub type FieldRow = (Vec<f64>, f64, f64);

/// Prediction and exact solution on an `n x n` uniform grid including the
/// boundary.
pub fn eval_field<N: Network>(net: &N, params: &[f64], problem: &PdeProblem, n: usize) -> Result<Vec<FieldRow>> {
    if !problem.has_exact {
        return Err(Error::Unsupported(format!("problem '{}' has no exact solution", problem.name)));
    }
    if problem.dim() != 2 || n < 2 {
        return Err(Error::Unsupported("field evaluation needs a 2-D problem and n >= 2".into()));
    }
    let prep = net.prepare(&mut crate::autodiff::Plain, params);
    let (bx, by) = (problem.bounds[0], problem.bounds[1]);
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let x = bx.0 + (bx.1 - bx.0) * i as f64 / (n - 1) as f64;
            let y = by.0 + (by.1 - by.0) * j as f64 / (n - 1) as f64;
            let p = [x, y];
            let u = net.forward(&mut crate::autodiff::Plain, params, &prep, &p)[0];
            rows.push((p.to_vec(), u, problem.exact(&p)));
        }
    }
    Ok(rows)
}

pub fn field_errors(rows: &[FieldRow]) -> ErrorMetrics {
    let (mut num2, mut den2, mut numi, mut deni) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (_, u, e) in rows {
        let d = u - e;
        num2 += d * d;
        den2 += e * e;
        numi = numi.max(d.abs());
        deni = deni.max(e.abs());
    }
    ErrorMetrics {
        rel_l2: (num2 / den2).sqrt(),
        rel_linf: numi / deni,
    }
}

/// Relative L2 and L-infinity errors on an `n x n` grid (256 by default).
pub fn error_metrics<N: Network>(net: &N, params: &[f64], problem: &PdeProblem, n: usize) -> Result<ErrorMetrics> {
    Ok(field_errors(&eval_field(net, params, problem, n)?))
}

/// Columns `x,y,u_pred,u_exact,abs_err` (`y` is `t` for the heat problem).
pub fn write_field_csv(path: &Path, problem: &PdeProblem, rows: &[FieldRow]) -> Result<()> {
    let second = if matches!(problem.kind, PdeKind::Heat { .. }) { "t" } else { "y" };
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "x,{second},u_pred,u_exact,abs_err")?;
    for (p, u, e) in rows {
        writeln!(f, "{},{},{:e},{:e},{:e}", p[0], p[1], u, e, (u - e).abs())?;
    }
    f.flush()?;
    Ok(())
}
