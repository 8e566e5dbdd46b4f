//! Supervised losses with gradients accumulated over bounded tapes.

use crate::autodiff::{Rev, Tape, Var};
use crate::data::Dataset;
use crate::layers::Network;

/// Samples recorded per tape before it is swept and cleared.
pub const CHUNK: usize = 64;

/// Reusable tape and adjoint buffer.
#[derive(Debug, Default)]
pub struct Workspace {
    pub tape: Tape,
    adj: Vec<f64>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sweeps `out` and adds `scale * d(out)/d(param)` into `grad`; the
    /// parameters must occupy the first `grad.len()` tape nodes.
    pub fn accumulate(&mut self, out: Var, scale: f64, grad: &mut [f64]) {
        self.tape.backward_into(out, &mut self.adj);
        for (g, a) in grad.iter_mut().zip(&self.adj) {
            *g += scale * a;
        }
    }
}

/// Mean squared error over all outputs of the rows `idx`, and its gradient.
pub fn mse_grad<N: Network>(
    net: &N,
    params: &[f64],
    data: &Dataset,
    idx: &[usize],
    ws: &mut Workspace,
) -> (f64, Vec<f64>) {
    let m = net.n_outputs();
    let scale = 1.0 / (idx.len() * m) as f64;
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    for chunk in idx.chunks(CHUNK) {
        ws.tape.clear();
        let p = ws.tape.vars(params);
        let mut ctx = Rev::new(&mut ws.tape);
        let prep = net.prepare(&mut ctx, &p);
        let mut parts = Vec::with_capacity(chunk.len());
        for &i in chunk {
            let x: Vec<Var> = data.inputs[i].iter().map(|&v| Var::constant(v)).collect();
            let y = net.forward(&mut ctx, &p, &prep, &x);
            parts.push(ctx.tape.sum_sq_diff(&y, &data.targets[i]));
        }
        let total = ws.tape.sum(&parts);
        loss += total.value() * scale;
        ws.accumulate(total, scale, &mut grad);
    }
    (loss, grad)
}

/// Mean squared error over every row and output.
pub fn mse<N: Network>(net: &N, params: &[f64], data: &Dataset) -> f64 {
    let prep = net.prepare(&mut crate::autodiff::Plain, params);
    let mut acc = 0.0;
    for (x, t) in data.inputs.iter().zip(&data.targets) {
        let y = net.forward(&mut crate::autodiff::Plain, params, &prep, x);
        acc += y.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    acc / (data.len() * data.target_dim()) as f64
}
