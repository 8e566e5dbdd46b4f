//! Reverse-mode differentiation with second-order input derivatives.

mod check;
mod context;
mod dual;
mod params;
mod tape;

pub use check::{grad_check, grad_check_with_step};
pub use context::{Context, Fwd2, Plain, Rev};
pub use dual::Dual2;
pub use params::{ParamSlice, ParamStore};
pub use tape::{sigmoid, Tape, TapeNode, Unary, Var};

use crate::error::{Error, Result};
use crate::layers::Network;

/// Gradient of a scalar loss with respect to the first `n_params` tape
/// nodes, which must be the parameter variables.
pub fn backward(tape: &Tape, loss: &[Var], n_params: usize) -> Result<Vec<f64>> {
    let [out] = loss else {
        return Err(Error::Contract(format!(
            "backward needs a scalar loss, got {} outputs",
            loss.len()
        )));
    };
    let mut g = tape.backward(*out);
    g.resize(tape.len().max(n_params), 0.0);
    g.truncate(n_params);
    Ok(g)
}

/// Evaluates a scalar-output network at `x` with first and second
/// derivatives along input `axis`, all recorded on `tape`.
///
/// With `second == false` only the first derivative is propagated and the
/// returned `d2` is zero, which roughly halves the tape.
pub fn eval_with_input_derivs<N: Network>(
    tape: &mut Tape,
    net: &N,
    params: &[Var],
    prep: &N::Prepared<Var>,
    x: &[f64],
    axis: usize,
    second: bool,
) -> Result<Dual2> {
    if x.len() != net.n_inputs() {
        return Err(Error::Shape(format!(
            "network expects {} inputs, got {}",
            net.n_inputs(),
            x.len()
        )));
    }
    if axis >= x.len() {
        return Err(Error::Axis {
            axis,
            dims: x.len(),
        });
    }
    if net.n_outputs() != 1 {
        return Err(Error::Shape(format!(
            "input derivatives need a scalar output, network has {}",
            net.n_outputs()
        )));
    }
    let order = if second { 2 } else { 1 };
    if net.continuity() < order {
        return Err(Error::Smoothness(format!(
            "network is C{} but derivatives of order {order} were requested",
            net.continuity()
        )));
    }
    let xs: Vec<Dual2> = x
        .iter()
        .enumerate()
        .map(|(k, &v)| if k == axis { Dual2::seed(v) } else { Dual2::constant(v) })
        .collect();
    let mut ctx = if second {
        Fwd2::new(tape)
    } else {
        Fwd2::first_order(tape)
    };
    Ok(net.forward(&mut ctx, params, prep, &xs)[0])
}
