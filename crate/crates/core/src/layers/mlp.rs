use std::ops::Range;

use crate::autodiff::{Context, Unary};

/// Fully connected layer `out = act(W x + b)` with `act = tanh` on hidden
/// layers and identity on the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub n_in: usize,
    pub n_out: usize,
    pub hidden: bool,
    pub(crate) weight: Range<usize>,
    pub(crate) bias: Option<Range<usize>>,
}

impl DenseLayer {
    pub(crate) fn forward<C: Context>(&self, ctx: &mut C, params: &[C::P], x: &[C::S]) -> Vec<C::S> {
        let w = &params[self.weight.clone()];
        let mut terms = Vec::with_capacity(self.n_in);
        (0..self.n_out)
            .map(|i| {
                terms.clear();
                terms.extend((0..self.n_in).map(|j| (w[i * self.n_in + j], x[j])));
                let b = self.bias.as_ref().map(|r| params[r.start + i]);
                let pre = ctx.lincomb(&terms, b);
                if self.hidden {
                    ctx.s_unary(pre, Unary::Tanh)
                } else {
                    pre
                }
            })
            .collect()
    }
}
