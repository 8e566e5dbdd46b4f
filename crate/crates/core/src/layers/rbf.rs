//! Radial-basis KAN layer with optional free centroids and smoothness.
//!
//! Each edge `(i, j)` carries `G` kernels. Centroids are stored as
//! unconstrained values `c~` and mapped into the grid range with a tanh,
//! widths as `s~` with `sigma = exp(s~)`. When a flag is off the mapped
//! values are fixed at their initial placement and do not appear in the
//! parameter store.

use std::ops::Range;

use crate::autodiff::{Context, Unary};
use crate::error::{Error, Result};
use crate::kernels::KernelKind;

/// `lo + (hi - lo) / 2 * (tanh(raw) + 1)`, always inside `(lo, hi)` for
/// finite results.
pub fn map_centroid(raw: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::Config(format!("grid range needs lo < hi, got ({lo}, {hi})")));
    }
    Ok(centroid_unchecked(raw, lo, hi))
}

#[inline]
pub(crate) fn centroid_unchecked(raw: f64, lo: f64, hi: f64) -> f64 {
    let c = lo + 0.5 * (hi - lo) * (raw.tanh() + 1.0);
    // tanh saturates to +-1 in floating point; keep the open interval.
    if c <= lo {
        lo.next_up()
    } else if c >= hi {
        hi.next_down()
    } else {
        c
    }
}

/// Inverse of [`map_centroid`] for `c` strictly inside `(lo, hi)`.
pub fn unmap_centroid(c: f64, lo: f64, hi: f64) -> f64 {
    (2.0 * (c - lo) / (hi - lo) - 1.0).atanh()
}

/// `sigma = exp(raw)`.
pub fn map_smoothness(raw: f64) -> f64 {
    raw.exp()
}

/// Uniform interior placement: cell midpoints of `G` equal cells.
pub fn uniform_centroids(lo: f64, hi: f64, g: usize) -> Vec<f64> {
    (0..g)
        .map(|m| lo + (m as f64 + 0.5) * (hi - lo) / g as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbfLayer {
    pub n_in: usize,
    pub n_out: usize,
    pub grid_size: usize,
    pub kernel: KernelKind,
    /// Grid range `(x_l, x_r)` that centroids are confined to.
    pub lo: f64,
    pub hi: f64,
    pub free_centroids: bool,
    pub free_smoothness: bool,
    /// Sigmoid output activation when set, identity otherwise.
    pub hidden: bool,
    /// Adds the `W * silu(x)` path.
    pub residual: bool,
    pub input_tanh: bool,
    pub(crate) omega: Range<usize>,
    pub(crate) raw_c: Option<Range<usize>>,
    pub(crate) raw_sigma: Option<Range<usize>>,
    pub(crate) w_rbf: Range<usize>,
    pub(crate) w_base: Option<Range<usize>>,
    pub(crate) fixed_c: Vec<f64>,
    pub(crate) fixed_sigma: f64,
}

/// Mapped centroids and widths for one forward pass.
#[derive(Debug, Clone)]
pub struct RbfPrepared<P> {
    pub centers: Vec<P>,
    pub widths: Vec<P>,
}

impl RbfLayer {
    pub fn edges(&self) -> usize {
        self.n_in * self.n_out
    }

    pub(crate) fn prepare<C: Context>(&self, ctx: &mut C, params: &[C::P]) -> RbfPrepared<C::P> {
        let n = self.edges() * self.grid_size;
        let half = 0.5 * (self.hi - self.lo);
        let centers = match &self.raw_c {
            Some(r) => params[r.clone()]
                .iter()
                .map(|&raw| {
                    let t = ctx.p_unary(raw, Unary::Tanh);
                    ctx.p_affine(t, half, self.lo + half)
                })
                .collect(),
            None => (0..n)
                .map(|k| ctx.p_const(self.fixed_c[k % self.grid_size]))
                .collect(),
        };
        let widths = match &self.raw_sigma {
            Some(r) => params[r.clone()]
                .iter()
                .map(|&raw| ctx.p_unary(raw, Unary::Exp))
                .collect(),
            None => {
                let s = ctx.p_const(self.fixed_sigma);
                vec![s; n]
            }
        };
        RbfPrepared { centers, widths }
    }

    pub(crate) fn forward<C: Context>(
        &self,
        ctx: &mut C,
        params: &[C::P],
        prep: &RbfPrepared<C::P>,
        x: &[C::S],
    ) -> Vec<C::S> {
        let g = self.grid_size;
        let xs: Vec<C::S> = if self.input_tanh {
            x.iter().map(|&v| ctx.s_unary(v, Unary::Tanh)).collect()
        } else {
            x.to_vec()
        };
        let base: Vec<C::S> = if self.residual {
            xs.iter().map(|&v| ctx.s_unary(v, Unary::Silu)).collect()
        } else {
            Vec::new()
        };
        let omega = &params[self.omega.clone()];
        let mut terms = Vec::with_capacity(2 * self.n_in);
        let mut out = Vec::with_capacity(self.n_out);
        for i in 0..self.n_out {
            terms.clear();
            for j in 0..self.n_in {
                let e = i * self.n_in + j;
                let b = e * g;
                let phi = ctx.rbf_edge(
                    xs[j],
                    self.kernel,
                    &omega[b..b + g],
                    &prep.centers[b..b + g],
                    &prep.widths[b..b + g],
                );
                terms.push((params[self.w_rbf.start + e], phi));
            }
            if let Some(w) = &self.w_base {
                for j in 0..self.n_in {
                    terms.push((params[w.start + i * self.n_in + j], base[j]));
                }
            }
            let pre = ctx.lincomb(&terms, None);
            out.push(if self.hidden {
                ctx.s_unary(pre, Unary::Sigmoid)
            } else {
                pre
            });
        }
        out
    }

    /// Current mapped centroids `c[i,j,m]` (flattened).
    pub fn centroids(&self, params: &[f64]) -> Vec<f64> {
        match &self.raw_c {
            Some(r) => params[r.clone()]
                .iter()
                .map(|&raw| centroid_unchecked(raw, self.lo, self.hi))
                .collect(),
            None => (0..self.edges() * self.grid_size)
                .map(|k| self.fixed_c[k % self.grid_size])
                .collect(),
        }
    }

    /// Current mapped widths `sigma[i,j,m]` (flattened).
    pub fn widths(&self, params: &[f64]) -> Vec<f64> {
        match &self.raw_sigma {
            Some(r) => params[r.clone()].iter().map(|&s| map_smoothness(s)).collect(),
            None => vec![self.fixed_sigma; self.edges() * self.grid_size],
        }
    }

    pub fn centroid_range(&self) -> Option<Range<usize>> {
        self.raw_c.clone()
    }

    pub fn smoothness_range(&self) -> Option<Range<usize>> {
        self.raw_sigma.clone()
    }
}
