//! Cubic B-spline bases and the spline KAN layer.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::autodiff::{Context, Unary};
use crate::error::{Error, Result};
use crate::linalg::least_squares;

pub const ORDER: usize = 3;

/// Uniform cubic knot grid on `[lo, hi]` with `intervals` cells, padded by
/// three knots on each side, giving `intervals + 3` basis functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplineGrid {
    pub lo: f64,
    pub hi: f64,
    pub intervals: usize,
}

impl SplineGrid {
    pub fn new(lo: f64, hi: f64, intervals: usize) -> Result<Self> {
        if !(lo < hi) || intervals == 0 {
            return Err(Error::Config(format!(
                "spline grid needs lo < hi and at least one interval, got [{lo}, {hi}] with {intervals}"
            )));
        }
        Ok(SplineGrid { lo, hi, intervals })
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.intervals as f64
    }

    pub fn n_basis(&self) -> usize {
        self.intervals + ORDER
    }

    /// Knot `i` of the padded vector; defined for any integer `i`.
    #[inline]
    pub fn knot(&self, i: isize) -> f64 {
        self.lo + (i - ORDER as isize) as f64 * self.step()
    }

    pub fn knots(&self) -> Vec<f64> {
        (0..(self.intervals + 2 * ORDER + 1) as isize)
            .map(|i| self.knot(i))
            .collect()
    }

    /// Padded span `[t_0, t_last]`.
    pub fn span(&self) -> (f64, f64) {
        (self.knot(0), self.knot((self.intervals + 2 * ORDER) as isize))
    }

    /// Nonzero basis functions at `x` with derivatives up to `nderiv`
    /// (at most 3), via de Boor's triangular scheme.
    ///
    /// Inputs outside the padded span are clamped to it, and all
    /// derivatives of the clamped evaluation are zero.
    pub fn local(&self, x: f64, nderiv: usize) -> LocalBasis {
        let (a, b) = self.span();
        let clamped = !(x >= a && x <= b);
        let x = if x.is_nan() { a } else { x.clamp(a, b) };
        let h = self.step();
        let last_span = (self.intervals + 2 * ORDER - 1) as isize;
        let span = (((x - a) / h).floor() as isize).clamp(0, last_span);
        let n = if clamped { 0 } else { nderiv.min(ORDER) };
        let ders = ders_basis_funs(|i| self.knot(i), span, x, n);
        LocalBasis {
            first: span - ORDER as isize,
            n_basis: self.n_basis(),
            ders,
        }
    }
}

/// Up to four consecutive basis functions and their derivatives.
#[derive(Debug, Clone, Copy)]
pub struct LocalBasis {
    first: isize,
    n_basis: usize,
    /// `ders[k][r]`: k-th derivative of basis `first + r`.
    ders: [[f64; 4]; 4],
}

impl LocalBasis {
    /// `(basis index, [B, B', B'', B'''])` for indices inside the basis.
    pub fn entries(&self) -> impl Iterator<Item = (usize, [f64; 4])> + '_ {
        (0..=ORDER).filter_map(move |r| {
            let idx = self.first + r as isize;
            (idx >= 0 && (idx as usize) < self.n_basis).then(|| {
                let d = &self.ders;
                (idx as usize, [d[0][r], d[1][r], d[2][r], d[3][r]])
            })
        })
    }
}

/// Basis functions `N_{span-3..=span}` and derivatives at `x` for knots
/// given by `knot(i)`; `x` must lie in `[knot(span), knot(span+1)]`.
fn ders_basis_funs(knot: impl Fn(isize) -> f64, span: isize, x: f64, n: usize) -> [[f64; 4]; 4] {
    const P: usize = ORDER;
    let mut ndu = [[0.0f64; P + 1]; P + 1];
    let mut left = [0.0f64; P + 1];
    let mut right = [0.0f64; P + 1];
    ndu[0][0] = 1.0;
    for j in 1..=P {
        left[j] = x - knot(span + 1 - j as isize);
        right[j] = knot(span + j as isize) - x;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = [[0.0f64; 4]; 4];
    for j in 0..=P {
        ders[0][j] = ndu[j][P];
    }
    let mut a = [[0.0f64; P + 1]; 2];
    for r in 0..=P as isize {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=n as isize {
            let mut d = 0.0;
            let rk = r - k;
            let pk = P as isize - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[(pk + 1) as usize][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk as usize];
            }
            let j1 = if rk >= -1 { 1 } else { -rk };
            let j2 = if r - 1 <= pk { k - 1 } else { P as isize - r };
            for j in j1..=j2 {
                let (ju, rkj) = (j as usize, (rk + j) as usize);
                a[s2][ju] = (a[s1][ju] - a[s1][ju - 1]) / ndu[(pk + 1) as usize][rkj];
                d += a[s2][ju] * ndu[rkj][pk as usize];
            }
            if r <= pk {
                a[s2][k as usize] = -a[s1][(k - 1) as usize] / ndu[(pk + 1) as usize][r as usize];
                d += a[s2][k as usize] * ndu[r as usize][pk as usize];
            }
            ders[k as usize][r as usize] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = P as f64;
    for k in 1..=n {
        for j in 0..=P {
            ders[k][j] *= factor;
        }
        factor *= (P - k) as f64;
    }
    ders
}

/// All `knots.len() - order - 1` B-spline basis values of the given order
/// at `x`, by the Cox-de Boor recursion. `x` is clamped to the knot span.
pub fn bspline_basis(knots: &[f64], order: usize, x: f64) -> Vec<f64> {
    assert!(knots.len() > order + 1, "need more knots than order + 1");
    let (a, b) = (knots[0], knots[knots.len() - 1]);
    let x = x.clamp(a, b);
    // order 0: indicator of the half-open cell containing x
    let mut basis: Vec<f64> = knots
        .windows(2)
        .map(|w| if w[0] <= x && x < w[1] { 1.0 } else { 0.0 })
        .collect();
    for p in 1..=order {
        let next: Vec<f64> = (0..knots.len() - p - 1)
            .map(|i| {
                let mut v = 0.0;
                let d1 = knots[i + p] - knots[i];
                if d1 > 0.0 {
                    v += (x - knots[i]) / d1 * basis[i];
                }
                let d2 = knots[i + p + 1] - knots[i + 1];
                if d2 > 0.0 {
                    v += (knots[i + p + 1] - x) / d2 * basis[i + 1];
                }
                v
            })
            .collect();
        basis = next;
    }
    basis
}

/// Least-squares refit of the spline with coefficients `coef` on `old` onto
/// the grid `new`, matching values on a dense uniform probe set over
/// `[new.lo, new.hi]`.
pub fn refit_spline(old: &SplineGrid, coef: &[f64], new: &SplineGrid) -> Result<Vec<f64>> {
    let n = new.n_basis();
    let m = 4 * n + 1;
    let mut a = vec![0.0; m * n];
    let mut y = vec![0.0; m];
    for r in 0..m {
        let x = new.lo + (new.hi - new.lo) * r as f64 / (m - 1) as f64;
        y[r] = old.local(x, 0).entries().map(|(i, d)| coef[i] * d[0]).sum();
        for (i, d) in new.local(x, 0).entries() {
            a[r * n + i] = d[0];
        }
    }
    least_squares(&a, m, n, &y)
        .ok_or_else(|| Error::Numerical("spline refit normal equations are singular".into()))
}

/// B-spline KAN layer:
/// `out_i = rho_o( sum_j Ws[i,j] spline_ij(x_j) + W[i,j] silu(x_j) )`.
#[derive(Debug, Clone, PartialEq)]
pub struct BSplineLayer {
    pub n_in: usize,
    pub n_out: usize,
    /// One grid per input node, shared by that node's outgoing edges.
    pub grids: Vec<SplineGrid>,
    pub hidden: bool,
    pub residual: bool,
    pub input_tanh: bool,
    pub(crate) coef: Range<usize>,
    pub(crate) w_spline: Range<usize>,
    pub(crate) w_base: Option<Range<usize>>,
}

impl BSplineLayer {
    pub fn n_basis(&self) -> usize {
        self.grids[0].n_basis()
    }

    pub fn coef_range(&self) -> Range<usize> {
        self.coef.clone()
    }

    pub(crate) fn forward<C: Context>(&self, ctx: &mut C, params: &[C::P], x: &[C::S]) -> Vec<C::S> {
        let nb = self.n_basis();
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
        let mut terms = Vec::with_capacity(2 * self.n_in);
        let mut out = Vec::with_capacity(self.n_out);
        for i in 0..self.n_out {
            terms.clear();
            for j in 0..self.n_in {
                let e = i * self.n_in + j;
                let c0 = self.coef.start + e * nb;
                let phi = ctx.spline_edge(xs[j], &self.grids[j], &params[c0..c0 + nb]);
                terms.push((params[self.w_spline.start + e], phi));
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

    /// Rescales each input node's grid to the observed range of `samples`
    /// (layer inputs, after normalization) and refits every edge spline.
    pub fn update_grid(&mut self, params: &mut [f64], samples: &[Vec<f64>]) -> Result<()> {
        if samples.is_empty() {
            return Err(Error::Contract("grid update needs at least one sample".into()));
        }
        let nb = self.n_basis();
        for j in 0..self.n_in {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for s in samples {
                let v = if self.input_tanh { s[j].tanh() } else { s[j] };
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::NonFinite("grid update samples".into()));
            }
            if hi - lo < 1e-12 {
                lo -= 1e-2;
                hi += 1e-2;
            }
            let old = self.grids[j];
            let new = SplineGrid::new(lo, hi, old.intervals)?;
            for i in 0..self.n_out {
                let c0 = self.coef.start + (i * self.n_in + j) * nb;
                let refit = refit_spline(&old, &params[c0..c0 + nb], &new)?;
                params[c0..c0 + nb].copy_from_slice(&refit);
            }
            self.grids[j] = new;
        }
        Ok(())
    }
}
