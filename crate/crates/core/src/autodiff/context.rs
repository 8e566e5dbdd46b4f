//! Evaluation contexts shared by every network.
//!
//! Networks are written once against [`Context`] and run unchanged in three
//! modes: plain `f64` evaluation, reverse-mode recording ([`Rev`]), and
//! second-order input derivatives recorded on the tape ([`Fwd2`]).
//!
//! Two scalar kinds are distinguished. `P` values depend on parameters only
//! (weights, mapped centroids); `S` values also depend on the network input.
//! In [`Fwd2`] a `P` is a plain tape variable while an `S` is a [`Dual2`].
//! The fused edge primitives (`rbf_edge`, `spline_edge`) record one node per
//! edge and derivative order with closed-form partials.

use super::dual::{is_zero, Dual2};
use super::tape::{Tape, Unary, Var};
use crate::kernels::{kernel_derivs, kernel_eval, kernel_eval1, KernelKind};
use crate::layers::bspline::{LocalBasis, SplineGrid};

pub trait Context {
    type P: Copy;
    type S: Copy;

    fn p_value(p: Self::P) -> f64;
    fn s_value(s: Self::S) -> f64;

    fn p_const(&mut self, v: f64) -> Self::P;
    fn p_unary(&mut self, p: Self::P, f: Unary) -> Self::P;
    /// `scale * p + shift`.
    fn p_affine(&mut self, p: Self::P, scale: f64, shift: f64) -> Self::P;

    fn s_const(&mut self, v: f64) -> Self::S;
    fn s_unary(&mut self, s: Self::S, f: Unary) -> Self::S;
    fn s_add(&mut self, a: Self::S, b: Self::S) -> Self::S;
    fn s_mul(&mut self, a: Self::S, b: Self::S) -> Self::S;
    /// `scale * s + shift`.
    fn s_affine(&mut self, s: Self::S, scale: f64, shift: f64) -> Self::S;

    /// `sum_k p_k * s_k (+ bias)`.
    fn lincomb(&mut self, terms: &[(Self::P, Self::S)], bias: Option<Self::P>) -> Self::S;

    /// `sum_m omega_m * K((x - c_m) / sigma_m)`.
    fn rbf_edge(
        &mut self,
        x: Self::S,
        kernel: KernelKind,
        omega: &[Self::P],
        centers: &[Self::P],
        widths: &[Self::P],
    ) -> Self::S;

    /// `sum_m coef_m * B_m(x)` for the cubic B-spline basis on `grid`.
    fn spline_edge(&mut self, x: Self::S, grid: &SplineGrid, coef: &[Self::P]) -> Self::S;
}

/// Plain floating-point evaluation.
#[derive(Debug, Default, Clone, Copy)]
pub struct Plain;

impl Context for Plain {
    type P = f64;
    type S = f64;

    fn p_value(p: f64) -> f64 {
        p
    }
    fn s_value(s: f64) -> f64 {
        s
    }
    fn p_const(&mut self, v: f64) -> f64 {
        v
    }
    fn p_unary(&mut self, p: f64, f: Unary) -> f64 {
        f.apply(p)
    }
    fn p_affine(&mut self, p: f64, scale: f64, shift: f64) -> f64 {
        scale * p + shift
    }
    fn s_const(&mut self, v: f64) -> f64 {
        v
    }
    fn s_unary(&mut self, s: f64, f: Unary) -> f64 {
        f.apply(s)
    }
    fn s_add(&mut self, a: f64, b: f64) -> f64 {
        a + b
    }
    fn s_mul(&mut self, a: f64, b: f64) -> f64 {
        a * b
    }
    fn s_affine(&mut self, s: f64, scale: f64, shift: f64) -> f64 {
        scale * s + shift
    }

    fn lincomb(&mut self, terms: &[(f64, f64)], bias: Option<f64>) -> f64 {
        terms.iter().fold(bias.unwrap_or(0.0), |acc, &(p, s)| acc + p * s)
    }

    fn rbf_edge(
        &mut self,
        x: f64,
        kernel: KernelKind,
        omega: &[f64],
        centers: &[f64],
        widths: &[f64],
    ) -> f64 {
        let mut acc = 0.0;
        for m in 0..omega.len() {
            acc += omega[m] * kernel_eval(kernel, (x - centers[m]) / widths[m]);
        }
        acc
    }

    fn spline_edge(&mut self, x: f64, grid: &SplineGrid, coef: &[f64]) -> f64 {
        let lb = grid.local(x, 0);
        lb.entries().map(|(i, d)| coef[i] * d[0]).sum()
    }
}

/// Reverse-mode recording context.
pub struct Rev<'t> {
    pub tape: &'t mut Tape,
}

impl<'t> Rev<'t> {
    pub fn new(tape: &'t mut Tape) -> Self {
        Rev { tape }
    }
}

impl Context for Rev<'_> {
    type P = Var;
    type S = Var;

    fn p_value(p: Var) -> f64 {
        p.value()
    }
    fn s_value(s: Var) -> f64 {
        s.value()
    }
    fn p_const(&mut self, v: f64) -> Var {
        Var::constant(v)
    }
    fn p_unary(&mut self, p: Var, f: Unary) -> Var {
        self.tape.unary(p, f)
    }
    fn p_affine(&mut self, p: Var, scale: f64, shift: f64) -> Var {
        self.tape.affine(p, scale, shift)
    }
    fn s_const(&mut self, v: f64) -> Var {
        Var::constant(v)
    }
    fn s_unary(&mut self, s: Var, f: Unary) -> Var {
        self.tape.unary(s, f)
    }
    fn s_add(&mut self, a: Var, b: Var) -> Var {
        self.tape.add(a, b)
    }
    fn s_mul(&mut self, a: Var, b: Var) -> Var {
        self.tape.mul(a, b)
    }
    fn s_affine(&mut self, s: Var, scale: f64, shift: f64) -> Var {
        self.tape.affine(s, scale, shift)
    }

    fn lincomb(&mut self, terms: &[(Var, Var)], bias: Option<Var>) -> Var {
        let t = &mut *self.tape;
        t.begin();
        let mut acc = 0.0;
        if let Some(b) = bias {
            acc += b.value();
            t.arg(b, 1.0);
        }
        for &(p, s) in terms {
            acc += p.value() * s.value();
            t.arg(p, s.value());
            t.arg(s, p.value());
        }
        t.finish(acc)
    }

    fn rbf_edge(
        &mut self,
        x: Var,
        kernel: KernelKind,
        omega: &[Var],
        centers: &[Var],
        widths: &[Var],
    ) -> Var {
        let t = &mut *self.tape;
        let xv = x.value();
        t.begin();
        let mut acc = 0.0;
        let mut dx = 0.0;
        for m in 0..omega.len() {
            let inv = 1.0 / widths[m].value();
            let u = (xv - centers[m].value()) * inv;
            let (k, k1) = kernel_eval1(kernel, u);
            let w = omega[m].value();
            acc += w * k;
            let a = w * k1 * inv;
            dx += a;
            t.arg(omega[m], k);
            t.arg(centers[m], -a);
            t.arg(widths[m], -a * u);
        }
        t.arg(x, dx);
        t.finish(acc)
    }

    fn spline_edge(&mut self, x: Var, grid: &SplineGrid, coef: &[Var]) -> Var {
        let lb = grid.local(x.value(), 1);
        let t = &mut *self.tape;
        t.begin();
        let mut acc = 0.0;
        let mut dx = 0.0;
        for (i, d) in lb.entries() {
            let c = coef[i].value();
            acc += c * d[0];
            dx += c * d[1];
            t.arg(coef[i], d[0]);
        }
        t.arg(x, dx);
        t.finish(acc)
    }
}

/// Second-order forward mode along one input axis, recorded on a tape.
///
/// With `second == false` only first derivatives are propagated and every
/// second-derivative component stays at zero.
pub struct Fwd2<'t> {
    pub tape: &'t mut Tape,
    pub second: bool,
    scratch: Vec<[f64; 8]>,
}

impl<'t> Fwd2<'t> {
    pub fn new(tape: &'t mut Tape) -> Self {
        Fwd2 {
            tape,
            second: true,
            scratch: Vec::new(),
        }
    }

    pub fn first_order(tape: &'t mut Tape) -> Self {
        Fwd2 {
            tape,
            second: false,
            scratch: Vec::new(),
        }
    }

    fn spline_with(&mut self, x: Dual2, lb: &LocalBasis, coef: &[Var]) -> Dual2 {
        let t = &mut *self.tape;
        let (x1, x2) = (x.d1.value(), x.d2.value());
        let (mut a, mut b, mut c3) = (0.0, 0.0, 0.0);

        t.begin();
        let mut val = 0.0;
        for (i, d) in lb.entries() {
            let w = coef[i].value();
            val += w * d[0];
            a += w * d[1];
            b += w * d[2];
            c3 += w * d[3];
            t.arg(coef[i], d[0]);
        }
        t.arg(x.v, a);
        let v = t.finish(val);
        if x.is_flat() {
            return Dual2::from_var(v);
        }

        t.begin();
        for (i, d) in lb.entries() {
            t.arg(coef[i], x1 * d[1]);
        }
        t.arg(x.v, x1 * b);
        t.arg(x.d1, a);
        let d1 = t.finish(x1 * a);

        let d2 = if self.second {
            t.begin();
            for (i, d) in lb.entries() {
                t.arg(coef[i], x1 * x1 * d[2] + x2 * d[1]);
            }
            t.arg(x.v, x1 * x1 * c3 + x2 * b);
            t.arg(x.d1, 2.0 * x1 * b);
            t.arg(x.d2, a);
            t.finish(x1 * x1 * b + x2 * a)
        } else {
            Var::ZERO
        };
        Dual2 { v, d1, d2 }
    }
}

impl Context for Fwd2<'_> {
    type P = Var;
    type S = Dual2;

    fn p_value(p: Var) -> f64 {
        p.value()
    }
    fn s_value(s: Dual2) -> f64 {
        s.v.value()
    }
    fn p_const(&mut self, v: f64) -> Var {
        Var::constant(v)
    }
    fn p_unary(&mut self, p: Var, f: Unary) -> Var {
        self.tape.unary(p, f)
    }
    fn p_affine(&mut self, p: Var, scale: f64, shift: f64) -> Var {
        self.tape.affine(p, scale, shift)
    }
    fn s_const(&mut self, v: f64) -> Dual2 {
        Dual2::constant(v)
    }
    fn s_unary(&mut self, s: Dual2, f: Unary) -> Dual2 {
        let d = if self.second {
            f.eval3(s.v.value())
        } else {
            let [v, d1, d2, _] = f.eval3(s.v.value());
            [v, d1, d2, 0.0]
        };
        s.unary_with(self.tape, d, self.second)
    }
    fn s_add(&mut self, a: Dual2, b: Dual2) -> Dual2 {
        let t = &mut *self.tape;
        Dual2 {
            v: t.add(a.v, b.v),
            d1: t.add(a.d1, b.d1),
            d2: if self.second { t.add(a.d2, b.d2) } else { Var::ZERO },
        }
    }
    fn s_mul(&mut self, a: Dual2, b: Dual2) -> Dual2 {
        let r = a.mul(self.tape, b);
        if self.second {
            r
        } else {
            Dual2 { d2: Var::ZERO, ..r }
        }
    }
    fn s_affine(&mut self, s: Dual2, scale: f64, shift: f64) -> Dual2 {
        let t = &mut *self.tape;
        Dual2 {
            v: t.affine(s.v, scale, shift),
            d1: t.scale(s.d1, scale),
            d2: if self.second { t.scale(s.d2, scale) } else { Var::ZERO },
        }
    }

    fn lincomb(&mut self, terms: &[(Var, Dual2)], bias: Option<Var>) -> Dual2 {
        let t = &mut *self.tape;
        t.begin();
        let mut acc = 0.0;
        if let Some(b) = bias {
            acc += b.value();
            t.arg(b, 1.0);
        }
        let mut flat = true;
        for &(p, s) in terms {
            acc += p.value() * s.v.value();
            t.arg(p, s.v.value());
            t.arg(s.v, p.value());
            flat &= s.is_flat();
        }
        let v = t.finish(acc);
        if flat {
            return Dual2::from_var(v);
        }

        let component = |t: &mut Tape, pick: fn(&Dual2) -> Var| {
            t.begin();
            let mut acc = 0.0;
            for (p, s) in terms {
                let c = pick(s);
                if is_zero(c) {
                    continue;
                }
                acc += p.value() * c.value();
                t.arg(*p, c.value());
                t.arg(c, p.value());
            }
            t.finish(acc)
        };
        let d1 = component(t, |s| s.d1);
        let d2 = if self.second {
            component(t, |s| s.d2)
        } else {
            Var::ZERO
        };
        Dual2 { v, d1, d2 }
    }

    fn rbf_edge(
        &mut self,
        x: Dual2,
        kernel: KernelKind,
        omega: &[Var],
        centers: &[Var],
        widths: &[Var],
    ) -> Dual2 {
        let (xv, x1, x2) = (x.v.value(), x.d1.value(), x.d2.value());
        let flat = x.is_flat();
        let second = self.second;

        // Per basis: [K, a, b, c, da/dsigma, db/dsigma, u, omega] where
        // a = K'/s, b = K''/s^2, c = K'''/s^3.
        self.scratch.clear();
        let (mut sa, mut sb, mut sc) = (0.0, 0.0, 0.0);
        let mut val = 0.0;
        for m in 0..omega.len() {
            let inv = 1.0 / widths[m].value();
            let u = (xv - centers[m].value()) * inv;
            let w = omega[m].value();
            let k = if flat {
                let (k0, k1) = kernel_eval1(kernel, u);
                [k0, k1, 0.0, 0.0]
            } else {
                kernel_derivs(kernel, u)
            };
            let a = k[1] * inv;
            let b = k[2] * inv * inv;
            let c = k[3] * inv * inv * inv;
            let da = -(u * k[2] + k[1]) * inv * inv;
            let db = -(u * k[3] + 2.0 * k[2]) * inv * inv * inv;
            val += w * k[0];
            sa += w * a;
            sb += w * b;
            sc += w * c;
            self.scratch.push([k[0], a, b, c, da, db, u, w]);
        }

        let t = &mut *self.tape;
        t.begin();
        for (m, s) in self.scratch.iter().enumerate() {
            let [k, a, _, _, _, _, u, w] = *s;
            t.arg(omega[m], k);
            t.arg(centers[m], -w * a);
            t.arg(widths[m], -w * a * u);
        }
        t.arg(x.v, sa);
        let v = t.finish(val);
        if flat {
            return Dual2::from_var(v);
        }

        t.begin();
        for (m, s) in self.scratch.iter().enumerate() {
            let [_, a, b, _, da, _, _, w] = *s;
            t.arg(omega[m], x1 * a);
            t.arg(centers[m], -x1 * w * b);
            t.arg(widths[m], x1 * w * da);
        }
        t.arg(x.v, x1 * sb);
        t.arg(x.d1, sa);
        let d1 = t.finish(x1 * sa);

        let d2 = if second {
            let q = x1 * x1;
            t.begin();
            for (m, s) in self.scratch.iter().enumerate() {
                let [_, a, b, c, da, db, _, w] = *s;
                t.arg(omega[m], q * b + x2 * a);
                t.arg(centers[m], -w * (q * c + x2 * b));
                t.arg(widths[m], w * (q * db + x2 * da));
            }
            t.arg(x.v, q * sc + x2 * sb);
            t.arg(x.d1, 2.0 * x1 * sb);
            t.arg(x.d2, sa);
            t.finish(q * sb + x2 * sa)
        } else {
            Var::ZERO
        };
        Dual2 { v, d1, d2 }
    }

    fn spline_edge(&mut self, x: Dual2, grid: &SplineGrid, coef: &[Var]) -> Dual2 {
        let order = if x.is_flat() {
            1
        } else if self.second {
            3
        } else {
            2
        };
        let lb = grid.local(x.v.value(), order);
        self.spline_with(x, &lb, coef)
    }
}
