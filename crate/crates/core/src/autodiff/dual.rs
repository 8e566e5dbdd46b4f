//! Second-order forward-mode values whose components are tape variables.
//!
//! A [`Dual2`] carries `(u, du/dx, d2u/dx2)` along one input direction.
//! Each component is a [`Var`], so anything computed from them can be
//! differentiated with respect to parameters by a reverse sweep.

use super::tape::{Tape, Unary, Var};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual2 {
    pub v: Var,
    pub d1: Var,
    pub d2: Var,
}

impl Dual2 {
    pub const fn constant(v: f64) -> Self {
        Dual2 {
            v: Var::constant(v),
            d1: Var::ZERO,
            d2: Var::ZERO,
        }
    }

    /// The seeded input coordinate: derivative one along itself.
    pub const fn seed(x: f64) -> Self {
        Dual2 {
            v: Var::constant(x),
            d1: Var::ONE,
            d2: Var::ZERO,
        }
    }

    pub fn from_var(v: Var) -> Self {
        Dual2 {
            v,
            d1: Var::ZERO,
            d2: Var::ZERO,
        }
    }

    pub fn values(&self) -> [f64; 3] {
        [self.v.value(), self.d1.value(), self.d2.value()]
    }

    /// True when both derivative parts are the constant zero.
    #[inline]
    pub fn is_flat(&self) -> bool {
        is_zero(self.d1) && is_zero(self.d2)
    }

    pub fn add(self, tape: &mut Tape, o: Dual2) -> Dual2 {
        Dual2 {
            v: tape.add(self.v, o.v),
            d1: tape.add(self.d1, o.d1),
            d2: tape.add(self.d2, o.d2),
        }
    }

    pub fn sub(self, tape: &mut Tape, o: Dual2) -> Dual2 {
        Dual2 {
            v: tape.sub(self.v, o.v),
            d1: tape.sub(self.d1, o.d1),
            d2: tape.sub(self.d2, o.d2),
        }
    }

    pub fn scale(self, tape: &mut Tape, c: f64) -> Dual2 {
        Dual2 {
            v: tape.scale(self.v, c),
            d1: tape.scale(self.d1, c),
            d2: tape.scale(self.d2, c),
        }
    }

    pub fn add_const(self, tape: &mut Tape, c: f64) -> Dual2 {
        Dual2 {
            v: tape.add_const(self.v, c),
            ..self
        }
    }

    /// Product with the second-order Leibniz rule.
    pub fn mul(self, tape: &mut Tape, o: Dual2) -> Dual2 {
        let (a, a1, a2) = (self.v.value(), self.d1.value(), self.d2.value());
        let (b, b1, b2) = (o.v.value(), o.d1.value(), o.d2.value());
        let v = tape.mul(self.v, o.v);

        tape.begin();
        tape.arg(self.d1, b);
        tape.arg(o.v, a1);
        tape.arg(self.v, b1);
        tape.arg(o.d1, a);
        let d1 = tape.finish(a1 * b + a * b1);

        tape.begin();
        tape.arg(self.d2, b);
        tape.arg(o.v, a2);
        tape.arg(self.d1, 2.0 * b1);
        tape.arg(o.d1, 2.0 * a1);
        tape.arg(self.v, b2);
        tape.arg(o.d2, a);
        let d2 = tape.finish(a2 * b + 2.0 * a1 * b1 + a * b2);
        Dual2 { v, d1, d2 }
    }

    /// `h = f(g)`: `h'' = f''(g) g'^2 + f'(g) g''`.
    pub fn unary(self, tape: &mut Tape, f: Unary) -> Dual2 {
        self.unary_with(tape, f.eval3(self.v.value()), true)
    }

    /// Chain rule given `[f, f', f'', f''']` at `self.v`. With `second`
    /// unset the second-derivative part is left at zero.
    pub(crate) fn unary_with(self, tape: &mut Tape, f: [f64; 4], second: bool) -> Dual2 {
        let g1 = self.d1.value();
        let g2 = self.d2.value();

        tape.begin();
        tape.arg(self.v, f[1]);
        let v = tape.finish(f[0]);

        if self.is_flat() {
            return Dual2::from_var(v);
        }

        tape.begin();
        tape.arg(self.v, f[2] * g1);
        tape.arg(self.d1, f[1]);
        let d1 = tape.finish(f[1] * g1);

        let d2 = if second {
            tape.begin();
            tape.arg(self.v, f[3] * g1 * g1 + f[2] * g2);
            tape.arg(self.d1, 2.0 * f[2] * g1);
            tape.arg(self.d2, f[1]);
            tape.finish(f[2] * g1 * g1 + f[1] * g2)
        } else {
            Var::ZERO
        };
        Dual2 { v, d1, d2 }
    }

    pub fn exp(self, tape: &mut Tape) -> Dual2 {
        self.unary(tape, Unary::Exp)
    }

    pub fn sin(self, tape: &mut Tape) -> Dual2 {
        self.unary(tape, Unary::Sin)
    }

    pub fn tanh(self, tape: &mut Tape) -> Dual2 {
        self.unary(tape, Unary::Tanh)
    }
}

#[inline]
pub(crate) fn is_zero(v: Var) -> bool {
    !v.is_tracked() && v.value() == 0.0
}
