//! Second-order forward-mode numbers in up to two variables.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value, gradient and Hessian of an expression at a point.
///
/// The Hessian is stored as its upper triangle, so `hess[0][1]` and
/// `hess[1][0]` are the same stored number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    h00: f64,
    h01: f64,
    h11: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Dual {
    v: f64,
    g: [f64; 2],
    h: Tri,
}

const ZERO_TRI: Tri = Tri { h00: 0.0, h01: 0.0, h11: 0.0 };

impl Dual {
    pub(crate) fn constant(v: f64) -> Self {
        Dual { v, g: [0.0; 2], h: ZERO_TRI }
    }

    pub(crate) fn variable(v: f64, axis: usize) -> Self {
        let mut g = [0.0; 2];
        g[axis] = 1.0;
        Dual { v, g, h: ZERO_TRI }
    }

    pub(crate) fn value(&self) -> f64 {
        self.v
    }

    /// Chain rule for a scalar function with derivatives `d1`, `d2` at `self.v`.
    pub(crate) fn chain(self, v: f64, d1: f64, d2: f64) -> Self {
        let g = self.g;
        Dual {
            v,
            g: [d1 * g[0], d1 * g[1]],
            h: Tri {
                h00: d1 * self.h.h00 + d2 * g[0] * g[0],
                h01: d1 * self.h.h01 + d2 * g[0] * g[1],
                h11: d1 * self.h.h11 + d2 * g[1] * g[1],
            },
        }
    }

    pub(crate) fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub(crate) fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub(crate) fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub(crate) fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub(crate) fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }

    pub(crate) fn ln(self) -> Self {
        let x = self.v;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    /// `self^c` for a constant exponent; integer exponents use `powi` so that
    /// negative bases stay valid.
    pub(crate) fn powc(self, c: f64) -> Self {
        let x = self.v;
        let (v, d1, d2) = if c.fract() == 0.0 && c.abs() < 1024.0 {
            let n = c as i32;
            let v = x.powi(n);
            let d1 = if n == 0 { 0.0 } else { c * x.powi(n - 1) };
            let d2 = if n == 0 || n == 1 { 0.0 } else { c * (c - 1.0) * x.powi(n - 2) };
            (v, d1, d2)
        } else {
            (x.powf(c), c * x.powf(c - 1.0), c * (c - 1.0) * x.powf(c - 2.0))
        };
        self.chain(v, d1, d2)
    }

    pub(crate) fn into_jet(self) -> Jet {
        Jet {
            value: self.v,
            grad: self.g,
            hess: [[self.h.h00, self.h.h01], [self.h.h01, self.h.h11]],
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            g: [self.g[0] + o.g[0], self.g[1] + o.g[1]],
            h: Tri {
                h00: self.h.h00 + o.h.h00,
                h01: self.h.h01 + o.h.h01,
                h11: self.h.h11 + o.h.h11,
            },
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            v: -self.v,
            g: [-self.g[0], -self.g[1]],
            h: Tri { h00: -self.h.h00, h01: -self.h.h01, h11: -self.h.h11 },
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        self + (-o)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        let (a, b) = (self, o);
        Dual {
            v: a.v * b.v,
            g: [a.v * b.g[0] + b.v * a.g[0], a.v * b.g[1] + b.v * a.g[1]],
            h: Tri {
                h00: a.v * b.h.h00 + b.v * a.h.h00 + 2.0 * a.g[0] * b.g[0],
                h01: a.v * b.h.h01 + b.v * a.h.h01 + a.g[0] * b.g[1] + a.g[1] * b.g[0],
                h11: a.v * b.h.h11 + b.v * a.h.h11 + 2.0 * a.g[1] * b.g[1],
            },
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        self * o.recip()
    }
}
