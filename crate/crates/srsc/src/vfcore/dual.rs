//! Forward-mode dual numbers.
//!
//! A [`Dual`] carries a value and one directional derivative; evaluating an
//! expression on duals seeded with `(x_i, v_i)` yields the exact directional
//! derivative of the expression along `v` in one pass. This is the default
//! differentiation mode for expression fields: nested brackets lose accuracy
//! fast under finite differences, while dual evaluation is exact to roundoff.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value + directional-derivative pair for forward-mode differentiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    /// Function value.
    pub v: f64,
    /// Directional derivative.
    pub d: f64,
}

impl Dual {
    /// A constant (zero derivative).
    pub fn constant(v: f64) -> Self {
        Dual { v, d: 0.0 }
    }

    /// A seeded variable with derivative `d`.
    pub fn seeded(v: f64, d: f64) -> Self {
        Dual { v, d }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual { v: self.v * o.v, d: self.d * o.v + self.v * o.d }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual { v: self.v / o.v, d: (self.d * o.v - self.v * o.d) / (o.v * o.v) }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { v: -self.v, d: -self.d }
    }
}

/// The scalar operations an expression can be evaluated over. Implemented for
/// `f64` (plain evaluation) and [`Dual`] (evaluation with derivative).
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(c: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn asin(self) -> Self;
    fn acos(self) -> Self;
    fn atan(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn powf(self, e: Self) -> Self;
}

impl Scalar for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn asin(self) -> Self {
        f64::asin(self)
    }
    fn acos(self) -> Self {
        f64::acos(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powf(self, e: Self) -> Self {
        f64::powf(self, e)
    }
}

impl Scalar for Dual {
    fn from_f64(c: f64) -> Self {
        Dual::constant(c)
    }
    fn sin(self) -> Self {
        Dual { v: self.v.sin(), d: self.d * self.v.cos() }
    }
    fn cos(self) -> Self {
        Dual { v: self.v.cos(), d: -self.d * self.v.sin() }
    }
    fn tan(self) -> Self {
        let c = self.v.cos();
        Dual { v: self.v.tan(), d: self.d / (c * c) }
    }
    fn asin(self) -> Self {
        Dual { v: self.v.asin(), d: self.d / (1.0 - self.v * self.v).sqrt() }
    }
    fn acos(self) -> Self {
        Dual { v: self.v.acos(), d: -self.d / (1.0 - self.v * self.v).sqrt() }
    }
    fn atan(self) -> Self {
        Dual { v: self.v.atan(), d: self.d / (1.0 + self.v * self.v) }
    }
    fn sinh(self) -> Self {
        Dual { v: self.v.sinh(), d: self.d * self.v.cosh() }
    }
    fn cosh(self) -> Self {
        Dual { v: self.v.cosh(), d: self.d * self.v.sinh() }
    }
    fn tanh(self) -> Self {
        let c = self.v.cosh();
        Dual { v: self.v.tanh(), d: self.d / (c * c) }
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        Dual { v: e, d: self.d * e }
    }
    fn ln(self) -> Self {
        Dual { v: self.v.ln(), d: self.d / self.v }
    }
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        Dual { v: r, d: if r == 0.0 { f64::NAN } else { self.d * 0.5 / r } }
    }
    fn abs(self) -> Self {
        Dual { v: self.v.abs(), d: if self.v >= 0.0 { self.d } else { -self.d } }
    }
    fn powf(self, e: Self) -> Self {
        // General power via exp(e * ln(base)) where needed; integer-like
        // exponents with zero derivative avoid the ln singularity at v <= 0.
        if e.d == 0.0 {
            let p = self.v.powf(e.v);
            Dual { v: p, d: e.v * self.v.powf(e.v - 1.0) * self.d }
        } else {
            (e * self.ln()).exp()
        }
    }
}

pub(crate) use Scalar as ScalarOps;
