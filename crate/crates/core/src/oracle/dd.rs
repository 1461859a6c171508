//! Double-double arithmetic (about 32 significant digits) for the few
//! ill-conditioned solves that need it.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        // One Newton step on the f64 root doubles the precision.
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let r = (self - Dd { hi: p, lo: e }).to_f64();
        Dd::from(x) + Dd::from(r / (2.0 * x))
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from(q3)
    }
}

/// Compensated dot product: the result is as accurate as if the products
/// were summed in double-double, at a fraction of the cost.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Dot2 {
    s: f64,
    c: f64,
}

impl Dot2 {
    #[inline]
    pub fn add_prod(&mut self, a: f64, b: f64) {
        let (p, e) = two_prod(a, b);
        let (s, q) = two_sum(self.s, p);
        self.s = s;
        self.c += q + e;
    }

    #[inline]
    pub fn add_dd_prod(&mut self, a: f64, b: Dd) {
        self.add_prod(a, b.hi);
        self.c += a * b.lo;
    }

    pub fn result(self) -> Dd {
        let (hi, lo) = quick_two_sum(self.s, self.c);
        Dd { hi, lo }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_times_three_is_one() {
        let third = Dd::from(1.0) / Dd::from(3.0);
        assert!(third.lo != 0.0);
        let back = third * Dd::from(3.0) - Dd::from(1.0);
        assert!(back.to_f64().abs() < 1e-31, "{back:?}");
    }

    #[test]
    fn sqrt_two_squares_back() {
        let r = Dd::from(2.0).sqrt();
        assert!((r * r - Dd::from(2.0)).to_f64().abs() < 1e-31);
    }

    #[test]
    fn dot2_survives_cancellation() {
        let mut d = Dot2::default();
        d.add_prod(1e16, 1.0);
        d.add_prod(1.0, 1.0);
        d.add_prod(-1e16, 1.0);
        assert_eq!(d.result().to_f64(), 1.0);
    }

    #[test]
    fn cancellation_keeps_small_terms() {
        let a = Dd::from(1.0) + Dd::from(1e-25);
        assert_eq!((a - Dd::from(1.0)).to_f64(), 1e-25);
    }
}
