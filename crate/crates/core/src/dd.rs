//! Double-double arithmetic (unevaluated sum of two f64), enough for
//! compensated Horner evaluation of polynomials whose exact coefficients
//! alternate in sign.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
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
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Nearest double-double to an exact rational.
    pub fn from_rational(r: &BigRational) -> Self {
        if r.is_zero() {
            return Dd::default();
        }
        let hi = r.to_f64().unwrap_or(f64::NAN);
        if !hi.is_finite() {
            return Dd::from_f64(hi);
        }
        let hi_exact = BigRational::from_float(hi).expect("finite");
        let lo = (r - hi_exact).to_f64().unwrap_or(0.0);
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        if !hi.is_finite() {
            return Dd::from_f64(hi);
        }
        Dd { hi, lo }
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        if !hi.is_finite() {
            return Dd::from_f64(hi);
        }
        Dd { hi, lo }
    }

    pub fn square_f64(x: f64) -> Dd {
        let (hi, lo) = two_prod(x, x);
        if !hi.is_finite() {
            return Dd::from_f64(hi);
        }
        Dd { hi, lo }
    }
}

/// Horner evaluation with double-double accumulators; coefficients lowest
/// power first.
pub(crate) fn horner(coeffs: &[Dd], x: Dd) -> f64 {
    coeffs
        .iter()
        .rev()
        .fold(Dd::default(), |acc, &c| acc.mul(x).add(c))
        .to_f64()
}
