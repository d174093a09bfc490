//! Values of the form `sign * L^(-a) * n^rho` with exact exponents.

use crate::rational::{to_f64, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::cmp::Ordering;

/// The two bases every value in a table shares.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scale {
    pub l: Rational,
    pub n: u64,
}

impl Scale {
    pub fn new(l: Rational, n: u64) -> Self {
        assert!(l > Rational::zero() && n >= 1, "scale bases must be positive");
        Scale { l, n }
    }

    fn ln_l(&self) -> f64 {
        to_f64(&self.l).ln()
    }

    fn ln_n(&self) -> f64 {
        (self.n as f64).ln()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogValue {
    pub sign: i8,
    pub a: i64,
    #[serde(with = "crate::rational::serde_str")]
    pub rho: Rational,
    /// Floating mirror of the exact value, used for sums.
    pub float: f64,
}

impl LogValue {
    pub fn zero() -> Self {
        LogValue { sign: 0, a: 0, rho: Rational::zero(), float: 0.0 }
    }

    pub fn one() -> Self {
        LogValue { sign: 1, a: 0, rho: Rational::zero(), float: 1.0 }
    }

    /// `L^(-a) * n^rho`.
    pub fn new(scale: &Scale, a: i64, rho: Rational) -> Self {
        LogValue { sign: 1, a, rho, float: Self::mirror(scale, a, &rho) }
    }

    fn mirror(scale: &Scale, a: i64, rho: &Rational) -> f64 {
        (-(a as f64) * scale.ln_l() + to_f64(rho) * scale.ln_n()).exp()
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Natural log of the absolute value.
    pub fn ln(&self, scale: &Scale) -> f64 {
        if self.sign == 0 {
            return f64::NEG_INFINITY;
        }
        -(self.a as f64) * scale.ln_l() + to_f64(&self.rho) * scale.ln_n()
    }

    pub fn mul(&self, other: &LogValue, scale: &Scale) -> LogValue {
        if self.sign == 0 || other.sign == 0 {
            return LogValue::zero();
        }
        let a = self.a + other.a;
        let rho = self.rho + other.rho;
        LogValue { sign: self.sign * other.sign, a, rho, float: self.sign as f64 * other.sign as f64 * Self::mirror(scale, a, &rho) }
    }

    /// Multiplies by `L^(-da) * n^drho`.
    pub fn shift(&self, scale: &Scale, da: i64, drho: Rational) -> LogValue {
        if self.sign == 0 {
            return LogValue::zero();
        }
        let a = self.a + da;
        let rho = self.rho + drho;
        LogValue { sign: self.sign, a, rho, float: self.sign as f64 * Self::mirror(scale, a, &rho) }
    }

    pub fn neg(&self) -> LogValue {
        LogValue { sign: -self.sign, float: -self.float, ..self.clone() }
    }

    /// Exact comparison.
    pub fn cmp_exact(&self, other: &LogValue, scale: &Scale) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => {}
            o => return o,
        }
        if self.sign == 0 {
            return Ordering::Equal;
        }
        let mag = cmp_magnitude(self.a, &self.rho, other.a, &other.rho, scale);
        if self.sign > 0 {
            mag
        } else {
            mag.reverse()
        }
    }

    pub fn ge_exact(&self, other: &LogValue, scale: &Scale) -> bool {
        self.cmp_exact(other, scale) != Ordering::Less
    }
}

/// Compares `L^(-a1) n^r1` with `L^(-a2) n^r2`.
fn cmp_magnitude(a1: i64, r1: &Rational, a2: i64, r2: &Rational, scale: &Scale) -> Ordering {
    // L^(-a1) n^r1 >= L^(-a2) n^r2  <=>  n^(r1 - r2) >= L^(a1 - a2); raise both sides to q.
    let dr = r1 - r2;
    let (p, q) = (*dr.numer(), *dr.denom());
    let da = (a1 - a2) * q;
    let (ln, ld) = (BigInt::from(*scale.l.numer()), BigInt::from(*scale.l.denom()));
    let n = BigInt::from(scale.n);
    // left = n^p as a fraction, right = L^da as a fraction
    let (left_num, left_den) = power(&n, &BigInt::one(), p);
    let (right_num, right_den) = power(&ln, &ld, da);
    (left_num * right_den).cmp(&(right_num * left_den))
}

fn power(num: &BigInt, den: &BigInt, e: i64) -> (BigInt, BigInt) {
    let k = e.unsigned_abs() as u32;
    let (x, y) = (num.pow(k), den.pow(k));
    let (x, y) = if e >= 0 { (x, y) } else { (y, x) };
    if y.is_negative() {
        (-x, -y)
    } else {
        (x, y)
    }
}

/// Neumaier compensated sum.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
