//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64` with
//! `|lo| <= ulp(hi) / 2`, giving roughly 31 significant decimal digits.
//!
//! Error-free transformations follow Dekker and Knuth; `exp` uses argument
//! reduction by `ln 2` and a scaled Taylor series.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

const LN2: DoubleDouble = DoubleDouble {
    hi: 0.693_147_180_559_945_3,
    lo: 2.319_046_813_846_299_6e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
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

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    /// 2^-104
    pub const EPSILON: Self = Self {
        hi: 4.930_380_657_631_324e-32,
        lo: 0.0,
    };

    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn from_i64_exact(v: i64) -> Self {
        let hi = v as f64;
        let lo = (v as i128 - hi as i128) as f64;
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    /// Exact multiplication by a power of two.
    fn ldexp(self, exp: i32) -> Self {
        let s = 2f64.powi(exp);
        if s.is_finite() && s != 0.0 {
            Self {
                hi: self.hi * s,
                lo: self.lo * s,
            }
        } else {
            // split the scaling so intermediate factors stay representable
            let half = exp / 2;
            let a = 2f64.powi(half);
            let b = 2f64.powi(exp - half);
            Self {
                hi: self.hi * a * b,
                lo: self.lo * a * b,
            }
        }
    }

    pub fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            let lo = self.lo.floor();
            let (hi, lo) = quick_two_sum(hi, lo);
            Self { hi, lo }
        } else {
            Self { hi, lo: 0.0 }
        }
    }

    pub fn ceil(self) -> Self {
        -((-self).floor())
    }

    pub fn trunc(self) -> Self {
        if self.hi < 0.0 {
            self.ceil()
        } else {
            self.floor()
        }
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.78 {
            return Self {
                hi: f64::INFINITY,
                lo: 0.0,
            };
        }
        if self.hi < -745.2 {
            return Self::ZERO;
        }
        if self.hi == 0.0 {
            return Self::ONE;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).ldexp(-10);

        // exp(r) - 1 by Taylor series; |r| <= ln2 / 2048
        let mut term = r;
        let mut sum = r;
        let mut i = 2.0;
        loop {
            term = term * r / Self::from(i);
            sum += term;
            if term.hi.abs() <= 1e-35 * sum.hi.abs().max(1e-300) || i > 30.0 {
                break;
            }
            i += 1.0;
        }
        // undo the 2^-10 scaling: e^{2x} - 1 = 2(e^x - 1) + (e^x - 1)^2
        for _ in 0..10 {
            sum = sum.ldexp(1) + sum * sum;
        }
        (sum + Self::ONE).ldexp(k as i32)
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Self {
                hi: f64::NAN,
                lo: f64::NAN,
            };
        }
        if self.hi == 1.0 && self.lo == 0.0 {
            return Self::ZERO;
        }
        // Newton on exp: x <- x + a e^{-x} - 1
        let mut x = Self::from(self.hi.ln());
        for _ in 0..2 {
            x = x + self * (-x).exp() - Self::ONE;
        }
        x
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Self::ZERO
            } else {
                Self {
                    hi: f64::NAN,
                    lo: f64::NAN,
                }
            };
        }
        let s = Self::from(self.hi.sqrt());
        s + (self - s * s) / (s.mul_f64(2.0))
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal_string(self, digits: usize) -> String {
        if !self.hi.is_finite() {
            return format!("{}", self.hi);
        }
        if self.hi == 0.0 {
            return "0".to_string();
        }
        let negative = self.hi < 0.0;
        let mut x = self.abs();
        let mut exp10 = x.hi.log10().floor() as i32;
        let ten = Self::from(10.0);
        let scale = |e: i32| -> Self {
            let mut p = Self::ONE;
            for _ in 0..e.unsigned_abs() {
                p *= ten;
            }
            p
        };
        x = if exp10 >= 0 {
            x / scale(exp10)
        } else {
            x * scale(-exp10)
        };
        if x.hi >= 10.0 {
            x /= ten;
            exp10 += 1;
        } else if x.hi < 1.0 {
            x *= ten;
            exp10 -= 1;
        }
        let mut out: Vec<u8> = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let d = x.hi.floor().clamp(0.0, 9.0);
            out.push(d as u8);
            x = (x - Self::from(d)) * ten;
        }
        // round on the guard digit
        if out[digits] >= 5 {
            let mut i = digits;
            loop {
                if i == 0 {
                    out.insert(0, 1);
                    exp10 += 1;
                    break;
                }
                i -= 1;
                if out[i] == 9 {
                    out[i] = 0;
                } else {
                    out[i] += 1;
                    break;
                }
            }
        }
        out.truncate(digits);
        let mantissa: String = out.iter().map(|d| char::from(b'0' + d)).collect();
        format!(
            "{}{}.{}e{}",
            if negative { "-" } else { "" },
            &mantissa[..1],
            &mantissa[1..],
            exp10
        )
    }
}

/// Serialized as the nearest `f64`.
impl serde::Serialize for DoubleDouble {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.hi)
    }
}

impl From<f64> for DoubleDouble {
    fn from(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }
}

impl From<DoubleDouble> for f64 {
    fn from(v: DoubleDouble) -> Self {
        v.hi + v.lo
    }
}

impl PartialEq for DoubleDouble {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        self - b * (self / b).trunc()
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, b: Self) {
        *self = *self - b;
    }
}

impl MulAssign for DoubleDouble {
    fn mul_assign(&mut self, b: Self) {
        *self = *self * b;
    }
}

impl DivAssign for DoubleDouble {
    fn div_assign(&mut self, b: Self) {
        *self = *self / b;
    }
}

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self::ONE
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        s.parse::<f64>().map(Self::from)
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Self::from_i64_exact(n))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        let (hi, lo) = quick_two_sum(hi, lo);
        Some(Self { hi, lo })
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(Self::from(n))
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        Some(t.hi as i64 + t.lo as i64)
    }
    fn to_u64(&self) -> Option<u64> {
        if self.hi < 0.0 {
            return None;
        }
        let t = self.trunc();
        Some((t.hi as i128 + t.lo as i128) as u64)
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string(f.precision().unwrap_or(32)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(got: DoubleDouble, hi: f64, lo: f64) -> f64 {
        let want = DoubleDouble::from_parts(hi, lo);
        ((got - want) / want).abs().hi
    }

    // reference values from a 50-digit evaluation
    #[test]
    fn exp_matches_reference() {
        let cases = [
            (1.0, 2.718281828459045, 1.4456468917292502e-16),
            (-27.75, 8.878265478459658e-13, 6.547953860805517e-30),
            (10.5, 36315.502674246636, 1.577797006387782e-12),
            (0.0009765625, 1.0009770394924165, 8.141755997634129e-17),
        ];
        for (x, hi, lo) in cases {
            let err = rel_err(DoubleDouble::from(x).exp(), hi, lo);
            assert!(err < 1e-30, "exp({x}) rel err {err:e}");
        }
    }

    #[test]
    fn ln_inverts_exp() {
        for x in [-20.5, -1.0, 0.3, 2.0, 45.125] {
            let x = DoubleDouble::from(x);
            let err = (x.exp().ln() - x).abs().hi;
            assert!(err < 1e-29, "err {err:e}");
        }
        let ln2 = DoubleDouble::from(2.0).ln();
        assert!(rel_err(ln2, 0.6931471805599453, 2.3190468138462996e-17) < 1e-31);
    }

    #[test]
    fn sqrt_and_division() {
        let s = DoubleDouble::from(2.0).sqrt();
        assert!(rel_err(s, 1.4142135623730951, -9.667293313452913e-17) < 1e-31);
        let third = DoubleDouble::ONE / DoubleDouble::from(3.0);
        let back = third * DoubleDouble::from(3.0) - DoubleDouble::ONE;
        assert!(back.abs().hi < 1e-31);
    }

    #[test]
    fn exact_integers_and_floor() {
        let big = DoubleDouble::from_i64_exact((1i64 << 60) + 3);
        assert_eq!(big.to_i64(), Some((1i64 << 60) + 3));
        let x = DoubleDouble::from_parts(5.0, -1e-20);
        assert_eq!(x.floor().to_i64(), Some(4));
        assert_eq!(x.ceil().to_i64(), Some(5));
    }

    #[test]
    fn decimal_rendering() {
        let e = DoubleDouble::from(1.0).exp();
        assert_eq!(e.to_decimal_string(30), "2.71828182845904523536028747135e0");
        assert_eq!(DoubleDouble::from(-0.015625).to_decimal_string(3), "-1.56e-2");
    }

    #[test]
    fn small_sums_keep_the_low_word() {
        let a = DoubleDouble::from(1.0) + DoubleDouble::from(1e-20);
        assert_eq!(a.hi(), 1.0);
        assert_eq!(a.lo(), 1e-20);
    }
}
