//! Arbitrary-precision real backed by MPFR.
//!
//! Every primitive operation is correctly rounded to the result precision,
//! which is the larger of the operand precisions. Identical inputs therefore
//! give bit-identical outputs.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_rational::BigRational;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer};

use crate::precision::PrecisionCtx;
use crate::scalar::{Real, Scalar};

#[derive(Clone)]
pub struct BigReal(Float);

impl BigReal {
    pub fn from_float(f: Float) -> Self {
        BigReal(f)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    /// Binary precision of this value.
    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Same value rounded to another precision.
    pub fn with_prec(&self, bits: u32) -> Self {
        BigReal(Float::with_val(bits, &self.0))
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (self.0.prec() as f64 * std::f64::consts::LOG10_2) as usize;
        write!(f, "{}", self.to_decimal(digits.clamp(2, 40)))
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (self.0.prec() as f64 * std::f64::consts::LOG10_2) as usize;
        write!(f, "{}", self.to_decimal(digits.max(2)))
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! binop {
    ($Tr:ident, $m:ident, $Assign:ident, $assign:ident) => {
        impl $Tr<BigReal> for BigReal {
            type Output = BigReal;
            fn $m(self, rhs: BigReal) -> BigReal {
                self.$m(&rhs)
            }
        }

        impl<'a> $Tr<&'a BigReal> for BigReal {
            type Output = BigReal;
            fn $m(mut self, rhs: &'a BigReal) -> BigReal {
                if self.0.prec() >= rhs.0.prec() {
                    std::ops::$Assign::$assign(&mut self.0, &rhs.0);
                    self
                } else {
                    BigReal(Float::with_val(rhs.0.prec(), (&self.0).$m(&rhs.0)))
                }
            }
        }

        impl<'a> $Tr<&'a BigReal> for &'a BigReal {
            type Output = BigReal;
            fn $m(self, rhs: &'a BigReal) -> BigReal {
                let p = self.0.prec().max(rhs.0.prec());
                BigReal(Float::with_val(p, (&self.0).$m(&rhs.0)))
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Div, div, DivAssign, div_assign);
binop!(Rem, rem, RemAssign, rem_assign);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0)
    }
}

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(Float::with_val(self.0.prec(), -&self.0))
    }
}

fn integer_from_bigint(b: &num_bigint::BigInt) -> Integer {
    // Decimal strings are the one interchange format both libraries agree on.
    b.to_string().parse().expect("BigInt renders as a valid integer")
}

impl Scalar for BigReal {
    type Ctx = u32;

    fn context(&self) -> u32 {
        self.0.prec()
    }

    fn from_i64(v: i64, bits: u32) -> Self {
        BigReal(Float::with_val(bits, v))
    }

    fn from_ratio(q: &BigRational, bits: u32) -> Self {
        let n = integer_from_bigint(q.numer());
        let d = integer_from_bigint(q.denom());
        let r = rug::Rational::from((n, d));
        BigReal(Float::with_val(bits, &r))
    }

    fn abs(&self) -> Self {
        BigReal(Float::with_val(self.0.prec(), self.0.abs_ref()))
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    fn log10_abs(&self) -> f64 {
        if self.0.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (m, e) = self.0.to_f64_exp();
        m.abs().log10() + e as f64 * std::f64::consts::LOG10_2
    }

    fn decimal_digits(bits: u32) -> f64 {
        bits as f64 * std::f64::consts::LOG10_2
    }

    fn ctx_for(p: &PrecisionCtx) -> u32 {
        p.bits()
    }

    fn square(&self) -> Self {
        BigReal(Float::with_val(self.0.prec(), self.0.square_ref()))
    }

    fn to_text(&self) -> String {
        let digits = (self.0.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
        self.to_decimal(digits)
    }

    fn to_text_digits(&self, digits: usize) -> String {
        self.to_decimal(digits)
    }

    fn from_text(s: &str, bits: u32) -> Option<Self> {
        Self::parse_decimal(s, bits)
    }
}

impl Real for BigReal {
    fn from_f64(v: f64, bits: u32) -> Self {
        BigReal(Float::with_val(bits, v))
    }

    fn sqrt(&self) -> Self {
        BigReal(Float::with_val(self.0.prec(), self.0.sqrt_ref()))
    }

    fn exp(&self) -> Self {
        BigReal(Float::with_val(self.0.prec(), self.0.exp_ref()))
    }

    fn ln(&self) -> Self {
        BigReal(Float::with_val(self.0.prec(), self.0.ln_ref()))
    }

    fn ln_1p(&self) -> Self {
        BigReal(Float::with_val(self.0.prec(), self.0.ln_1p_ref()))
    }

    fn powf(&self, e: &Self) -> Self {
        let p = self.0.prec().max(e.0.prec());
        BigReal(Float::with_val(p, (&self.0).pow(&e.0)))
    }

    fn sinh(&self) -> Self {
        BigReal(Float::with_val(self.0.prec(), self.0.sinh_ref()))
    }

    fn cosh(&self) -> Self {
        BigReal(Float::with_val(self.0.prec(), self.0.cosh_ref()))
    }

    fn pi(bits: u32) -> Self {
        BigReal(Float::with_val(bits, Constant::Pi))
    }

    fn euler_gamma(bits: u32) -> Self {
        BigReal(Float::with_val(bits, Constant::Euler))
    }

    fn epsilon(bits: u32) -> Self {
        BigReal(Float::with_val(bits, Float::u_exp(1, 1 - bits as i32)))
    }

    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    fn to_decimal(&self, digits: usize) -> String {
        self.0.to_string_radix(10, Some(digits.max(1)))
    }

    fn parse_decimal(s: &str, bits: u32) -> Option<Self> {
        let parsed = Float::parse(s.trim()).ok()?;
        Some(BigReal(Float::with_val(bits, parsed)))
    }

    fn with_ctx(&self, bits: u32) -> Self {
        self.with_prec(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_takes_the_wider_precision() {
        let a = BigReal::from_i64(1, 64);
        let b = BigReal::from_i64(3, 256);
        let q = a / &b;
        assert_eq!(q.prec(), 256);
    }

    #[test]
    fn decimal_round_trip_is_bit_identical() {
        let bits = 300;
        let x = BigReal::from_i64(2, bits).sqrt() / BigReal::from_i64(7, bits);
        let digits = (bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
        let s = x.to_decimal(digits);
        let y = BigReal::parse_decimal(&s, bits).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn log10_of_huge_value() {
        let x = BigReal::from_i64(10, 200).powi(5000);
        assert!((x.log10_abs() - 5000.0).abs() < 1e-9);
    }

    #[test]
    fn rationals_convert_exactly_when_dyadic() {
        let q = crate::scalar::parse_rational("0.375").unwrap();
        assert_eq!(BigReal::from_ratio(&q, 64).to_f64(), 0.375);
    }
}
