//! Scalar abstraction shared by the algebraic and analytic layers.
//!
//! [`Scalar`] is a field with just enough extra structure for the Hankel
//! factorisation, the recurrence algebra and the identity residuals. It is
//! implemented for `f64`, exact rationals ([`Exact`]) and the arbitrary
//! precision [`BigReal`](crate::BigReal). [`Real`] adds the transcendental
//! functions needed by quadrature and the asymptotic series; exact rationals
//! do not implement it.
//!
//! Constants are built through an explicit context (`Scalar::Ctx`): unit for
//! `f64` and rationals, the binary precision for `BigReal`.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{NumOps, Signed, ToPrimitive, Zero};

use crate::precision::PrecisionCtx;

/// Exact rational arithmetic.
pub type Exact = BigRational;

pub trait Scalar:
    Clone + Debug + PartialOrd + Send + Sync + 'static + NumOps + for<'a> NumOps<&'a Self> + Neg<Output = Self>
{
    type Ctx: Copy + Debug + PartialEq + Send + Sync;

    fn context(&self) -> Self::Ctx;
    fn from_i64(v: i64, ctx: Self::Ctx) -> Self;
    fn from_ratio(q: &BigRational, ctx: Self::Ctx) -> Self;
    fn abs(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// `log10 |x|`, finite even where `to_f64` would overflow; `-inf` at zero.
    fn log10_abs(&self) -> f64;
    /// Decimal digits carried by one value in this context (`inf` if exact).
    fn decimal_digits(ctx: Self::Ctx) -> f64;
    /// Scalar context matching a decimal precision policy.
    fn ctx_for(p: &PrecisionCtx) -> Self::Ctx;
    /// Lossless text form: reparsing with `from_text` gives the same value.
    fn to_text(&self) -> String;
    /// Text form rounded to `digits` significant digits (exact types ignore `digits`).
    fn to_text_digits(&self, digits: usize) -> String;
    fn from_text(s: &str, ctx: Self::Ctx) -> Option<Self>;

    fn zero(ctx: Self::Ctx) -> Self {
        Self::from_i64(0, ctx)
    }

    fn one(ctx: Self::Ctx) -> Self {
        Self::from_i64(1, ctx)
    }

    fn ratio(num: i64, den: i64, ctx: Self::Ctx) -> Self {
        Self::from_i64(num, ctx) / Self::from_i64(den, ctx)
    }

    fn square(&self) -> Self {
        self.clone() * self
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one(self.context());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc
    }

    fn max_abs<'a>(values: impl IntoIterator<Item = &'a Self>, ctx: Self::Ctx) -> Self
    where
        Self: 'a,
    {
        values.into_iter().fold(Self::zero(ctx), |m, v| {
            let a = v.abs();
            if a > m {
                a
            } else {
                m
            }
        })
    }
}

/// A real scalar with elementary transcendental functions.
pub trait Real: Scalar {
    fn from_f64(v: f64, ctx: Self::Ctx) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn ln_1p(&self) -> Self;
    fn powf(&self, e: &Self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn pi(ctx: Self::Ctx) -> Self;
    fn euler_gamma(ctx: Self::Ctx) -> Self;
    /// Unit roundoff of the context.
    fn epsilon(ctx: Self::Ctx) -> Self;
    fn is_finite(&self) -> bool;
    /// Scientific decimal rendering with `digits` significant digits.
    fn to_decimal(&self, digits: usize) -> String;
    fn parse_decimal(s: &str, ctx: Self::Ctx) -> Option<Self>;
    /// Same value rounded into another context.
    fn with_ctx(&self, ctx: Self::Ctx) -> Self;
}

impl Scalar for f64 {
    type Ctx = ();

    fn context(&self) {}

    fn from_i64(v: i64, _: ()) -> Self {
        v as f64
    }

    fn from_ratio(q: &BigRational, _: ()) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn log10_abs(&self) -> f64 {
        f64::abs(*self).log10()
    }

    fn decimal_digits(_: ()) -> f64 {
        f64::EPSILON.log10().abs()
    }

    fn ctx_for(_: &PrecisionCtx) {}

    fn to_text(&self) -> String {
        format!("{self:e}")
    }

    fn to_text_digits(&self, digits: usize) -> String {
        Real::to_decimal(self, digits)
    }

    fn from_text(s: &str, _: ()) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl Real for f64 {
    fn from_f64(v: f64, _: ()) -> Self {
        v
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn ln_1p(&self) -> Self {
        f64::ln_1p(*self)
    }
    fn powf(&self, e: &Self) -> Self {
        f64::powf(*self, *e)
    }
    fn sinh(&self) -> Self {
        f64::sinh(*self)
    }
    fn cosh(&self) -> Self {
        f64::cosh(*self)
    }
    fn pi(_: ()) -> Self {
        std::f64::consts::PI
    }
    fn euler_gamma(_: ()) -> Self {
        0.577_215_664_901_532_9
    }
    fn epsilon(_: ()) -> Self {
        f64::EPSILON / 2.0
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn to_decimal(&self, digits: usize) -> String {
        format!("{:.*e}", digits.saturating_sub(1).min(16), self)
    }
    fn parse_decimal(s: &str, _: ()) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn with_ctx(&self, _: ()) -> Self {
        *self
    }
}

impl Scalar for Exact {
    type Ctx = ();

    fn context(&self) {}

    fn from_i64(v: i64, _: ()) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(q: &BigRational, _: ()) -> Self {
        q.clone()
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn log10_abs(&self) -> f64 {
        if Zero::is_zero(self) {
            return f64::NEG_INFINITY;
        }
        log10_bigint(self.numer()) - log10_bigint(self.denom())
    }

    fn decimal_digits(_: ()) -> f64 {
        f64::INFINITY
    }

    fn ctx_for(_: &PrecisionCtx) {}

    fn to_text(&self) -> String {
        format_rational(self)
    }

    fn to_text_digits(&self, _: usize) -> String {
        format_rational(self)
    }

    fn from_text(s: &str, _: ()) -> Option<Self> {
        parse_rational(s)
    }
}

pub(crate) fn log10_bigint(b: &BigInt) -> f64 {
    let bits = b.bits();
    if bits < 1000 {
        return b.to_f64().map(f64::abs).unwrap_or(f64::INFINITY).log10();
    }
    let shift = bits - 64;
    let top: BigInt = b.abs() >> shift as usize;
    top.to_f64().unwrap_or(f64::INFINITY).log10() + shift as f64 * std::f64::consts::LOG10_2
}

/// Parses a finite decimal literal (`"1.3"`, `"-0.5"`, `"2e-3"`, `"7/3"`) into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if Zero::is_zero(&d) {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp10 - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        q = -q;
    }
    Some(q)
}

/// Shortest decimal rendering of a rational when it terminates, `p/q` otherwise.
pub fn format_rational(q: &BigRational) -> String {
    let mut den = q.denom().clone();
    let mut twos = 0usize;
    let mut fives = 0usize;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while Zero::is_zero(&(&den % &two)) {
        den /= &two;
        twos += 1;
    }
    while Zero::is_zero(&(&den % &five)) {
        den /= &five;
        fives += 1;
    }
    if den != BigInt::from(1) {
        return format!("{}/{}", q.numer(), q.denom());
    }
    let places = twos.max(fives);
    if places == 0 {
        return q.numer().to_string();
    }
    let scaled = q * BigRational::from_integer(num_traits::pow(BigInt::from(10), places));
    let n = scaled.to_integer();
    let neg = n.sign() == num_bigint::Sign::Minus;
    let digits = n.abs().to_string();
    let padded = format!("{:0>width$}", digits, width = places + 1);
    let (i, f) = padded.split_at(padded.len() - places);
    let f = f.trim_end_matches('0');
    let body = if f.is_empty() {
        i.to_string()
    } else {
        format!("{i}.{f}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        let q = parse_rational("1.3").unwrap();
        assert_eq!(q, BigRational::new(13.into(), 10.into()));
        assert_eq!(parse_rational("-0.5").unwrap(), BigRational::new((-1).into(), 2.into()));
        assert_eq!(parse_rational("2e-3").unwrap(), BigRational::new(1.into(), 500.into()));
        assert_eq!(parse_rational("7/3").unwrap(), BigRational::new(7.into(), 3.into()));
        assert_eq!(parse_rational("1e4").unwrap(), BigRational::from_integer(10000.into()));
        assert!(parse_rational("abc").is_none());
        assert!(parse_rational("1/0").is_none());
    }

    #[test]
    fn formats_terminating_and_repeating() {
        assert_eq!(format_rational(&parse_rational("1.3").unwrap()), "1.3");
        assert_eq!(format_rational(&parse_rational("-0.5").unwrap()), "-0.5");
        assert_eq!(format_rational(&parse_rational("2").unwrap()), "2");
        assert_eq!(format_rational(&parse_rational("0.0025").unwrap()), "0.0025");
        assert_eq!(format_rational(&parse_rational("7/3").unwrap()), "7/3");
    }

    #[test]
    fn exact_log10_handles_huge_values() {
        let big = Exact::from_integer(num_traits::pow(BigInt::from(10), 400));
        assert!((big.log10_abs() - 400.0).abs() < 1e-9);
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = Exact::ratio(3, 2, ());
        assert_eq!(x.powi(5), Exact::ratio(243, 32, ()));
        assert_eq!(2.0f64.powi(0), 1.0);
    }
}
