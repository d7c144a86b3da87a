//! `ln Γ` by upward shifting and the Stirling series.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::bernoulli::bernoulli_even;

/// Argument above which the asymptotic series converges to full precision.
pub(crate) fn asymptotic_threshold<T: Real>(ctx: T::Ctx) -> f64 {
    T::decimal_digits(ctx).min(4000.0) + 10.0
}

/// `ln(z (z+1) ... (z+m-1))`, taking the log in blocks so `f64` never overflows.
pub(crate) fn ln_rising<T: Real>(z: &T, m: usize) -> T {
    let ctx = z.context();
    let mut acc = T::zero(ctx);
    let mut block = T::one(ctx);
    for i in 0..m {
        block = block * &(z.clone() + T::from_i64(i as i64, ctx));
        if block.log10_abs() > 200.0 {
            acc = acc + block.ln();
            block = T::one(ctx);
        }
    }
    acc + block.ln()
}

/// Natural log of the gamma function for `z > 0`, at the precision of `z`.
pub fn log_gamma<T: Real>(z: &T) -> Result<T> {
    let ctx = z.context();
    if !(z > &T::zero(ctx)) || !z.is_finite() {
        return Err(Error::domain("log_gamma", format!("z = {z:?} is not positive")));
    }
    let threshold = asymptotic_threshold::<T>(ctx);
    let zf = z.to_f64();
    let shift = if zf < threshold {
        (threshold - zf).ceil() as usize
    } else {
        0
    };
    let x = z.clone() + T::from_i64(shift as i64, ctx);
    Ok(stirling(&x) - ln_rising(z, shift))
}

/// Stirling series for large `x`.
fn stirling<T: Real>(x: &T) -> T {
    let ctx = x.context();
    let half = T::ratio(1, 2, ctx);
    let two_pi = T::pi(ctx) * T::from_i64(2, ctx);
    let ln_x = x.ln();
    let mut sum = (x.clone() - &half) * &ln_x - x + half * two_pi.ln();
    let eps = T::epsilon(ctx);
    let x2 = x.square();
    let mut xpow = x.clone();
    for k in 1.. {
        let b = T::from_ratio(&bernoulli_even(k), ctx);
        let den = T::from_i64((2 * k * (2 * k - 1)) as i64, ctx) * &xpow;
        let term = b / den;
        let small = term.abs() <= eps.clone() * sum.abs();
        sum = sum + term;
        if small {
            break;
        }
        xpow = xpow * &x2;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigreal::BigReal;
    use crate::scalar::Scalar;

    #[test]
    fn unit_and_factorial_values() {
        assert!(log_gamma(&1.0f64).unwrap().abs() < 1e-13);
        assert!((log_gamma(&5.0f64).unwrap() - 24f64.ln()).abs() < 1e-13);
        let half = log_gamma(&0.5f64).unwrap();
        assert!((half - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(log_gamma(&0.0f64).is_err());
        assert!(log_gamma(&-1.5f64).is_err());
    }

    #[test]
    fn matches_mpfr_at_high_precision() {
        let bits = 700;
        for &(n, d) in &[(3i64, 10i64), (1, 2), (7, 1), (1001, 4), (1, 1000)] {
            let z = BigReal::ratio(n, d, bits);
            let ours = log_gamma(&z).unwrap();
            let theirs = BigReal::from_float(rug::Float::with_val(bits, z.as_float().ln_gamma_ref()));
            let diff = (ours - &theirs).abs();
            assert!(diff.log10_abs() < -200.0, "z={n}/{d}: diff 1e{}", diff.log10_abs());
        }
    }

    #[test]
    fn frozen_value_at_three_tenths() {
        // ln Γ(0.3) = 1.0957979948180755216771681423701...
        let z = BigReal::ratio(3, 10, 200);
        let v = log_gamma(&z).unwrap();
        let expect = BigReal::parse_decimal("1.095797994818075521677168142370107278445148450764", 200).unwrap();
        assert!((v - expect).abs().log10_abs() < -40.0);
    }
}
