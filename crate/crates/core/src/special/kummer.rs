//! Confluent hypergeometric function of the second kind, `U(a, b, z)`, for `a, z > 0`.

use crate::error::{Error, Result};
use crate::precision::PrecisionCtx;
use crate::scalar::Real;
use crate::special::gamma::log_gamma;
use crate::special::quadrature::{integrate_semiaxis, SemiaxisIntegrand};

/// `ln U(a, b, z)`.
///
/// With `s = u/z` the integral representation becomes
/// `U = z^{−a}/Γ(a) ∫₀^∞ u^{a−1} e^{−u} (1 + u/z)^{b−a−1} du`, which is the
/// `x^p e^{−x}` kernel that [`integrate_semiaxis`] expects. `U > 0` on this range.
pub fn ln_kummer_u<T: Real>(a: &T, b: &T, z: &T, ctx: &PrecisionCtx) -> Result<T> {
    let sctx = a.context();
    let zero = T::zero(sctx);
    if !(a > &zero) {
        return Err(Error::domain("kummer_u", format!("a = {a:?} must be positive")));
    }
    if !(z > &zero) {
        return Err(Error::domain("kummer_u", format!("z = {z:?} must be positive")));
    }
    let one = T::one(sctx);
    let e = b.clone() - a - &one;
    let zz = z.clone();
    let factor = move |u: &T| (e.clone() * (u.clone() / &zz).ln_1p()).exp();
    let f = SemiaxisIntegrand::new(a.clone() - &one, &factor);
    let integral = integrate_semiaxis(&f, ctx)?;
    Ok(integral.ln() - a.clone() * z.ln() - log_gamma(a)?)
}

/// `U(a, b, z)` for `a > 0`, `z > 0`.
pub fn kummer_u<T: Real>(a: &T, b: &T, z: &T, ctx: &PrecisionCtx) -> Result<T> {
    Ok(ln_kummer_u(a, b, z, ctx)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigreal::BigReal;
    use crate::scalar::Scalar;

    #[test]
    fn contiguous_identity() {
        // U(a, a+1, z) = z^{-a}
        let ctx = PrecisionCtx::with_target(40);
        let bits = ctx.bits();
        let v = kummer_u(
            &BigReal::one(bits),
            &BigReal::from_i64(2, bits),
            &BigReal::from_i64(3, bits),
            &ctx,
        )
        .unwrap();
        assert!((v - BigReal::ratio(1, 3, bits)).abs().log10_abs() < -40.0);
    }

    #[test]
    fn large_argument_limit() {
        let ctx = PrecisionCtx::with_target(12);
        let a = 1.5f64;
        let z = 1e6f64;
        let v = kummer_u(&a, &2.0, &z, &ctx).unwrap() * z.powf(a);
        assert!((v - 1.0).abs() < 1e-3);
        assert!((v - 0.999_999_250_001_406_2).abs() < 1e-10);
    }

    #[test]
    fn moment_reconstruction() {
        // t^{α+λ+1} Γ(α+1) U(α+1, α+λ+2, t) at α=0, λ=1, t=2 is 3
        let ctx = PrecisionCtx::with_target(40);
        let bits = ctx.bits();
        let u = kummer_u(
            &BigReal::one(bits),
            &BigReal::from_i64(3, bits),
            &BigReal::from_i64(2, bits),
            &ctx,
        )
        .unwrap();
        let mu0 = u * BigReal::from_i64(4, bits);
        assert!((mu0 - BigReal::from_i64(3, bits)).abs().log10_abs() < -40.0);
    }

    #[test]
    fn domain_errors() {
        let ctx = PrecisionCtx::with_target(10);
        assert!(kummer_u(&0.0f64, &1.0, &1.0, &ctx).is_err());
        assert!(kummer_u(&1.0f64, &1.0, &-1.0, &ctx).is_err());
    }
}
