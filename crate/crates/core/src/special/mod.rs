//! Special functions and quadrature.
//!
//! Each routine runs at the precision carried by its scalar arguments.
//! [`certify`] wraps one in the refinement contract: evaluate at the working
//! precision and at twice that, accept when the two agree to the target.

mod barnes;
mod bernoulli;
mod gamma;
mod kummer;
mod quadrature;

pub use barnes::{log_barnes_g, zeta_prime_minus1};
pub use bernoulli::bernoulli_even;
pub use gamma::log_gamma;
pub use kummer::{kummer_u, ln_kummer_u};
pub use quadrature::{integrate_semiaxis, SemiaxisIntegrand};

use crate::bigreal::BigReal;
use crate::error::{Error, Result};
use crate::precision::PrecisionCtx;
use crate::scalar::{Real, Scalar};

/// Runs `op` at `ctx` and at doubled working precision until two results agree
/// to `ctx.target_digits`, escalating at most `ctx.max_refinements` times.
///
/// Returns the higher-precision value rounded to the caller's working precision.
pub fn certify<F>(ctx: &PrecisionCtx, name: &'static str, op: F) -> Result<BigReal>
where
    F: Fn(&PrecisionCtx) -> Result<BigReal>,
{
    let tol = -(ctx.target_digits as f64);
    let mut current = *ctx;
    let mut value = op(&current)?;
    for _ in 0..=ctx.max_refinements {
        let finer = current.doubled();
        let next = op(&finer)?;
        if agree(&value, &next, tol) {
            return Ok(next.with_ctx(BigReal::ctx_for(ctx)));
        }
        current = finer;
        value = next;
    }
    Err(Error::Precision {
        op: name,
        msg: format!(
            "no two refinements agreed to {} digits within {} doublings",
            ctx.target_digits, ctx.max_refinements
        ),
        last: value.to_text_digits(40),
        previous: String::from("(see last)"),
    })
}

fn agree(a: &BigReal, b: &BigReal, tol: f64) -> bool {
    let diff = (a.clone() - b).abs();
    if diff.is_zero() {
        return true;
    }
    let scale = a.abs().log10_abs().max(0.0);
    diff.log10_abs() - scale <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certify_accepts_stable_values() {
        let ctx = PrecisionCtx::with_target(30);
        let v = certify(&ctx, "ln_gamma", |c| {
            log_gamma(&BigReal::ratio(7, 3, BigReal::ctx_for(c)))
        })
        .unwrap();
        assert_eq!(v.prec(), ctx.bits());
    }

    #[test]
    fn certify_rejects_precision_dependent_values() {
        // A value that changes with precision can never certify.
        let ctx = PrecisionCtx::with_target(10);
        let r = certify(&ctx, "unstable", |c| Ok(BigReal::from_i64(c.work_digits as i64, 64)));
        assert!(matches!(r, Err(Error::Precision { .. })));
    }
}
