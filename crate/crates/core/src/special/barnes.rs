//! Barnes G-function and ζ′(−1).

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::bernoulli::bernoulli_even;
use crate::special::gamma::{asymptotic_threshold, log_gamma};

/// ζ′(−1) at the precision of `ctx`.
///
/// Uses ζ′(−1) = (1 − γ − ln 2π)/12 + ζ′(2)/(2π²), with
/// ζ′(2) = −Σ ln k / k² summed by Euler-Maclaurin. This route shares nothing
/// with [`log_barnes_g`], which lets each check the other.
pub fn zeta_prime_minus1<T: Real>(ctx: T::Ctx) -> T {
    let n = asymptotic_threshold::<T>(ctx).ceil() as i64;
    let mut head = T::zero(ctx);
    for k in 2..n {
        let kk = T::from_i64(k, ctx);
        head = head + kk.ln() / kk.square();
    }
    let nn = T::from_i64(n, ctx);
    let ln_n = nn.ln();
    let one = T::one(ctx);
    // integral of ln x / x^2 over [N, inf) plus the endpoint half-weight
    let mut tail = (ln_n.clone() + &one) / &nn + ln_n.clone() / (T::from_i64(2, ctx) * nn.square());
    let eps = T::epsilon(ctx);
    let n2 = nn.square();
    let mut npow = nn.clone() * &n2; // N^{2j+1}
    let mut harmonic = T::one(ctx); // H_{2j}
    for j in 1.. {
        harmonic = harmonic
            + T::ratio(1, 2 * j as i64, ctx)
            + if j > 1 { T::ratio(1, 2 * j as i64 - 1, ctx) } else { T::zero(ctx) };
        let b = T::from_ratio(&bernoulli_even(j), ctx);
        let term = b * (ln_n.clone() - &harmonic + &one) / &npow;
        let small = term.abs() <= eps.clone() * tail.abs();
        tail = tail + term;
        if small {
            break;
        }
        npow = npow * &n2;
    }
    let zeta2_prime = -(head + tail);
    let pi = T::pi(ctx);
    let two_pi = pi.clone() * T::from_i64(2, ctx);
    (one - T::euler_gamma(ctx) - two_pi.ln()) / T::from_i64(12, ctx)
        + zeta2_prime / (T::from_i64(2, ctx) * pi.square())
}

/// `ln G(z)` for `z > 0`, at the precision of `z`.
///
/// Pushes the argument up with G(z+1) = Γ(z) G(z) until the large-argument
/// expansion (leading terms plus its Bernoulli tail) is accurate to working
/// precision, then walks back down.
pub fn log_barnes_g<T: Real>(z: &T) -> Result<T> {
    let ctx = z.context();
    if !(z > &T::zero(ctx)) || !z.is_finite() {
        return Err(Error::domain("log_barnes_g", format!("z = {z:?} is not positive")));
    }
    let threshold = asymptotic_threshold::<T>(ctx);
    let zf = z.to_f64();
    let shift = if zf < threshold {
        (threshold - zf).ceil() as usize
    } else {
        0
    };
    let w = z.clone() + T::from_i64(shift as i64, ctx);
    let mut value = barnes_asymptotic(&(w - T::one(ctx)));
    if shift > 0 {
        // sum_{i<m} ln Γ(z+i) = m ln Γ(z) + sum_{k<m-1} (m-1-k) ln(z+k)
        let mut down = T::from_i64(shift as i64, ctx) * log_gamma(z)?;
        for k in 0..shift.saturating_sub(1) {
            let weight = T::from_i64((shift - 1 - k) as i64, ctx);
            down = down + weight * (z.clone() + T::from_i64(k as i64, ctx)).ln();
        }
        value = value - down;
    }
    Ok(value)
}

/// `ln G(x+1)` for large `x`.
fn barnes_asymptotic<T: Real>(x: &T) -> T {
    let ctx = x.context();
    let ln_x = x.ln();
    let x2 = x.square();
    let two_pi = T::pi(ctx) * T::from_i64(2, ctx);
    let mut sum = x2.clone() * (ln_x.clone() / T::from_i64(2, ctx) - T::ratio(3, 4, ctx))
        + x.clone() / T::from_i64(2, ctx) * two_pi.ln()
        - ln_x / T::from_i64(12, ctx)
        + zeta_prime_minus1::<T>(ctx);
    let eps = T::epsilon(ctx);
    let mut xpow = x2.clone();
    for k in 1.. {
        let b = T::from_ratio(&bernoulli_even(k + 1), ctx);
        let term = b / (T::from_i64((4 * k * (k + 1)) as i64, ctx) * &xpow);
        let small = term.abs() <= eps.clone() * sum.abs();
        sum = sum + term;
        if small {
            break;
        }
        xpow = xpow * &x2;
    }
    sum
}
