//! Double-exponential quadrature for `∫₀^∞ x^p e^{−x} g(x) dx`.
//!
//! The half-line is split at `c`; `[0, c]` uses the tanh-sinh map and
//! `[c, ∞)` the exp-sinh map. Both are refined by halving the step until two
//! successive levels agree to the requested digits.

use crate::error::{Error, Result};
use crate::precision::PrecisionCtx;
use crate::scalar::Real;

/// Integrand `x^power · e^{−x} · factor(x)` on the half-line.
pub struct SemiaxisIntegrand<'a, T> {
    /// Exponent of the `x^p` kernel, `p > −1`.
    pub power: T,
    /// Smooth factor `g`.
    pub factor: &'a (dyn Fn(&T) -> T + Sync),
    /// Split point; defaults to `max(1, p)`, near where the kernel peaks.
    pub split: Option<T>,
}

impl<'a, T: Real> SemiaxisIntegrand<'a, T> {
    pub fn new(power: T, factor: &'a (dyn Fn(&T) -> T + Sync)) -> Self {
        SemiaxisIntegrand {
            power,
            factor,
            split: None,
        }
    }

    pub fn with_split(mut self, c: T) -> Self {
        self.split = Some(c);
        self
    }

    fn eval(&self, x: &T, ln_x: &T) -> T {
        let kernel = (self.power.clone() * ln_x - x).exp();
        kernel * (self.factor)(x)
    }
}

#[derive(Clone, Copy)]
enum Piece {
    /// `x = c / (1 + e^{−2u})`
    Finite,
    /// `x = c + s e^{u}`
    Tail,
}

struct Mapped<'m, 'a, T> {
    f: &'m SemiaxisIntegrand<'a, T>,
    piece: Piece,
    c: T,
    ln_c: T,
    s: T,
    half_pi: T,
}

impl<T: Real> Mapped<'_, '_, T> {
    /// Transformed integrand `f(x(τ)) x'(τ)`.
    fn at(&self, tau: &T) -> T {
        let ctx = tau.context();
        let u = self.half_pi.clone() * tau.sinh();
        let ch = tau.cosh();
        match self.piece {
            Piece::Finite => {
                let one = T::one(ctx);
                let zero = T::zero(ctx);
                // e = e^{-2|u|} keeps everything bounded on both sides
                let neg = u < zero;
                let e = (-(u.abs() * T::from_i64(2, ctx))).exp();
                let onep = one.clone() + &e;
                let (x, ln_x) = if neg {
                    let x = self.c.clone() * &e / &onep;
                    let ln_x = self.ln_c.clone() - u.abs() * T::from_i64(2, ctx) - e.ln_1p();
                    (x, ln_x)
                } else {
                    (self.c.clone() / &onep, self.ln_c.clone() - e.ln_1p())
                };
                let dx = self.c.clone() * T::pi(ctx) * ch * &e / onep.square();
                if x.is_zero() {
                    return zero;
                }
                self.f.eval(&x, &ln_x) * dx
            }
            Piece::Tail => {
                let eu = u.exp();
                let x = self.c.clone() + self.s.clone() * &eu;
                let ln_x = x.ln();
                let dx = self.s.clone() * eu * &self.half_pi * ch;
                self.f.eval(&x, &ln_x) * dx
            }
        }
    }
}

/// `∫₀^∞ x^p e^{−x} g(x) dx` to `ctx.target_digits` (capped by the scalar's own precision).
pub fn integrate_semiaxis<T: Real>(f: &SemiaxisIntegrand<'_, T>, ctx: &PrecisionCtx) -> Result<T> {
    let sctx = f.power.context();
    let p = f.power.to_f64();
    if !(p > -1.0) {
        return Err(Error::domain(
            "integrate_semiaxis",
            format!("kernel exponent {p} must exceed -1"),
        ));
    }
    let one = T::one(sctx);
    let c = match &f.split {
        Some(c) => c.clone(),
        None => {
            if f.power > one {
                f.power.clone()
            } else {
                one.clone()
            }
        }
    };
    let s = if c > one { c.sqrt() } else { one };
    let digits = (ctx.target_digits as f64).min(T::decimal_digits(sctx) - 8.0).max(1.0);
    let half_pi = T::pi(sctx) / T::from_i64(2, sctx);
    let ln_c = c.ln();
    let mut total = T::zero(sctx);
    for piece in [Piece::Finite, Piece::Tail] {
        let m = Mapped {
            f,
            piece,
            c: c.clone(),
            ln_c: ln_c.clone(),
            s: s.clone(),
            half_pi: half_pi.clone(),
        };
        total = total + integrate_piece(&m, digits, p)?;
    }
    Ok(total)
}

fn integrate_piece<T: Real>(m: &Mapped<'_, '_, T>, digits: f64, p: f64) -> Result<T> {
    let sctx = m.c.context();
    let working = T::decimal_digits(sctx).min(4000.0);
    // Far enough out that the double-exponential decay has buried every term.
    let tau_cap = {
        // slowest decay: e^{u} on the inner end of the tail piece, x^{p+1} near zero
        let need = (working + 10.0) * std::f64::consts::LN_10 / (2.0 * (p + 1.0)).min(1.0);
        (2.0 * need / std::f64::consts::PI).asinh() + 0.5
    }
    .min(12.0);
    let (lo, hi) = tau_range(m, working, tau_cap);
    let tol_log = -digits;

    let base_level = 2u32;
    let max_level = {
        // tanh-sinh error behaves like exp(-π²/h); pick the level that clears `working`
        let h = std::f64::consts::PI.powi(2) / ((working + 10.0) * std::f64::consts::LN_10);
        ((1.0 / h).log2().ceil() as u32 + 6).max(base_level + 4)
    };
    let mut h_level = base_level;
    let mut h = T::ratio(1, 1 << base_level, sctx);
    let step = 1.0 / (1u64 << base_level) as f64;
    let mut sum = T::zero(sctx);
    let mut l1 = T::zero(sctx);
    let mut k = (lo / step).floor() as i64;
    while (k as f64) * step <= hi {
        let v = m.at(&(T::from_i64(k, sctx) * &h));
        l1 = l1 + v.abs();
        sum = sum + v;
        k += 1;
    }
    let mut estimate = sum.clone() * &h;
    loop {
        h_level += 1;
        let denom = 1i64 << h_level;
        let step = 1.0 / denom as f64;
        h = T::ratio(1, denom, sctx);
        let mut k = ((lo / step).floor() as i64) | 1;
        let mut added = T::zero(sctx);
        while (k as f64) * step <= hi {
            let v = m.at(&(T::from_i64(k, sctx) * &h));
            l1 = l1 + v.abs();
            added = added + v;
            k += 2;
        }
        sum = sum + added;
        let next = sum.clone() * &h;
        let diff = (next.clone() - &estimate).abs();
        let scale = l1.clone() * &h;
        let previous = std::mem::replace(&mut estimate, next);
        let rel = if scale.is_zero() {
            f64::NEG_INFINITY
        } else {
            diff.log10_abs() - scale.log10_abs()
        };
        if rel <= tol_log || diff.is_zero() {
            return Ok(estimate);
        }
        if h_level >= max_level {
            return Err(Error::Precision {
                op: "integrate_semiaxis",
                msg: format!("no agreement to {digits:.0} digits by step 2^-{h_level} (relative gap 1e{rel:.1})"),
                last: estimate.to_text_digits(30),
                previous: previous.to_text_digits(30),
            });
        }
    }
}

/// Window `[lo, hi]` in τ outside which the mapped integrand is negligible.
fn tau_range<T: Real>(m: &Mapped<'_, '_, T>, working: f64, cap: f64) -> (f64, f64) {
    let sctx = m.c.context();
    let step = 1.0 / 16.0;
    let cutoff = -(working + 5.0);
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut peak = f64::NEG_INFINITY;
    for dir in [1.0f64, -1.0] {
        let mut j = if dir > 0.0 { 0 } else { 1 };
        loop {
            let tau = dir * j as f64 * step;
            if tau.abs() > cap {
                break;
            }
            let v = m.at(&T::from_f64(tau, sctx)).log10_abs();
            if v.is_finite() {
                peak = peak.max(v);
            }
            samples.push((tau, v));
            // stop once well past the peak and below the cutoff
            if j > 16 && (v.is_nan() || v == f64::NEG_INFINITY || v - peak < cutoff) {
                break;
            }
            j += 1;
        }
    }
    let keep = |v: f64| v.is_finite() && v - peak >= cutoff;
    let lo = samples
        .iter()
        .filter(|(t, v)| *t <= 0.0 && keep(*v))
        .map(|(t, _)| *t)
        .fold(0.0f64, f64::min);
    let hi = samples
        .iter()
        .filter(|(t, v)| *t >= 0.0 && keep(*v))
        .map(|(t, _)| *t)
        .fold(0.0f64, f64::max);
    ((lo - step).max(-cap), (hi + step).min(cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigreal::BigReal;
    use crate::scalar::Scalar;
    use crate::special::gamma::log_gamma;

    #[test]
    fn exponential_integrates_to_one() {
        let ctx = PrecisionCtx::with_target(13);
        let g = |_: &f64| 1.0;
        let f = SemiaxisIntegrand::new(0.0f64, &g);
        let v = integrate_semiaxis(&f, &ctx).unwrap();
        assert!((v - 1.0).abs() < 1e-13, "{v}");
    }

    #[test]
    fn gamma_values_at_high_precision() {
        let ctx = PrecisionCtx::with_target(60);
        let bits = ctx.bits();
        let one = |x: &BigReal| BigReal::one(x.context());
        for (n, d) in [(-1i64, 2i64), (0, 1), (1, 1), (13, 4)] {
            let p = BigReal::ratio(n, d, bits);
            let f = SemiaxisIntegrand::new(p.clone(), &one);
            let v = integrate_semiaxis(&f, &ctx).unwrap();
            let expect = log_gamma(&(p + BigReal::one(bits))).unwrap().exp();
            let rel = ((v - &expect) / expect).abs();
            assert!(rel.log10_abs() < -60.0, "p={n}/{d}: 1e{}", rel.log10_abs());
        }
    }

    #[test]
    fn exponential_integral_oracle() {
        // ∫ e^{-x}/(x+2) dx = e² E₁(2)
        let ctx = PrecisionCtx::with_target(30);
        let bits = ctx.bits();
        let two = BigReal::from_i64(2, bits);
        let g = move |x: &BigReal| BigReal::one(bits) / (x.clone() + &two);
        let f = SemiaxisIntegrand::new(BigReal::zero(bits), &g);
        let v = integrate_semiaxis(&f, &ctx).unwrap();
        let expect = BigReal::parse_decimal(
            "0.3613286168882225846971616576787399389545906415473023961713772345788818",
            bits,
        )
        .unwrap();
        assert!((v - expect).abs().log10_abs() < -30.0);
    }

    #[test]
    fn sharply_peaked_kernel() {
        // x^200 e^{-x}: all mass near x = 200
        let ctx = PrecisionCtx::with_target(40);
        let bits = ctx.bits();
        let one = |x: &BigReal| BigReal::one(x.context());
        let p = BigReal::from_i64(200, bits);
        let f = SemiaxisIntegrand::new(p.clone(), &one);
        let v = integrate_semiaxis(&f, &ctx).unwrap();
        let expect = log_gamma(&BigReal::from_i64(201, bits)).unwrap().exp();
        assert!(((v - &expect) / expect).abs().log10_abs() < -40.0);
    }

    #[test]
    fn rejects_non_integrable_kernel() {
        let ctx = PrecisionCtx::with_target(10);
        let one = |_: &f64| 1.0;
        let f = SemiaxisIntegrand::new(-1.0f64, &one);
        assert!(integrate_semiaxis(&f, &ctx).is_err());
    }
}
