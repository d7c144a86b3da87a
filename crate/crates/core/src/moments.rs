//! Moments `μ_j = ∫₀^∞ x^{α+j} e^{−x} (x+t)^λ dx` by two independent routes.
//!
//! The production route evaluates `μ₀` and `μ₁` through Kummer's `U` and
//! climbs with the contiguous recurrence
//! `μ_{j+2} = (α+λ+j+2−t) μ_{j+1} + (α+j+1) t μ_j`
//! (integrate `d/dx[x^{α+j+1} e^{−x} (x+t)^{λ+1}]` over the half-line).
//! The oracle integrates every `μ_j` directly.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::precision::PrecisionCtx;
use crate::scalar::{format_rational, parse_rational, Exact, Real, Scalar};
use crate::special::{integrate_semiaxis, ln_kummer_u, log_gamma, SemiaxisIntegrand};

pub const MOMENT_SCHEMA_VERSION: u32 = 1;

/// Parameters `(α, λ, t)` of the weight, held as exact rationals.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ParamsText", into = "ParamsText")]
pub struct WeightParams {
    alpha: Exact,
    lambda: Exact,
    t: Exact,
}

#[derive(Serialize, Deserialize)]
struct ParamsText {
    alpha: String,
    lambda: String,
    t: String,
}

impl TryFrom<ParamsText> for WeightParams {
    type Error = Error;
    fn try_from(p: ParamsText) -> Result<Self> {
        WeightParams::parse(&p.alpha, &p.lambda, &p.t)
    }
}

impl From<WeightParams> for ParamsText {
    fn from(p: WeightParams) -> Self {
        ParamsText {
            alpha: format_rational(&p.alpha),
            lambda: format_rational(&p.lambda),
            t: format_rational(&p.t),
        }
    }
}

impl fmt::Debug for WeightParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for WeightParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(alpha={}, lambda={}, t={})",
            format_rational(&self.alpha),
            format_rational(&self.lambda),
            format_rational(&self.t)
        )
    }
}

fn integer_of(q: &Exact) -> Option<i64> {
    if q.is_integer() {
        q.to_integer().to_i64()
    } else {
        None
    }
}

impl WeightParams {
    pub fn new(alpha: Exact, lambda: Exact, t: Exact) -> Result<Self> {
        if alpha <= -<Exact as Scalar>::one(()) {
            return Err(Error::domain(
                "WeightParams",
                format!("alpha = {} must exceed -1", format_rational(&alpha)),
            ));
        }
        if t <= <Exact as Scalar>::zero(()) {
            return Err(Error::domain(
                "WeightParams",
                format!("t = {} must be positive", format_rational(&t)),
            ));
        }
        Ok(WeightParams { alpha, lambda, t })
    }

    /// From decimal or `p/q` literals, e.g. `("0.5", "-1/2", "2")`.
    pub fn parse(alpha: &str, lambda: &str, t: &str) -> Result<Self> {
        let q = |name: &str, s: &str| {
            parse_rational(s).ok_or_else(|| Error::Parse(format!("{name} = `{s}` is not a number")))
        };
        WeightParams::new(q("alpha", alpha)?, q("lambda", lambda)?, q("t", t)?)
    }

    /// Small-integer convenience: `α = a_num/a_den` etc.
    pub fn ratios(alpha: (i64, i64), lambda: (i64, i64), t: (i64, i64)) -> Result<Self> {
        let r = |(n, d): (i64, i64)| Exact::new(BigInt::from(n), BigInt::from(d));
        WeightParams::new(r(alpha), r(lambda), r(t))
    }

    pub fn alpha(&self) -> &Exact {
        &self.alpha
    }

    pub fn lambda(&self) -> &Exact {
        &self.lambda
    }

    pub fn t(&self) -> &Exact {
        &self.t
    }

    pub fn alpha_as<T: Scalar>(&self, ctx: T::Ctx) -> T {
        T::from_ratio(&self.alpha, ctx)
    }

    pub fn lambda_as<T: Scalar>(&self, ctx: T::Ctx) -> T {
        T::from_ratio(&self.lambda, ctx)
    }

    pub fn t_as<T: Scalar>(&self, ctx: T::Ctx) -> T {
        T::from_ratio(&self.t, ctx)
    }

    pub fn lambda_is_zero(&self) -> bool {
        Scalar::is_zero(&self.lambda)
    }

    pub fn lambda_integer(&self) -> Option<i64> {
        integer_of(&self.lambda)
    }

    pub fn alpha_integer(&self) -> Option<i64> {
        integer_of(&self.alpha)
    }

    /// Exact moments exist when `α` and `λ` are non-negative integers.
    pub fn has_exact_moments(&self) -> bool {
        matches!((self.alpha_integer(), self.lambda_integer()), (Some(a), Some(l)) if a >= 0 && l >= 0)
    }

    pub fn with_t(&self, t: Exact) -> Result<Self> {
        WeightParams::new(self.alpha.clone(), self.lambda.clone(), t)
    }

    pub fn with_lambda(&self, lambda: Exact) -> Self {
        WeightParams {
            lambda,
            ..self.clone()
        }
    }

    /// Stable text key, used for caching and file names.
    pub fn key(&self) -> String {
        format!(
            "a{}_l{}_t{}",
            format_rational(&self.alpha),
            format_rational(&self.lambda),
            format_rational(&self.t)
        )
        .replace('/', "over")
    }
}

/// How a table's values were produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentRoute {
    ClosedForm,
    Quadrature,
    CrossChecked,
    Exact,
}

/// `μ_0..μ_{2 n_max}` at fixed parameters.
#[derive(Clone, Debug)]
pub struct MomentTable<T> {
    params: WeightParams,
    n_max: usize,
    mu: Vec<T>,
    route: MomentRoute,
    cross_residual: Option<f64>,
    digits: f64,
    precision: PrecisionCtx,
}

impl<T: Scalar> MomentTable<T> {
    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn route(&self) -> MomentRoute {
        self.route
    }

    /// Largest relative gap between the two routes, when both ran.
    pub fn cross_residual(&self) -> Option<f64> {
        self.cross_residual
    }

    /// Decimal digits the entries can be trusted to.
    pub fn certified_digits(&self) -> f64 {
        self.digits
    }

    pub fn precision(&self) -> &PrecisionCtx {
        &self.precision
    }

    /// Build a table from values computed elsewhere.
    pub fn from_values(params: WeightParams, mu: Vec<T>, route: MomentRoute, digits: f64, precision: PrecisionCtx) -> Result<Self> {
        if mu.len() < 3 || mu.len() % 2 == 0 {
            return Err(Error::DataIntegrity(format!(
                "moment table needs 2n+1 >= 3 entries, got {}",
                mu.len()
            )));
        }
        Ok(MomentTable {
            params,
            n_max: (mu.len() - 1) / 2,
            mu,
            route,
            cross_residual: None,
            digits,
            precision,
        })
    }

    /// Multiply `μ_j` by `1 + rel`; a fault-injection hook for pipeline tests.
    pub fn corrupt_moment(&mut self, j: usize, rel: &T) {
        let ctx = self.mu[j].context();
        let bumped = self.mu[j].clone() * (T::one(ctx) + rel);
        self.mu[j] = bumped;
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": MOMENT_SCHEMA_VERSION,
            "kind": "moment_table",
            "params": self.params,
            "n_max": self.n_max,
            "precision": self.precision,
            "route": self.route,
            "cross_residual": self.cross_residual.map(|r| format!("{r:e}")),
            "certified_digits": self.digits,
            "mu": self.mu.iter().map(Scalar::to_text).collect::<Vec<_>>(),
        })
    }

    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = String::from("j,mu_j\n");
        for (j, m) in self.mu.iter().enumerate() {
            out.push_str(&format!("{j},{}\n", m.to_text_digits(digits)));
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("moment table serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        let version = v["schema_version"].as_u64().unwrap_or(0);
        if version != MOMENT_SCHEMA_VERSION as u64 {
            return Err(Error::Parse(format!("unsupported moment schema version {version}")));
        }
        let params: WeightParams = serde_json::from_value(v["params"].clone())?;
        let precision: PrecisionCtx = serde_json::from_value(v["precision"].clone())?;
        let route: MomentRoute = serde_json::from_value(v["route"].clone())?;
        let ctx = T::ctx_for(&precision);
        let mu = v["mu"]
            .as_array()
            .ok_or_else(|| Error::Parse("`mu` is not an array".into()))?
            .iter()
            .map(|s| {
                s.as_str()
                    .and_then(|s| T::from_text(s, ctx))
                    .ok_or_else(|| Error::Parse(format!("bad moment entry {s}")))
            })
            .collect::<Result<Vec<T>>>()?;
        let mut table = MomentTable::from_values(
            params,
            mu,
            route,
            v["certified_digits"].as_f64().unwrap_or(f64::INFINITY),
            precision,
        )?;
        table.cross_residual = v["cross_residual"].as_str().and_then(|s| s.parse().ok());
        Ok(table)
    }
}

fn binomial(n: i64, k: i64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn factorial(n: i64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Exact `μ_0..μ_{count-1}` for integer `α, λ ≥ 0`:
/// `μ_j = Σ_k C(λ,k) t^{λ−k} (α+j+k)!`.
pub fn exact_moments(count: usize, p: &WeightParams) -> Result<Vec<Exact>> {
    let (a, l) = match (p.alpha_integer(), p.lambda_integer()) {
        (Some(a), Some(l)) if a >= 0 && l >= 0 => (a, l),
        _ => {
            return Err(Error::domain(
                "exact_moments",
                format!("needs non-negative integer alpha and lambda, got {p}"),
            ))
        }
    };
    let t = p.t().clone();
    Ok((0..count as i64)
        .map(|j| {
            (0..=l).fold(<Exact as Scalar>::zero(()), |acc, k| {
                let c = Exact::from_integer(binomial(l, k) * factorial(a + j + k));
                acc + c * num_traits::pow(t.clone(), (l - k) as usize)
            })
        })
        .collect())
}

pub fn exact_moment_table(n_max: usize, p: &WeightParams) -> Result<MomentTable<Exact>> {
    let mu = exact_moments(2 * n_max + 1, p)?;
    MomentTable::from_values(p.clone(), mu, MomentRoute::Exact, f64::INFINITY, PrecisionCtx::default())
}

/// Digits the forward recurrence is expected to shed for `count` moments.
fn predicted_loss(count: usize, p: &WeightParams) -> f64 {
    let t = Scalar::to_f64(p.t());
    let a = Scalar::to_f64(p.alpha());
    let l = Scalar::to_f64(p.lambda());
    (0..count.saturating_sub(2))
        .map(|j| {
            let scale = (a + l + j as f64 + 2.0).abs().max(a + j as f64 + 1.0).max(1.0);
            (t / scale).log10().max(0.0) + 0.3
        })
        .sum()
}

/// `ln μ_j` from `t^{α+j+λ+1} Γ(α+j+1) U(α+j+1, α+j+λ+2, t)`, in log space.
fn ln_moment_kummer<T: Real>(j: usize, p: &WeightParams, ctx: &PrecisionCtx) -> Result<T> {
    let s = T::ctx_for(ctx);
    let a = p.alpha_as::<T>(s) + T::from_i64(j as i64 + 1, s);
    let lam = p.lambda_as::<T>(s);
    let t = p.t_as::<T>(s);
    let b = a.clone() + &lam + T::one(s);
    let full = PrecisionCtx {
        target_digits: ctx.work_digits.saturating_sub(8).max(1),
        ..*ctx
    };
    let ln_u = ln_kummer_u(&a, &b, &t, &full)?;
    Ok((b - T::one(s)) * t.ln() + log_gamma(&a)? + ln_u)
}

/// `μ_0..μ_{count-1}` on the production route, and the digits actually lost.
pub fn closed_form_moments<T: Real>(count: usize, p: &WeightParams, ctx: &PrecisionCtx) -> Result<(Vec<T>, f64)> {
    let count = count.max(1);
    let mut extra = predicted_loss(count, p).ceil() as u32 + 5;
    for _ in 0..=ctx.max_refinements {
        let raised = ctx.raised_by(extra);
        let (mu, lost) = moments_by_recurrence::<T>(count, p, &raised)?;
        if lost + 3.0 <= extra as f64 || T::decimal_digits(T::ctx_for(ctx)) < 20.0 {
            let s = T::ctx_for(ctx);
            return Ok((mu.into_iter().map(|m| m.with_ctx(s)).collect(), lost));
        }
        extra = (lost.ceil() as u32) + 10;
    }
    Err(Error::Precision {
        op: "closed_form_moments",
        msg: format!("recurrence cancellation kept exceeding the guard for {p}"),
        last: String::new(),
        previous: String::new(),
    })
}

fn moments_by_recurrence<T: Real>(count: usize, p: &WeightParams, ctx: &PrecisionCtx) -> Result<(Vec<T>, f64)> {
    let s = T::ctx_for(ctx);
    let mut mu = Vec::with_capacity(count);
    mu.push(ln_moment_kummer::<T>(0, p, ctx)?.exp());
    if count > 1 {
        mu.push(ln_moment_kummer::<T>(1, p, ctx)?.exp());
    }
    let alpha = p.alpha_as::<T>(s);
    let lam = p.lambda_as::<T>(s);
    let t = p.t_as::<T>(s);
    let mut lost = 0.0f64;
    for j in 0..count.saturating_sub(2) {
        let jj = T::from_i64(j as i64, s);
        let c1 = alpha.clone() + &lam + &jj + T::from_i64(2, s) - &t;
        let c0 = (alpha.clone() + &jj + T::one(s)) * &t;
        let a = c1 * &mu[j + 1];
        let b = c0 * &mu[j];
        let big = a.log10_abs().max(b.log10_abs());
        let next = a + b;
        lost += (big - next.log10_abs()).max(0.0);
        mu.push(next);
    }
    Ok((mu, lost))
}

/// `μ_j` on the production route.
pub fn moment_closed_form<T: Real>(j: usize, p: &WeightParams, ctx: &PrecisionCtx) -> Result<T> {
    if j < 2 {
        let s = T::ctx_for(ctx);
        return Ok(ln_moment_kummer::<T>(j, p, ctx)?.exp().with_ctx(s));
    }
    let (mut mu, _) = closed_form_moments::<T>(j + 1, p, ctx)?;
    Ok(mu.swap_remove(j))
}

/// `μ_j` by direct quadrature of the defining integral.
pub fn moment_quadrature<T: Real>(j: usize, p: &WeightParams, ctx: &PrecisionCtx) -> Result<T> {
    let s = T::ctx_for(ctx);
    let lam = p.lambda_as::<T>(s);
    let t = p.t_as::<T>(s);
    let factor = move |x: &T| {
        if lam.is_zero() {
            T::one(x.context())
        } else {
            (lam.clone() * (x.clone() + &t).ln()).exp()
        }
    };
    let power = p.alpha_as::<T>(s) + T::from_i64(j as i64, s);
    let f = SemiaxisIntegrand::new(power, &factor);
    integrate_semiaxis(&f, ctx)
}

/// `μ_j` with `λ → λ − 1`, so that `dμ_j/dt = λ · moment_lambda_shifted(j)`.
pub fn moment_lambda_shifted<T: Real>(j: usize, p: &WeightParams, ctx: &PrecisionCtx) -> Result<T> {
    let shifted = p.with_lambda(p.lambda().clone() - <Exact as Scalar>::one(()));
    moment_closed_form(j, &shifted, ctx)
}

/// Production table without the quadrature cross-check.
pub fn closed_form_table<T: Real>(n_max: usize, p: &WeightParams, ctx: &PrecisionCtx) -> Result<MomentTable<T>> {
    if n_max < 1 {
        return Err(Error::domain("closed_form_table", "n_max must be at least 1"));
    }
    let (mu, lost) = closed_form_moments::<T>(2 * n_max + 1, p, ctx)?;
    // the recurrence ran with `lost` digits of headroom, so only quadrature rounding remains
    let digits = T::decimal_digits(T::ctx_for(ctx)).min(ctx.work_digits as f64) - 8.0;
    debug_assert!(lost.is_finite());
    MomentTable::from_values(p.clone(), mu, MomentRoute::ClosedForm, digits, *ctx)
}

/// Both routes, certified against each other to `ctx.target_digits`.
pub fn build_moment_table<T: Real>(n_max: usize, p: &WeightParams, ctx: &PrecisionCtx) -> Result<MomentTable<T>> {
    let mut table = closed_form_table::<T>(n_max, p, ctx)?;
    let oracle = ctx.oracle();
    let quad = (0..table.mu.len())
        .into_par_iter()
        .map(|j| moment_quadrature::<T>(j, p, &oracle))
        .collect::<Result<Vec<T>>>()?;
    let mut worst = (0usize, f64::NEG_INFINITY);
    for (j, (cf, q)) in table.mu.iter().zip(&quad).enumerate() {
        let rel = (cf.clone() - q).log10_abs() - cf.log10_abs();
        if rel > worst.1 {
            worst = (j, rel);
        }
    }
    let tol = -(ctx.target_digits as f64);
    if worst.1 > tol {
        return Err(Error::DataIntegrity(format!(
            "moment routes disagree at j={} by 1e{:.1} (tolerance 1e{tol}) for {p}",
            worst.0, worst.1
        )));
    }
    table.cross_residual = Some(10f64.powf(worst.1));
    table.route = MomentRoute::CrossChecked;
    Ok(table)
}

/// Content-addressed store of immutable tables keyed by parameters, size and precision.
pub struct MomentCache<T> {
    inner: Mutex<HashMap<String, Arc<MomentTable<T>>>>,
}

impl<T> Default for MomentCache<T> {
    fn default() -> Self {
        MomentCache {
            inner: Mutex::new(HashMap::new()),
        }
    }
}

impl<T: Scalar> MomentCache<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_build<F>(&self, n_max: usize, p: &WeightParams, ctx: &PrecisionCtx, build: F) -> Result<Arc<MomentTable<T>>>
    where
        F: FnOnce() -> Result<MomentTable<T>>,
    {
        let key = format!("{}|{}|{}", p.key(), n_max, serde_json::to_string(ctx)?);
        if let Some(hit) = self.inner.lock().expect("moment cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let table = Arc::new(build()?);
        self.inner
            .lock()
            .expect("moment cache poisoned")
            .entry(key)
            .or_insert_with(|| table.clone());
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("moment cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigreal::BigReal;

    fn fixture() -> WeightParams {
        WeightParams::parse("0", "1", "2").unwrap()
    }

    #[test]
    fn params_validate_domain() {
        assert!(WeightParams::parse("-1", "0", "1").is_err());
        assert!(WeightParams::parse("0", "0", "0").is_err());
        assert!(WeightParams::parse("-0.5", "-3", "0.1").is_ok());
        assert!(WeightParams::parse("x", "0", "1").is_err());
    }

    #[test]
    fn exact_fixture_moments() {
        let mu = exact_moments(4, &fixture()).unwrap();
        let ints: Vec<i64> = mu.iter().map(|m| m.to_integer().to_i64().unwrap()).collect();
        assert_eq!(ints, vec![3, 4, 10, 36]);
        let lag = exact_moments(5, &WeightParams::parse("0", "0", "5").unwrap()).unwrap();
        let ints: Vec<i64> = lag.iter().map(|m| m.to_integer().to_i64().unwrap()).collect();
        assert_eq!(ints, vec![1, 1, 2, 6, 24]);
    }

    #[test]
    fn closed_form_matches_exact_fixture() {
        let ctx = PrecisionCtx::with_target(40);
        let bits = ctx.bits();
        let (mu, _) = closed_form_moments::<BigReal>(4, &fixture(), &ctx).unwrap();
        for (m, e) in mu.iter().zip([3, 4, 10, 36]) {
            assert!((m.clone() - BigReal::from_i64(e, bits)).abs().log10_abs() < -40.0);
        }
        let third: BigReal = moment_closed_form(3, &WeightParams::parse("0", "0", "1").unwrap(), &ctx).unwrap();
        assert!((third - BigReal::from_i64(6, bits)).abs().log10_abs() < -40.0);
    }

    #[test]
    fn quadrature_route() {
        let ctx = PrecisionCtx::with_target(30);
        let bits = ctx.bits();
        let one: BigReal = moment_quadrature(0, &WeightParams::parse("0", "0", "1").unwrap(), &ctx).unwrap();
        assert!((one - BigReal::one(bits)).abs().log10_abs() < -30.0);
        let four: BigReal = moment_quadrature(1, &fixture(), &ctx).unwrap();
        assert!((four - BigReal::from_i64(4, bits)).abs().log10_abs() < -30.0);
    }

    #[test]
    fn frozen_half_integer_moment() {
        let ctx = PrecisionCtx::with_target(50);
        let bits = ctx.bits();
        let p = WeightParams::parse("0.5", "-0.5", "1").unwrap();
        let v: BigReal = moment_closed_form(0, &p, &ctx).unwrap();
        let expect = BigReal::parse_decimal(
            "0.6034501612189380876681189981652416974166383558445137798902328586687528",
            bits,
        )
        .unwrap();
        assert!((v - expect).abs().log10_abs() < -50.0);
    }

    #[test]
    fn lambda_shift_is_the_t_derivative() {
        let ctx = PrecisionCtx::with_target(30);
        let d: BigReal = moment_lambda_shifted(2, &WeightParams::parse("0", "1", "3").unwrap(), &ctx).unwrap();
        assert!((d - BigReal::from_i64(2, ctx.bits())).abs().log10_abs() < -30.0);
        // μ₀ = t + 1 at α=0, λ=1, so dμ₀/dt = 1
        let d0: f64 = moment_lambda_shifted(0, &fixture(), &PrecisionCtx::with_target(12)).unwrap();
        assert!((d0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cross_checked_table_and_round_trip() {
        let ctx = PrecisionCtx::with_target(30);
        let table: MomentTable<BigReal> = build_moment_table(1, &fixture(), &ctx).unwrap();
        assert_eq!(table.route(), MomentRoute::CrossChecked);
        assert!(table.cross_residual().unwrap() <= 1e-30);
        let text = table.to_json_string();
        let back = MomentTable::<BigReal>::from_json_str(&text).unwrap();
        assert_eq!(back.mu(), table.mu());
        assert_eq!(back.params(), table.params());
        assert_eq!(back.to_json_string(), text);
    }

    #[test]
    fn large_t_cancellation_is_absorbed() {
        let ctx = PrecisionCtx::with_target(30);
        let p = WeightParams::parse("0", "2", "10000").unwrap();
        let (mu, lost) = closed_form_moments::<BigReal>(12, &p, &ctx).unwrap();
        assert!(lost > 10.0);
        let exact = exact_moments(12, &p).unwrap();
        for (m, e) in mu.iter().zip(&exact) {
            let e = BigReal::from_ratio(e, ctx.bits());
            assert!(((m.clone() - &e) / e).abs().log10_abs() < -30.0);
        }
    }

    #[test]
    fn cache_returns_shared_tables() {
        let cache = MomentCache::<Exact>::new();
        let ctx = PrecisionCtx::default();
        let a = cache.get_or_build(2, &fixture(), &ctx, || exact_moment_table(2, &fixture())).unwrap();
        let b = cache
            .get_or_build(2, &fixture(), &ctx, || panic!("should be cached"))
            .unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
    }
}
