//! Ladder-operator auxiliaries `R_n`, `r_n`, `H_n` and the finite-n identities they satisfy.
//!
//! Every identity is checked as a residual `|LHS − RHS| / max(1, scale)` where
//! `scale` is the largest magnitude among the terms taking part. Identities in
//! `t`-derivatives are checked on a grid of recurrence tables around `t` with a
//! sixth-order central stencil.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::moments::{closed_form_table, WeightParams};
use crate::orthopoly::{eval_by_recurrence, polynomial, eval_poly_derivs, recurrence_coeffs, RecurrenceTable};
use crate::precision::PrecisionCtx;
use crate::scalar::{format_rational, Exact, Real, Scalar};
use crate::special::{integrate_semiaxis, SemiaxisIntegrand};

pub const AUX_SCHEMA_VERSION: u32 = 1;

/// Digits below certified at which a residual still counts as zero.
pub const RESIDUAL_SLACK: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxProvenance {
    FromRecurrence,
    FromIntegrals,
}

/// `R_0..R_{N−1}`, `r_0..r_{N−1}` (`r_0 = 0`), `H_0..H_N` and `Σ_{j<n} R_j` for `n ≤ N`.
#[derive(Clone, Debug)]
pub struct AuxTable<T> {
    params: WeightParams,
    n: usize,
    big_r: Vec<T>,
    small_r: Vec<T>,
    h: Vec<T>,
    sum_r: Vec<T>,
    indeterminate: Vec<usize>,
    provenance: AuxProvenance,
    digits: f64,
}

impl<T: Scalar> AuxTable<T> {
    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `R_n`, `n < N`.
    pub fn big_r(&self, n: usize) -> &T {
        &self.big_r[n]
    }

    pub fn big_r_all(&self) -> &[T] {
        &self.big_r
    }

    /// `r_n`, `n < N`.
    pub fn small_r(&self, n: usize) -> &T {
        &self.small_r[n]
    }

    pub fn small_r_all(&self) -> &[T] {
        &self.small_r
    }

    /// `H_n`, `n ≤ N`.
    pub fn h(&self, n: usize) -> &T {
        &self.h[n]
    }

    pub fn h_all(&self) -> &[T] {
        &self.h
    }

    /// `Σ_{j<n} R_j`, `n ≤ N`.
    pub fn sum_r(&self, n: usize) -> &T {
        &self.sum_r[n]
    }

    /// Orders where `2n+α+λ = 0`; their `r_n` came from `p(n) = −β_n − t r_n` instead.
    pub fn indeterminate(&self) -> &[usize] {
        &self.indeterminate
    }

    pub fn provenance(&self) -> AuxProvenance {
        self.provenance
    }

    pub fn certified_digits(&self) -> f64 {
        self.digits
    }

    /// `σ(t) = H_n − nλ`.
    pub fn sigma(&self, n: usize) -> T {
        let ctx = self.h[0].context();
        self.h[n].clone() - T::from_i64(n as i64, ctx) * self.params.lambda_as::<T>(ctx)
    }

    /// `σ′(t) = −r_n`.
    pub fn sigma_prime(&self, n: usize) -> T {
        -self.small_r[n].clone()
    }

    pub fn to_json(&self, digits: usize) -> Value {
        let col = |v: &[T]| v.iter().map(|x| x.to_text_digits(digits)).collect::<Vec<_>>();
        json!({
            "schema_version": AUX_SCHEMA_VERSION,
            "kind": "aux_table",
            "params": self.params,
            "n": self.n,
            "provenance": self.provenance,
            "certified_digits": self.digits,
            "indeterminate": self.indeterminate,
            "R": col(&self.big_r),
            "r": col(&self.small_r),
            "H": col(&self.h),
            "sum_R": col(&self.sum_r),
        })
    }

    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = String::from("n,R_n,r_n,H_n,sum_R\n");
        for n in 0..=self.n {
            let cell = |v: &[T]| v.get(n).map(|x| x.to_text_digits(digits)).unwrap_or_default();
            out.push_str(&format!(
                "{n},{},{},{},{}\n",
                cell(&self.big_r),
                cell(&self.small_r),
                cell(&self.h),
                cell(&self.sum_r)
            ));
        }
        out
    }
}

/// Auxiliaries read off the recurrence coefficients.
pub fn aux_from_recurrence<T: Scalar>(recur: &RecurrenceTable<T>) -> Result<AuxTable<T>> {
    let n_top = recur.n();
    let ctx = recur.ctx();
    let p = recur.params();
    let alpha = p.alpha_as::<T>(ctx);
    let lam = p.lambda_as::<T>(ctx);
    let t = p.t_as::<T>(ctx);
    let k = |v: usize| T::from_i64(v as i64, ctx);

    // t R_n = 2n+1+α+λ−α_n
    let big_r: Vec<T> = (0..n_top)
        .map(|n| (k(2 * n + 1) + &alpha + &lam - recur.alpha(n)) / &t)
        .collect();

    let mut small_r = vec![T::zero(ctx)];
    let mut indeterminate = Vec::new();
    for n in 1..n_top {
        let d = k(2 * n) + &alpha + &lam;
        if d.is_zero() {
            indeterminate.push(n);
            small_r.push(-(recur.p(n).clone() + recur.beta(n)) / &t);
            continue;
        }
        // (2n+α+λ) t r_n = −n(n+α)t − β_n(4n+2α+2λ−t−α_n−α_{n−1})
        let kk = k(4 * n) + alpha.clone() * k(2) + lam.clone() * k(2) - &t - recur.alpha(n) - recur.alpha(n - 1);
        let rhs = -(k(n) * (k(n) + &alpha) * &t) - recur.beta(n).clone() * kk;
        small_r.push(rhs / (d * &t));
    }

    // H_n = n(n+α+λ) + p(n)
    let h: Vec<T> = (0..=n_top)
        .map(|n| k(n) * (k(n) + &alpha + &lam) + recur.p(n))
        .collect();
    let sum_r = h.iter().map(|v| v.clone() / &t).collect();
    Ok(AuxTable {
        params: p.clone(),
        n: n_top,
        big_r,
        small_r,
        h,
        sum_r,
        indeterminate,
        provenance: AuxProvenance::FromRecurrence,
        digits: recur.certified_digits(),
    })
}

/// Auxiliaries by direct quadrature of their defining integrals; the oracle for [`aux_from_recurrence`].
pub fn aux_from_integrals<T: Real>(recur: &RecurrenceTable<T>, ctx: &PrecisionCtx) -> Result<AuxTable<T>> {
    let n_top = recur.n();
    let s = recur.ctx();
    let p = recur.params();
    let lam = p.lambda_as::<T>(s);
    let t = p.t_as::<T>(s);
    let alpha = p.alpha_as::<T>(s);
    let zero = T::zero(s);
    let shifted = lam.clone() - T::one(s);

    let integral = |n: usize, cross: bool| -> Result<T> {
        if lam.is_zero() {
            return Ok(zero.clone());
        }
        let tt = t.clone();
        let e = shifted.clone();
        let factor = move |x: &T| {
            let (pn, pm) = eval_by_recurrence(recur, n, x);
            let poly = if cross { pn * pm } else { pn.square() };
            poly * (e.clone() * (x.clone() + &tt).ln()).exp()
        };
        // the polynomial part oscillates out to about 4n; split there
        let split = T::from_i64(2 * n as i64 + 1, s) + alpha.abs();
        let f = SemiaxisIntegrand::new(alpha.clone(), &factor).with_split(split);
        integrate_semiaxis(&f, ctx)
    };

    let big_r = (0..n_top)
        .into_par_iter()
        .map(|n| Ok(lam.clone() * integral(n, false)? / recur.h(n)))
        .collect::<Result<Vec<T>>>()?;
    let mut small_r = vec![zero.clone()];
    small_r.extend(
        (1..n_top)
            .into_par_iter()
            .map(|n| Ok(lam.clone() * integral(n, true)? / recur.h(n - 1)))
            .collect::<Result<Vec<T>>>()?,
    );
    let mut sum_r = vec![zero.clone()];
    for n in 0..n_top {
        let next = sum_r[n].clone() + &big_r[n];
        sum_r.push(next);
    }
    // R_N is not available, so the last partial sum comes from the recurrence
    let last = (T::from_i64(n_top as i64, s) * (T::from_i64(n_top as i64, s) + &alpha + &lam) + recur.p(n_top)) / &t;
    sum_r.push(last);
    sum_r.truncate(n_top + 1);
    let h = sum_r.iter().map(|v| v.clone() * &t).collect();
    Ok(AuxTable {
        params: p.clone(),
        n: n_top,
        big_r,
        small_r,
        h,
        sum_r,
        indeterminate: Vec::new(),
        provenance: AuxProvenance::FromIntegrals,
        digits: recur.certified_digits().min(ctx.target_digits as f64),
    })
}

/// Outcome of checking one identity family over a range of `n`.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub identity: String,
    pub n_range: (usize, usize),
    pub t: String,
    /// Largest normalized residual seen.
    pub max_residual: f64,
    pub log10_residual: f64,
    /// `log10` of the normalization used at the worst point.
    pub log10_scale: f64,
    pub certified_digits: f64,
    /// `log10` of the tolerance at the worst point.
    pub log10_tolerance: f64,
    pub pass: bool,
    pub worst_n: Option<usize>,
    /// Residual with the coarse `t`-step divided by the one with half that step, for FD checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub halving_ratio: Option<f64>,
    pub notes: Vec<String>,
}

impl ResidualReport {
    /// Single-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "{:<12} n={}..{} max 1e{:.1} tol 1e{:.1} {}",
            self.identity,
            self.n_range.0,
            self.n_range.1,
            self.log10_residual,
            self.log10_tolerance,
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

/// `log10 |lhs − rhs| − log10 max(1, max|terms|)` and the normalization used.
pub fn normalized_residual<T: Scalar>(lhs: &T, rhs: &T, terms: &[&T]) -> (f64, f64) {
    let scale = terms
        .iter()
        .map(|v| v.log10_abs())
        .chain([lhs.log10_abs(), rhs.log10_abs()])
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let diff = lhs.clone() - rhs;
    (diff.log10_abs() - scale, scale)
}

fn default_tolerance(certified: f64) -> f64 {
    if certified.is_finite() {
        -(certified - RESIDUAL_SLACK)
    } else {
        f64::NEG_INFINITY
    }
}

struct Tally {
    identity: String,
    lo: usize,
    hi: usize,
    certified: f64,
    worst: Option<(usize, f64, f64, f64)>,
    pass: bool,
    notes: Vec<String>,
    coarse: f64,
}

impl Tally {
    fn new(identity: &str, certified: f64) -> Self {
        Tally {
            identity: identity.to_string(),
            lo: usize::MAX,
            hi: 0,
            certified,
            worst: None,
            pass: true,
            notes: Vec::new(),
            coarse: f64::NEG_INFINITY,
        }
    }

    /// Records one point; `extra` is an additional `log10` allowance (FD truncation).
    fn push(&mut self, n: usize, (res, scale): (f64, f64), extra: f64) {
        self.lo = self.lo.min(n);
        self.hi = self.hi.max(n);
        let tol = default_tolerance(self.certified).max(extra);
        if !(res <= tol) {
            self.pass = false;
        }
        let replace = match self.worst {
            None => true,
            Some((_, w, _, _)) => res > w || w.is_nan(),
        };
        if replace {
            self.worst = Some((n, res, scale, tol));
        }
    }

    fn push_coarse(&mut self, res: f64) {
        self.coarse = self.coarse.max(res);
    }

    fn finish(self, t: &Exact) -> ResidualReport {
        let (worst_n, res, scale, tol) = match self.worst {
            Some((n, r, s, tol)) => (Some(n), r, s, tol),
            None => (None, f64::NEG_INFINITY, 0.0, default_tolerance(self.certified)),
        };
        let mut notes = self.notes;
        if worst_n.is_none() {
            notes.push("empty range".to_string());
        }
        let halving_ratio = if self.coarse.is_finite() && res.is_finite() {
            Some(10f64.powf(self.coarse - res))
        } else {
            None
        };
        ResidualReport {
            identity: self.identity,
            n_range: if worst_n.is_some() { (self.lo, self.hi) } else { (0, 0) },
            t: format_rational(t),
            max_residual: 10f64.powf(res),
            log10_residual: res,
            log10_scale: scale,
            certified_digits: self.certified,
            log10_tolerance: tol,
            pass: self.pass,
            worst_n,
            halving_ratio,
            notes,
        }
    }
}

fn degenerate_note(p: &WeightParams) -> Option<String> {
    p.lambda_is_zero()
        .then(|| "degenerate: classical Laguerre".to_string())
}

/// The five compatibility conditions of the ladder operators.
pub fn verify_compatibility<T: Scalar>(recur: &RecurrenceTable<T>, aux: &AuxTable<T>) -> Vec<ResidualReport> {
    let ctx = recur.ctx();
    let p = recur.params();
    let alpha = p.alpha_as::<T>(ctx);
    let lam = p.lambda_as::<T>(ctx);
    let t = p.t_as::<T>(ctx);
    let one = T::one(ctx);
    let two = T::from_i64(2, ctx);
    let k = |v: usize| T::from_i64(v as i64, ctx);
    let digits = recur.certified_digits().min(aux.certified_digits());
    let top = recur.n().min(aux.n());
    let big_r = |n: usize| aux.big_r(n).clone();
    let r = |n: usize| aux.small_r(n).clone();

    let mut s12 = Tally::new("s12", digits);
    let mut s11 = Tally::new("s11", digits);
    for n in 0..top.saturating_sub(1) {
        // r_n + r_{n+1} = λ − R_n(t+α_n)
        let lhs = r(n) + &r(n + 1);
        let prod = big_r(n) * (t.clone() + recur.alpha(n));
        let rhs = lam.clone() - &prod;
        s12.push(n, normalized_residual(&lhs, &rhs, &[&r(n), &r(n + 1), &lam, &prod]), f64::NEG_INFINITY);
        // 2n+1+α+r_n+r_{n+1} = α_n(1−R_n)
        let lhs = k(2 * n + 1) + &alpha + &r(n) + &r(n + 1);
        let rhs = recur.alpha(n).clone() * (one.clone() - &big_r(n));
        s11.push(n, normalized_residual(&lhs, &rhs, &[recur.alpha(n), &k(2 * n + 1)]), f64::NEG_INFINITY);
    }

    let mut s21 = Tally::new("s21", digits);
    let mut s23 = Tally::new("s23", digits);
    let mut s22a = Tally::new("s22a", digits);
    for n in 1..top {
        let b = recur.beta(n);
        // r_n² − λ r_n = β_n R_n R_{n−1}
        let lhs = r(n).square() - lam.clone() * &r(n);
        let rhs = b.clone() * &big_r(n) * &big_r(n - 1);
        s21.push(n, normalized_residual(&lhs, &rhs, &[&r(n).square(), &(lam.clone() * &r(n))]), f64::NEG_INFINITY);
        // (n+r_n)² + α(n+r_n) = β_n(1−R_n)(1−R_{n−1})
        let m = k(n) + &r(n);
        let lhs = m.square() + alpha.clone() * &m;
        let rhs = b.clone() * (one.clone() - &big_r(n)) * (one.clone() - &big_r(n - 1));
        s23.push(n, normalized_residual(&lhs, &rhs, &[&m.square(), &(alpha.clone() * &m)]), f64::NEG_INFINITY);
        // nλ − 2r_n² − (2n+α−λ+t) r_n − tΣ_{j<n}R_j = β_n[R_n(1−R_{n−1}) + R_{n−1}(1−R_n)]
        let a1 = k(n) * &lam;
        let a2 = two.clone() * r(n).square();
        let a3 = (k(2 * n) + &alpha - &lam + &t) * &r(n);
        let a4 = t.clone() * aux.sum_r(n);
        let lhs = a1.clone() - &a2 - &a3 - &a4;
        let rhs = b.clone()
            * (big_r(n) * (one.clone() - &big_r(n - 1)) + big_r(n - 1) * (one.clone() - &big_r(n)));
        s22a.push(n, normalized_residual(&lhs, &rhs, &[&a1, &a2, &a3, &a4]), f64::NEG_INFINITY);
    }

    let t_exact = p.t();
    let mut out: Vec<ResidualReport> = [s12, s11, s21, s23, s22a]
        .into_iter()
        .map(|tally| tally.finish(t_exact))
        .collect();
    if let Some(note) = degenerate_note(p) {
        out.iter_mut().for_each(|r| r.notes.push(note.clone()));
    }
    out
}

/// `Φ_n = n(n+α)t + β_n(4n+2α+2λ−t−α_n−α_{n−1})`, for `1 ≤ n < N`.
fn phi<T: Scalar>(recur: &RecurrenceTable<T>, n: usize) -> T {
    let ctx = recur.ctx();
    let p = recur.params();
    let alpha = p.alpha_as::<T>(ctx);
    let lam = p.lambda_as::<T>(ctx);
    let t = p.t_as::<T>(ctx);
    let k = |v: usize| T::from_i64(v as i64, ctx);
    let two = k(2);
    k(n) * (k(n) + &alpha) * &t
        + recur.beta(n).clone()
            * (k(4 * n) + two.clone() * &alpha + two * &lam - &t - recur.alpha(n) - recur.alpha(n - 1))
}

/// The two-equation discrete system in `α_n`, `β_n`.
pub fn verify_discrete_system<T: Scalar>(recur: &RecurrenceTable<T>) -> Vec<ResidualReport> {
    let ctx = recur.ctx();
    let p = recur.params();
    let alpha = p.alpha_as::<T>(ctx);
    let lam = p.lambda_as::<T>(ctx);
    let t = p.t_as::<T>(ctx);
    let k = |v: usize| T::from_i64(v as i64, ctx);
    let digits = recur.certified_digits();
    let top = recur.n();
    let al = alpha.clone() + &lam;

    let mut d11 = Tally::new("d11", digits);
    for n in 1..top.saturating_sub(1) {
        let dn = k(2 * n) + &al;
        let dn2 = k(2 * n + 2) + &al;
        let a = recur.alpha(n);
        let t1 = dn2.clone() * phi(recur, n);
        let t2 = dn.clone() * phi(recur, n + 1);
        let lhs = t1.clone() + &t2;
        let u = (t.clone() + a) * (k(2 * n + 1) + &al - a);
        let v = lam.clone() * &t;
        let rhs = dn.clone() * &dn2 * (u.clone() - &v);
        let big = dn.clone() * &dn2 * &u;
        d11.push(n, normalized_residual(&lhs, &rhs, &[&t1, &t2, &big]), f64::NEG_INFINITY);
    }

    let mut d12 = Tally::new("d12", digits);
    for n in 1..top {
        let dn = k(2 * n) + &al;
        let f = phi(recur, n);
        let t1 = f.square();
        let t2 = dn.clone() * &lam * &t * &f;
        let lhs = t1.clone() + &t2;
        let rhs = dn.square()
            * recur.beta(n)
            * (k(2 * n + 1) + &al - recur.alpha(n))
            * (k(2 * n) - k(1) + &al - recur.alpha(n - 1));
        d12.push(n, normalized_residual(&lhs, &rhs, &[&t1, &t2]), f64::NEG_INFINITY);
    }

    let mut out = vec![d11.finish(p.t()), d12.finish(p.t())];
    if let Some(note) = degenerate_note(p) {
        out.iter_mut().for_each(|r| r.notes.push(note.clone()));
    }
    out
}

/// Partial-fraction coefficients `(c/x, d/(x+t))` of `A_n` and `B_n`.
struct LadderCoeffs<T> {
    a: (T, T),
    b: (T, T),
}

fn ladder_coeffs<T: Scalar>(recur: &RecurrenceTable<T>, aux: Option<&AuxTable<T>>, n: usize) -> LadderCoeffs<T> {
    let ctx = recur.ctx();
    let p = recur.params();
    let alpha = p.alpha_as::<T>(ctx);
    let lam = p.lambda_as::<T>(ctx);
    let t = p.t_as::<T>(ctx);
    let k = |v: usize| T::from_i64(v as i64, ctx);
    // A_n = (x+t−c)/(x(x+t)) with c = 2n+1+α+λ−α_n
    let c = k(2 * n + 1) + &alpha + &lam - recur.alpha(n);
    let a = ((t.clone() - &c) / &t, c / &t);
    let b = if n == 0 {
        (T::zero(ctx), T::zero(ctx))
    } else {
        let d = k(2 * n) + &alpha + &lam;
        if d.is_zero() {
            let r = aux
                .map(|a| a.small_r(n).clone())
                .unwrap_or_else(|| -(recur.p(n).clone() + recur.beta(n)) / &t);
            (-(k(n) + &r), r)
        } else {
            // B_n = N(x)/(d x (x+t)), N(x) = n(n+α)t − n d (x+t) + β_n K_n
            let kk = k(4 * n) + k(2) * &alpha + k(2) * &lam - &t - recur.alpha(n) - recur.alpha(n - 1);
            let base = k(n) * (k(n) + &alpha) * &t + recur.beta(n).clone() * kk;
            let at_zero = base.clone() - k(n) * &d * &t;
            let at_minus_t = base;
            let dt = d * &t;
            (at_zero / &dt, -(at_minus_t / dt))
        }
    };
    LadderCoeffs { a, b }
}

/// `f(x) = c/x + d/(x+t)` and its derivative.
fn pf_eval<T: Scalar>(cd: &(T, T), x: &T, t: &T) -> (T, T) {
    let xt = x.clone() + t;
    let v = cd.0.clone() / x + cd.1.clone() / &xt;
    let dv = -(cd.0.clone() / x.square()) - cd.1.clone() / xt.square();
    (v, dv)
}

/// Second-order ODE for `P_n` at sample points `xs`.
pub fn verify_ode<T: Scalar>(
    recur: &RecurrenceTable<T>,
    aux: Option<&AuxTable<T>>,
    n: usize,
    xs: &[T],
) -> Result<ResidualReport> {
    if n == 0 || n >= recur.n() {
        return Err(Error::domain(
            "verify_ode",
            format!("n = {n} needs 1 <= n < N = {}", recur.n()),
        ));
    }
    let ctx = recur.ctx();
    let p = recur.params();
    let alpha = p.alpha_as::<T>(ctx);
    let lam = p.lambda_as::<T>(ctx);
    let t = p.t_as::<T>(ctx);
    let one = T::one(ctx);
    let poly = polynomial(recur, n)?;
    let cn = ladder_coeffs(recur, aux, n);
    let cm = ladder_coeffs(recur, aux, n - 1);
    let digits = recur.certified_digits();
    let guard = -(digits / 2.0);
    let mut tally = Tally::new(&format!("ode[n={n}]"), digits);
    let c = k_of::<T>(2 * n + 1, ctx) + &alpha + &lam - recur.alpha(n);
    for (i, x) in xs.iter().enumerate() {
        let near = [x.clone(), x.clone() + &t, x.clone() + &t - &c];
        if near.iter().any(|v| v.is_zero() || v.log10_abs() < guard) {
            tally.notes.push(format!("x[{i}] = {} skipped: too close to a singular point", x.to_text_digits(12)));
            continue;
        }
        let (pv, dp, ddp) = eval_poly_derivs(&poly, x);
        let vp = one.clone() - alpha.clone() / x - lam.clone() / (x.clone() + &t);
        let (a, da) = pf_eval(&cn.a, x, &t);
        let (b, db) = pf_eval(&cn.b, x, &t);
        let (am, _) = pf_eval(&cm.a, x, &t);
        let c1 = vp.clone() + da.clone() / &a;
        let c0 = db - b.square() - vp * &b + recur.beta(n).clone() * &a * &am - da * &b / &a;
        let t1 = c1 * &dp;
        let t2 = c0 * &pv;
        let lhs = ddp.clone() - &t1 + &t2;
        let zero = T::zero(ctx);
        tally.push(n, normalized_residual(&lhs, &zero, &[&ddp, &t1, &t2]), f64::NEG_INFINITY);
    }
    let mut report = tally.finish(p.t());
    report.n_range = (n, n);
    if let Some(note) = degenerate_note(p) {
        report.notes.push(note);
    }
    Ok(report)
}

fn k_of<T: Scalar>(v: usize, ctx: T::Ctx) -> T {
    T::from_i64(v as i64, ctx)
}

/// `H_n` three ways: `n(n+α+λ) + p(n)`, `n(n+α+λ) − β_n − t r_n`, and the table's own `H_n`;
/// with a grid, also `t · d/dt ln D_n`.
pub fn hn_consistency<T: Scalar>(
    recur: &RecurrenceTable<T>,
    aux: &AuxTable<T>,
    grid: Option<&TGrid<T>>,
) -> ResidualReport {
    let ctx = recur.ctx();
    let p = recur.params();
    let alpha = p.alpha_as::<T>(ctx);
    let lam = p.lambda_as::<T>(ctx);
    let t = p.t_as::<T>(ctx);
    let digits = recur.certified_digits().min(aux.certified_digits());
    let mut tally = Tally::new("hn", digits);
    let top = recur.n().min(aux.n());
    for n in 1..top {
        let kn = k_of::<T>(n, ctx);
        let base = kn.clone() * (kn.clone() + &alpha + &lam);
        let ex1 = base.clone() + recur.p(n);
        let tr = t.clone() * aux.small_r(n);
        let ex2 = base.clone() - recur.beta(n) - &tr;
        let own = aux.h(n).clone();
        let terms = [&base, recur.beta(n), &tr];
        let mut worst = normalized_residual(&ex1, &ex2, &terms);
        for other in [normalized_residual(&ex1, &own, &terms), normalized_residual(&ex2, &own, &terms)] {
            if other.0 > worst.0 {
                worst = other;
            }
        }
        tally.push(n, worst, f64::NEG_INFINITY);
        if let Some(g) = grid {
            let d: Vec<T> = g.recur.iter().map(|r| r.hankel(n).clone()).collect();
            let fd = finite_difference(&d, &g.h, 1);
            let centre = &g.recur[GRID_CENTRE];
            let numeric = t.clone() * &fd.fine / centre.hankel(n);
            let coarse = t.clone() * &fd.coarse / centre.hankel(n);
            let bound = fd.error_bound(digits) + t.log10_abs() - centre.hankel(n).log10_abs();
            let res = normalized_residual(&ex1, &numeric, &terms);
            tally.push(n, res, fd_allowance(bound, res.1));
            tally.push_coarse(normalized_residual(&ex1, &coarse, &terms).0);
        }
    }
    let mut report = tally.finish(p.t());
    if grid.is_none() {
        report.notes.push("no t-grid: derivative check skipped".to_string());
    }
    if let Some(note) = degenerate_note(p) {
        report.notes.push(note);
    }
    report
}

/// Offsets `t + k·h/2` for `k = −6..=6`.
pub const GRID_HALF_WIDTH: usize = 6;
pub const GRID_CENTRE: usize = GRID_HALF_WIDTH;

/// Recurrence and auxiliary tables at `t + k·h/2`, `k = −6..=6`.
#[derive(Clone, Debug)]
pub struct TGrid<T> {
    pub t: Exact,
    pub h: Exact,
    pub recur: Vec<RecurrenceTable<T>>,
    pub aux: Vec<AuxTable<T>>,
}

impl<T: Scalar> TGrid<T> {
    pub fn centre(&self) -> (&RecurrenceTable<T>, &AuxTable<T>) {
        (&self.recur[GRID_CENTRE], &self.aux[GRID_CENTRE])
    }

    pub fn certified_digits(&self) -> f64 {
        self.recur
            .iter()
            .map(|r| r.certified_digits())
            .fold(f64::INFINITY, f64::min)
    }

    /// Same tables with every other point dropped: step `2h`.
    pub fn coarsened(&self) -> TGrid<T> {
        let h2 = self.h.clone() * Exact::from_integer(2.into());
        let pick = |k: i64| ((GRID_CENTRE as i64) + 2 * k) as usize;
        // only k = -3..=3 survive; the outer points are not available at 2h
        let idx: Vec<usize> = (-3..=3).map(pick).collect();
        TGrid {
            t: self.t.clone(),
            h: h2,
            recur: idx.iter().map(|&i| self.recur[i].clone()).collect(),
            aux: idx.iter().map(|&i| self.aux[i].clone()).collect(),
        }
    }
}

/// FD step for a grid whose tables carry `certified` digits: `t · 10^{−⌊certified/8⌋}`.
pub fn default_step(t: &Exact, certified: f64) -> Exact {
    let e = (certified / 8.0).floor().max(1.0) as usize;
    t.clone() / Exact::from_integer(num_traits::pow(num_bigint::BigInt::from(10), e))
}

/// Builds the 13 tables of a `t`-grid (production moment route, in parallel).
pub fn build_t_grid<T: Real>(params: &WeightParams, n: usize, h: &Exact, ctx: &PrecisionCtx) -> Result<TGrid<T>> {
    let two = Exact::from_integer(2.into());
    let half = h.clone() / two;
    let ks: Vec<i64> = (-(GRID_HALF_WIDTH as i64)..=GRID_HALF_WIDTH as i64).collect();
    let built = ks
        .par_iter()
        .map(|&k| {
            let tk = params.t().clone() + half.clone() * Exact::from_integer(k.into());
            let pk = params.with_t(tk)?;
            let table = closed_form_table::<T>(n, &pk, ctx)?;
            let recur = recurrence_coeffs(&table, n)?;
            let aux = aux_from_recurrence(&recur)?;
            Ok((recur, aux))
        })
        .collect::<Result<Vec<_>>>()?;
    let (recur, aux) = built.into_iter().unzip();
    Ok(TGrid {
        t: params.t().clone(),
        h: h.clone(),
        recur,
        aux,
    })
}

/// Sixth-order central differences of a grid quantity at the centre.
pub struct FdEstimate<T> {
    /// Stencil with spacing `h/2`.
    pub fine: T,
    /// Stencil with spacing `h`.
    pub coarse: T,
    /// `log10 (|fine − coarse| / 63)`, the truncation-error estimate of `fine`.
    pub log10_bound: f64,
    /// `log10 (Σ|w| · max|v| / (h/2)^order)`: how much the stencil amplifies a unit relative
    /// error in the inputs.
    pub log10_gain: f64,
}

impl<T> FdEstimate<T> {
    /// Truncation estimate or amplified rounding of inputs good to `certified` digits,
    /// whichever is larger.
    pub fn error_bound(&self, certified: f64) -> f64 {
        self.log10_bound.max(self.log10_gain - certified)
    }
}

const D1: [(i64, i64); 7] = [(-1, 60), (3, 20), (-3, 4), (0, 1), (3, 4), (-3, 20), (1, 60)];
const D2: [(i64, i64); 7] = [(1, 90), (-3, 20), (3, 2), (-49, 18), (3, 2), (-3, 20), (1, 90)];

/// Derivative of order 1 or 2 from values at `t + k·h/2`, `k = −m..=m`.
///
/// With 13 values both the `h/2` and the `h` stencils are available; with 7
/// (a coarsened grid) only the spacing-`h` stencil is, and the bound is `+inf`.
pub fn finite_difference<T: Scalar>(vals: &[T], h: &Exact, order: u8) -> FdEstimate<T> {
    let ctx = vals[0].context();
    let weights = if order == 1 { &D1 } else { &D2 };
    let mid = vals.len() / 2;
    let stencil = |stride: usize, spacing: &Exact| {
        let mut acc = T::zero(ctx);
        for (j, &(a, b)) in weights.iter().enumerate() {
            let off = j as i64 - 3;
            let idx = (mid as i64 + off * stride as i64) as usize;
            acc = acc + T::ratio(a, b, ctx) * &vals[idx];
        }
        let sp = T::from_ratio(spacing, ctx);
        if order == 1 {
            acc / sp
        } else {
            acc / sp.square()
        }
    };
    let two = Exact::from_integer(2.into());
    let half = h.clone() / &two;
    let weight_sum: f64 = weights.iter().map(|&(a, b)| (a as f64 / b as f64).abs()).sum();
    let log10_gain = vals.iter().map(|v| v.log10_abs()).fold(f64::NEG_INFINITY, f64::max) + weight_sum.log10()
        - order as f64 * T::from_ratio(&half, ctx).log10_abs();
    if vals.len() >= 13 {
        let fine = stencil(1, &(h.clone() / &two));
        let coarse = stencil(2, h);
        let log10_bound = (fine.clone() - &coarse).log10_abs() - 63f64.log10();
        FdEstimate {
            fine,
            coarse,
            log10_bound,
            log10_gain,
        }
    } else {
        // a 7-point grid built at spacing h/2 around t
        let fine = stencil(1, &(h.clone() / &two));
        FdEstimate {
            coarse: fine.clone(),
            fine,
            log10_bound: f64::INFINITY,
            log10_gain,
        }
    }
}

/// Allowance for an FD-based residual: ten times the truncation bound, normalized.
fn fd_allowance(log10_bound: f64, log10_scale: f64) -> f64 {
    log10_bound + 1.0 - log10_scale
}

/// Toda-type equations and the `t`-derivative identities, on a grid.
///
/// Families: `tb1`, `tb2`, `dphi` (`dp/dt = −r_n`), `dlnhnt` (`d ln h_n/dt = R_n`),
/// `all1` (`α_n′ = r_{n+1} − r_n`), `bn3` (`β_n′ = β_n(R_n − R_{n−1})`).
pub fn verify_toda<T: Scalar>(grid: &TGrid<T>) -> Vec<ResidualReport> {
    let (recur, aux) = grid.centre();
    let ctx = recur.ctx();
    let p = recur.params();
    let alpha = p.alpha_as::<T>(ctx);
    let lam = p.lambda_as::<T>(ctx);
    let t = p.t_as::<T>(ctx);
    let al = alpha.clone() + &lam;
    let k = |v: usize| k_of::<T>(v, ctx);
    let digits = grid.certified_digits();
    let top = recur.n();
    let d = |f: &dyn Fn(&RecurrenceTable<T>, &AuxTable<T>) -> T| -> FdEstimate<T> {
        let vals: Vec<T> = grid.recur.iter().zip(&grid.aux).map(|(r, a)| f(r, a)).collect();
        finite_difference(&vals, &grid.h, 1)
    };

    let mut tb1 = Tally::new("tb1", digits);
    let mut bn3 = Tally::new("bn3", digits);
    let mut dphi = Tally::new("dphi", digits);
    for n in 1..top {
        let db = d(&|r, _| r.beta(n).clone());
        // t β_n′ = β_n(α_{n−1} − α_n + 2)
        let rhs = recur.beta(n).clone() * (recur.alpha(n - 1).clone() - recur.alpha(n) + k(2));
        let lhs = t.clone() * &db.fine;
        let bound = db.error_bound(digits) + t.log10_abs();
        let res = normalized_residual(&lhs, &rhs, &[]);
        tb1.push(n, res, fd_allowance(bound, res.1));
        tb1.push_coarse(normalized_residual(&(t.clone() * &db.coarse), &rhs, &[]).0);
        // β_n′ = β_n(R_n − R_{n−1})
        let rhs = recur.beta(n).clone() * (aux.big_r(n).clone() - aux.big_r(n - 1));
        let res = normalized_residual(&db.fine, &rhs, &[]);
        bn3.push(n, res, fd_allowance(db.error_bound(digits), res.1));
        bn3.push_coarse(normalized_residual(&db.coarse, &rhs, &[]).0);
        // dp/dt = −r_n
        let dp = d(&|r, _| r.p(n).clone());
        let rhs = -aux.small_r(n).clone();
        let res = normalized_residual(&dp.fine, &rhs, &[]);
        dphi.push(n, res, fd_allowance(dp.error_bound(digits), res.1));
        dphi.push_coarse(normalized_residual(&dp.coarse, &rhs, &[]).0);
    }

    let mut tb2 = Tally::new("tb2", digits);
    let mut all1 = Tally::new("all1", digits);
    for n in 1..top.saturating_sub(1) {
        let da = d(&|r, _| r.alpha(n).clone());
        let dn = k(2 * n) + &al;
        let dn2 = k(2 * n + 2) + &al;
        let lhs_c = dn.clone() * &dn2 * &t;
        let lhs = lhs_c.clone() * &da.fine;
        let quad = k(2 * n * n) + k(2 * n) * (k(1) + &al) + (k(1) + &alpha) * &al;
        let a1 = t.clone() * quad;
        let a2 = dn.clone()
            * recur.beta(n + 1)
            * (k(4 * n + 4) + k(2) * &al - &t - recur.alpha(n + 1) - recur.alpha(n));
        let a3 = dn2.clone()
            * recur.beta(n)
            * (k(4 * n) + k(2) * &al - &t - recur.alpha(n) - recur.alpha(n - 1));
        let rhs = -a1.clone() - &a2 + &a3;
        let terms = [&a1, &a2, &a3];
        let bound = da.error_bound(digits) + lhs_c.log10_abs();
        let res = normalized_residual(&lhs, &rhs, &terms);
        tb2.push(n, res, fd_allowance(bound, res.1));
        tb2.push_coarse(normalized_residual(&(lhs_c * &da.coarse), &rhs, &terms).0);
    }
    for n in 0..top.saturating_sub(1) {
        let da = d(&|r, _| r.alpha(n).clone());
        let rhs = aux.small_r(n + 1).clone() - aux.small_r(n);
        let res = normalized_residual(&da.fine, &rhs, &[]);
        all1.push(n, res, fd_allowance(da.error_bound(digits), res.1));
        all1.push_coarse(normalized_residual(&da.coarse, &rhs, &[]).0);
    }

    let mut dlnh = Tally::new("dlnhnt", digits);
    for n in 0..top {
        let dh = d(&|r, _| r.h(n).clone());
        let hn = recur.h(n);
        let lhs = dh.fine.clone() / hn;
        let rhs = aux.big_r(n).clone();
        let res = normalized_residual(&lhs, &rhs, &[]);
        dlnh.push(n, res, fd_allowance(dh.error_bound(digits) - hn.log10_abs(), res.1));
        dlnh.push_coarse(normalized_residual(&(dh.coarse.clone() / hn), &rhs, &[]).0);
    }

    let mut out: Vec<ResidualReport> = [tb1, tb2, dphi, dlnh, all1, bn3]
        .into_iter()
        .map(|tally| tally.finish(&grid.t))
        .collect();
    if let Some(note) = degenerate_note(p) {
        out.iter_mut().for_each(|r| r.notes.push(note.clone()));
    }
    out
}

/// Painlevé V for `y = 1 − 1/(1 − R_n)` at the grid centre.
pub fn verify_painleve_v<T: Scalar>(grid: &TGrid<T>, n: usize) -> Result<ResidualReport> {
    let (recur, aux) = grid.centre();
    check_order("verify_painleve_v", n, aux.n())?;
    let ctx = recur.ctx();
    let p = recur.params();
    let mut tally = Tally::new(&format!("painleve_v[n={n}]"), grid.certified_digits());
    if p.lambda_is_zero() {
        tally.notes.push("excluded: R_n vanishes identically, y = 0 is a singular point".to_string());
        tally.notes.push("degenerate: classical Laguerre".to_string());
        let mut report = tally.finish(&grid.t);
        report.n_range = (n, n);
        return Ok(report);
    }
    let one = T::one(ctx);
    let two = T::from_i64(2, ctx);
    let y_of = |a: &AuxTable<T>| one.clone() - one.clone() / (one.clone() - a.big_r(n));
    let ys: Vec<T> = grid.aux.iter().map(|a| y_of(a)).collect();
    let y = ys[GRID_CENTRE].clone();
    let d1 = finite_difference(&ys, &grid.h, 1);
    let d2 = finite_difference(&ys, &grid.h, 2);
    let alpha = p.alpha_as::<T>(ctx);
    let lam = p.lambda_as::<T>(ctx);
    let t = p.t_as::<T>(ctx);
    let mu0 = alpha.square() / &two;
    let mu1 = -(lam.square() / &two);
    let mu2 = k_of::<T>(2 * n + 1, ctx) + &alpha + &lam;
    let mu3 = -(one.clone() / &two);
    let ym1 = y.clone() - &one;
    for v in [&y, &ym1] {
        if v.log10_abs() < -(grid.certified_digits() / 4.0) {
            tally.notes.push("advisory: y is close to 0 or 1, the equation is badly conditioned".to_string());
        }
    }
    let rhs_of = |yp: &T| {
        let a = (k_of::<T>(3, ctx) * &y - &one) / (two.clone() * &y * &ym1) * yp.square();
        let b = yp.clone() / &t;
        let c = ym1.square() / t.square() * (mu0.clone() * &y + mu1.clone() / &y);
        let d = mu2.clone() * &y / &t;
        let e = mu3.clone() * &y * (y.clone() + &one) / &ym1;
        (a.clone() - &b + &c + &d + &e, [a, b, c, d, e])
    };
    let (rhs, terms) = rhs_of(&d1.fine);
    let term_refs: Vec<&T> = terms.iter().collect();
    let res = normalized_residual(&d2.fine, &rhs, &term_refs);
    // y′ enters the right side through (3y−1)/(2y(y−1))·y′² − y′/t
    let dy_coeff = ((k_of::<T>(3, ctx) * &y - &one) / (y.clone() * &ym1) * &d1.fine - one.clone() / &t).log10_abs();
    let digits = grid.certified_digits();
    let bound = d2.error_bound(digits).max(d1.error_bound(digits) + dy_coeff);
    tally.push(n, res, fd_allowance(bound, res.1));
    let (rhs_c, _) = rhs_of(&d1.coarse);
    tally.push_coarse(normalized_residual(&d2.coarse, &rhs_c, &term_refs).0);
    let mut report = tally.finish(&grid.t);
    report.n_range = (n, n);
    Ok(report)
}

/// Jimbo-Miwa-Okamoto σ-form with `σ = H_n − nλ`, `σ′ = −r_n` exactly and `σ″` by FD of `r_n`.
pub fn verify_sigma_form<T: Scalar>(grid: &TGrid<T>, n: usize) -> Result<ResidualReport> {
    let (recur, aux) = grid.centre();
    check_order("verify_sigma_form", n, aux.n())?;
    let ctx = recur.ctx();
    let p = recur.params();
    let alpha = p.alpha_as::<T>(ctx);
    let lam = p.lambda_as::<T>(ctx);
    let t = p.t_as::<T>(ctx);
    let kn = k_of::<T>(n, ctx);
    let rs: Vec<T> = grid.aux.iter().map(|a| a.small_r(n).clone()).collect();
    let d = finite_difference(&rs, &grid.h, 1);
    let s = aux.sigma(n);
    let sp = aux.sigma_prime(n);
    let spp = -d.fine.clone();
    let nu_sum = lam.clone() - kn.clone() * T::from_i64(2, ctx) - &alpha;
    let four = T::from_i64(4, ctx);
    let eval = |spp: &T| {
        let lhs = (t.clone() * spp).square();
        let inner = s.clone() - t.clone() * &sp + T::from_i64(2, ctx) * sp.square() + nu_sum.clone() * &sp;
        let prod = sp.clone() * (sp.clone() - &kn) * (sp.clone() + &lam) * (sp.clone() - &kn - &alpha);
        let a = inner.square();
        let b = four.clone() * prod;
        (lhs, a, b)
    };
    let (lhs, a, b) = eval(&spp);
    let rhs = a.clone() - &b;
    let mut tally = Tally::new(&format!("sigma_form[n={n}]"), grid.certified_digits());
    let res = normalized_residual(&lhs, &rhs, &[&a, &b]);
    // d(lhs)/dσ″ = 2t²σ″
    let bound = d.error_bound(grid.certified_digits()) + (T::from_i64(2, ctx) * t.square() * &spp).log10_abs();
    tally.push(n, res, fd_allowance(bound, res.1));
    let (lc, ac, bc) = eval(&-d.coarse.clone());
    tally.push_coarse(normalized_residual(&lc, &(ac - bc), &[&a, &b]).0);
    let mut report = tally.finish(&grid.t);
    report.n_range = (n, n);
    if let Some(note) = degenerate_note(p) {
        report.notes.push(note);
    }
    Ok(report)
}

fn check_order(op: &'static str, n: usize, top: usize) -> Result<()> {
    if n == 0 || n >= top {
        return Err(Error::domain(op, format!("n = {n} needs 1 <= n < N = {top}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::exact_moment_table;
    use crate::orthopoly::recurrence_coeffs;

    fn q(n: i64, d: i64) -> Exact {
        Exact::ratio(n, d, ())
    }

    fn fixture(n: usize) -> RecurrenceTable<Exact> {
        let p = WeightParams::parse("0", "1", "2").unwrap();
        recurrence_coeffs(&exact_moment_table(n, &p).unwrap(), n).unwrap()
    }

    #[test]
    fn fixture_auxiliaries() {
        let r = fixture(3);
        let a = aux_from_recurrence(&r).unwrap();
        assert_eq!(a.big_r(0), &q(1, 3));
        assert_eq!(a.big_r(1), &q(5, 21));
        assert_eq!(a.small_r(1), &q(-1, 9));
        assert_eq!(a.h(0), &q(0, 1));
        assert_eq!(a.h(1), &q(2, 3));
        assert_eq!(a.sigma(1), q(-1, 3));
        assert_eq!(a.sigma_prime(1), q(1, 9));
        assert_eq!(a.provenance(), AuxProvenance::FromRecurrence);
    }

    #[test]
    fn exact_identities_hold_exactly() {
        let r = fixture(6);
        let a = aux_from_recurrence(&r).unwrap();
        for rep in verify_compatibility(&r, &a)
            .into_iter()
            .chain(verify_discrete_system(&r))
            .chain([hn_consistency(&r, &a, None)])
        {
            assert!(rep.pass, "{}", rep.summary());
            assert_eq!(rep.log10_residual, f64::NEG_INFINITY, "{}", rep.summary());
        }
    }

    #[test]
    fn exact_ode_on_fixture_and_laguerre() {
        let r = fixture(4);
        let xs = [q(1, 2), q(2, 1), q(7, 1), q(1, 1)];
        for n in 1..4 {
            let rep = verify_ode(&r, None, n, &xs).unwrap();
            assert_eq!(rep.log10_residual, f64::NEG_INFINITY, "{}", rep.summary());
        }
        let lag = WeightParams::parse("0", "0", "1").unwrap();
        let r = recurrence_coeffs(&exact_moment_table(3, &lag).unwrap(), 3).unwrap();
        assert!(verify_ode(&r, None, 2, &[q(1, 1)]).unwrap().pass);
        assert!(verify_ode(&r, None, 3, &[q(1, 1)]).is_err());
    }

    #[test]
    fn laguerre_auxiliaries_vanish() {
        let lag = WeightParams::parse("2", "0", "3").unwrap();
        let r = recurrence_coeffs(&exact_moment_table(5, &lag).unwrap(), 5).unwrap();
        let a = aux_from_recurrence(&r).unwrap();
        assert!(a.big_r_all().iter().all(|v| *v == q(0, 1)));
        assert!(a.small_r_all().iter().all(|v| *v == q(0, 1)));
        assert!(a.h_all().iter().all(|v| *v == q(0, 1)));
        let reps = verify_compatibility(&r, &a);
        assert!(reps.iter().all(|r| r.notes.iter().any(|n| n.starts_with("degenerate"))));
    }

    #[test]
    fn singular_order_is_flagged() {
        // 2n+α+λ = 0 at n = 1
        let p = WeightParams::parse("0", "-2", "1").unwrap();
        let ctx = PrecisionCtx::with_target(30);
        let table = closed_form_table::<crate::BigReal>(3, &p, &ctx).unwrap();
        let r = recurrence_coeffs(&table, 3).unwrap();
        let a = aux_from_recurrence(&r).unwrap();
        assert_eq!(a.indeterminate(), &[1]);
        assert!(verify_compatibility(&r, &a).iter().all(|rep| rep.pass));
    }

    #[test]
    fn finite_difference_orders() {
        // f = t^7 at t = 1: the stencils are exact for degree ≤ 6 only
        let h = q(1, 10);
        let vals: Vec<f64> = (-6..=6).map(|k| (1.0 + 0.05 * k as f64).powi(7)).collect();
        let d1 = finite_difference(&vals, &h, 1);
        assert!((d1.fine - 7.0).abs() < 1e-6);
        let d2 = finite_difference(&vals, &h, 2);
        assert!((d2.fine - 42.0).abs() < 1e-4);
        let poly: Vec<f64> = (-6..=6).map(|k| (0.05 * k as f64).powi(5)).collect();
        assert!(finite_difference(&poly, &h, 1).fine.abs() < 1e-12);
    }

    #[test]
    fn residual_normalization() {
        let (r, s) = normalized_residual(&1000.5f64, &1000.0, &[]);
        assert!((s - 1000.5f64.log10()).abs() < 1e-12);
        assert!((r - (0.5f64.log10() - s)).abs() < 1e-12);
        let (r, s) = normalized_residual(&0.25f64, &0.0, &[]);
        assert_eq!(s, 0.0);
        assert!((r - 0.25f64.log10()).abs() < 1e-12);
    }
}
