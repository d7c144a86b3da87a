//! Hankel determinants, recurrence coefficients and the monic orthogonal polynomials.
//!
//! Everything is read off one `L·diag(d)·Lᵀ` factorisation of the moment
//! matrix `(μ_{i+j})`: the pivots are `h_j`, their running products are `D_n`,
//! and the first sub-diagonal of `L` is `−p(n, t)`.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::moments::{MomentTable, WeightParams};
use crate::precision::PrecisionCtx;
use crate::scalar::Scalar;

pub const RECURRENCE_SCHEMA_VERSION: u32 = 1;

/// Digits set aside for rounding accumulated across an elimination.
const ROUNDING_MARGIN: f64 = 4.0;

/// Finite-n ground truth at one parameter point.
///
/// With `N = n()`: `h_0..h_N`, `D_0..D_{N+1}`, `p(0..N)`, `α_0..α_{N−1}`
/// and `β_1..β_N` (`beta[0]` is stored as zero).
#[derive(Clone, Debug)]
pub struct RecurrenceTable<T> {
    params: WeightParams,
    n: usize,
    d: Vec<T>,
    h: Vec<T>,
    p: Vec<T>,
    alpha: Vec<T>,
    beta: Vec<T>,
    digits: f64,
    precision: PrecisionCtx,
}

impl<T: Scalar> RecurrenceTable<T> {
    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `D_n`, for `n ≤ N+1`.
    pub fn hankel(&self, n: usize) -> &T {
        &self.d[n]
    }

    pub fn hankel_all(&self) -> &[T] {
        &self.d
    }

    /// `h_n`, for `n ≤ N`.
    pub fn h(&self, n: usize) -> &T {
        &self.h[n]
    }

    pub fn h_all(&self) -> &[T] {
        &self.h
    }

    /// `p(n, t)`, for `n ≤ N`.
    pub fn p(&self, n: usize) -> &T {
        &self.p[n]
    }

    pub fn p_all(&self) -> &[T] {
        &self.p
    }

    /// `α_n`, for `n < N`.
    pub fn alpha(&self, n: usize) -> &T {
        &self.alpha[n]
    }

    pub fn alpha_all(&self) -> &[T] {
        &self.alpha
    }

    /// `β_n`, for `1 ≤ n ≤ N`.
    pub fn beta(&self, n: usize) -> &T {
        &self.beta[n]
    }

    pub fn beta_all(&self) -> &[T] {
        &self.beta
    }

    /// Working digits minus the worst cancellation seen in the factorisation.
    pub fn certified_digits(&self) -> f64 {
        self.digits
    }

    pub fn precision(&self) -> &PrecisionCtx {
        &self.precision
    }

    pub fn ctx(&self) -> T::Ctx {
        self.h[0].context()
    }

    fn check_invariants(&self) -> Result<()> {
        let ctx = self.ctx();
        let zero = T::zero(ctx);
        let tol = if self.digits.is_finite() {
            -(self.digits - 2.0)
        } else {
            f64::NEG_INFINITY
        };
        let bad = |what: &str, n: usize| Error::Consistency(format!("{what} fails at n={n} for {}", self.params));
        for (n, d) in self.d.iter().enumerate() {
            if !(d > &zero) {
                return Err(bad("D_n > 0", n));
            }
        }
        for n in 1..=self.n {
            if !(self.beta[n] > zero) {
                return Err(bad("beta_n > 0", n));
            }
            let ratio = self.d[n + 1].clone() * &self.d[n - 1] / self.d[n].square();
            if rel_gap(&self.beta[n], &ratio) > tol {
                return Err(bad("beta_n = D_{n+1} D_{n-1} / D_n^2", n));
            }
        }
        if !self.p[0].is_zero() {
            return Err(bad("p(0) = 0", 0));
        }
        let mut sum = T::zero(ctx);
        for n in 1..=self.n {
            sum = sum + &self.alpha[n - 1];
            let total = sum.clone() + &self.p[n];
            let scale = sum.abs().log10_abs().max(0.0);
            if !total.is_zero() && total.log10_abs() - scale > tol {
                return Err(bad("sum alpha_j = -p(n)", n));
            }
        }
        Ok(())
    }

    /// One CSV row per `n` with `D_n, h_n, p(n), α_n, β_n` as decimal strings.
    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = String::from("n,D_n,h_n,p_n,alpha_n,beta_n\n");
        let cell = |v: Option<&T>| v.map(|x| x.to_text_digits(digits)).unwrap_or_default();
        for n in 0..=self.n {
            let beta = if n >= 1 { Some(&self.beta[n]) } else { None };
            let _ = writeln!(
                out,
                "{n},{},{},{},{},{}",
                cell(Some(&self.d[n])),
                cell(Some(&self.h[n])),
                cell(Some(&self.p[n])),
                cell(self.alpha.get(n)),
                cell(beta)
            );
        }
        out
    }

    pub fn to_json(&self, digits: usize) -> Value {
        let col = |v: &[T]| v.iter().map(|x| x.to_text_digits(digits)).collect::<Vec<_>>();
        json!({
            "schema_version": RECURRENCE_SCHEMA_VERSION,
            "kind": "recurrence_table",
            "params": self.params,
            "n": self.n,
            "precision": self.precision,
            "certified_digits": self.digits,
            "D": col(&self.d),
            "h": col(&self.h),
            "p": col(&self.p),
            "alpha": col(&self.alpha),
            "beta": col(&self.beta[1..]),
        })
    }
}

fn rel_gap<T: Scalar>(a: &T, b: &T) -> f64 {
    let diff = a.clone() - b;
    if diff.is_zero() {
        return f64::NEG_INFINITY;
    }
    diff.log10_abs() - a.abs().log10_abs().max(b.abs().log10_abs())
}

/// Result of the `L·diag(d)·Lᵀ` factorisation of the leading `m×m` moment block.
pub struct HankelFactor<T> {
    /// Pivots `h_0..h_{m−1}`.
    pub h: Vec<T>,
    /// `D_0..D_m`.
    pub d: Vec<T>,
    /// First sub-diagonal of `L`: `sub[k] = L_{k,k−1}` (`sub[0] = 0`).
    pub sub: Vec<T>,
    /// Largest `log10(μ_{2k} / d_k)` seen, the digits lost to cancellation.
    pub cancellation: f64,
}

/// Factorises the `m×m` Hankel matrix of `mu` without pivoting.
pub fn hankel_factor<T: Scalar>(mu: &[T], m: usize) -> Result<HankelFactor<T>> {
    if mu.len() < 2 * m - 1 {
        return Err(Error::domain(
            "hankel_ldl",
            format!("{m}x{m} Hankel block needs {} moments, have {}", 2 * m - 1, mu.len()),
        ));
    }
    let ctx = mu[0].context();
    let zero = T::zero(ctx);
    // l[i][j] for j < i, stored row by row
    let mut l: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut h: Vec<T> = Vec::with_capacity(m);
    let mut cancellation = 0.0f64;
    for i in 0..m {
        let mut row: Vec<T> = Vec::with_capacity(i);
        for j in 0..i {
            // v = μ_{i+j} − Σ_{k<j} L_ik L_jk d_k
            let mut v = mu[i + j].clone();
            for k in 0..j {
                v = v - row[k].clone() * &l[j][k] * &h[k];
            }
            row.push(v / &h[j]);
        }
        let mut piv = mu[2 * i].clone();
        for k in 0..i {
            piv = piv - row[k].square() * &h[k];
        }
        if !(piv > zero) {
            return Err(Error::DataIntegrity(format!(
                "Hankel pivot {i} is not positive; the moments are not those of a positive measure at this precision"
            )));
        }
        cancellation = cancellation.max(mu[2 * i].log10_abs() - piv.log10_abs());
        h.push(piv);
        l.push(row);
    }
    let mut d = Vec::with_capacity(m + 1);
    d.push(T::one(ctx));
    for k in 0..m {
        let next = d[k].clone() * &h[k];
        d.push(next);
    }
    let sub = (0..m)
        .map(|k| if k == 0 { zero.clone() } else { l[k][k - 1].clone() })
        .collect();
    Ok(HankelFactor {
        h,
        d,
        sub,
        cancellation,
    })
}

/// `(D_0..D_N, h_0..h_{N−1})` of the moment matrix.
pub fn hankel_ldl<T: Scalar>(table: &MomentTable<T>, n: usize) -> Result<(Vec<T>, Vec<T>)> {
    if n > table.n_max() + 1 || n == 0 {
        return Err(Error::domain(
            "hankel_ldl",
            format!("N = {n} outside 1..={}", table.n_max() + 1),
        ));
    }
    let f = hankel_factor(table.mu(), n)?;
    Ok((f.d, f.h))
}

/// Monic coefficients `c_0..c_{n−1}` of `P_n` from the moment system
/// `Σ_i c_i μ_{i+k} = −μ_{n+k}`, `k < n`, by Gaussian elimination.
pub fn monic_coefficients<T: Scalar>(mu: &[T], n: usize) -> Result<Vec<T>> {
    let ctx = mu[0].context();
    if n == 0 {
        return Ok(Vec::new());
    }
    if mu.len() < 2 * n {
        return Err(Error::domain(
            "sub_leading",
            format!("P_{n} needs moments up to index {}, have {}", 2 * n - 1, mu.len() - 1),
        ));
    }
    let mut a: Vec<Vec<T>> = (0..n)
        .map(|k| {
            let mut row: Vec<T> = (0..n).map(|i| mu[i + k].clone()).collect();
            row.push(-mu[n + k].clone());
            row
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&x, &y| {
                a[x][col]
                    .abs()
                    .partial_cmp(&a[y][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty range");
        a.swap(col, pivot_row);
        if a[col][col].is_zero() {
            return Err(Error::DataIntegrity(format!("moment system for P_{n} is singular")));
        }
        for r in col + 1..n {
            let factor = a[r][col].clone() / &a[col][col];
            for c in col..=n {
                let v = a[r][c].clone() - factor.clone() * &a[col][c];
                a[r][c] = v;
            }
        }
    }
    let mut x = vec![T::zero(ctx); n];
    for r in (0..n).rev() {
        let mut v = a[r][n].clone();
        for c in r + 1..n {
            v = v - a[r][c].clone() * &x[c];
        }
        x[r] = v / &a[r][r];
    }
    Ok(x)
}

/// `p(n, t)`, the `x^{n−1}` coefficient of monic `P_n`, from its own linear solve.
pub fn sub_leading<T: Scalar>(table: &MomentTable<T>, n: usize) -> Result<T> {
    if n == 0 {
        return Ok(T::zero(table.mu()[0].context()));
    }
    if n > table.n_max() {
        return Err(Error::domain(
            "sub_leading",
            format!("n = {n} exceeds n_max = {}", table.n_max()),
        ));
    }
    Ok(monic_coefficients(table.mu(), n)?.pop().expect("n >= 1"))
}

/// Full recurrence table up to `N` (needs `N ≤ n_max`).
pub fn recurrence_coeffs<T: Scalar>(table: &MomentTable<T>, n: usize) -> Result<RecurrenceTable<T>> {
    if n > table.n_max() || n == 0 {
        return Err(Error::domain(
            "recurrence_coeffs",
            format!("N = {n} outside 1..={}", table.n_max()),
        ));
    }
    let f = hankel_factor(table.mu(), n + 1)?;
    let ctx = table.mu()[0].context();
    let p: Vec<T> = f.sub.iter().map(|s| -s.clone()).collect();
    let alpha: Vec<T> = (0..n).map(|k| p[k].clone() - &p[k + 1]).collect();
    let mut beta = vec![T::zero(ctx)];
    for k in 1..=n {
        beta.push(f.h[k].clone() / &f.h[k - 1]);
    }
    let digits = (table.certified_digits() - f.cancellation - ROUNDING_MARGIN).max(0.0);
    let rec = RecurrenceTable {
        params: table.params().clone(),
        n,
        d: f.d,
        h: f.h,
        p,
        alpha,
        beta,
        digits,
        precision: *table.precision(),
    };
    rec.check_invariants()?;
    Ok(rec)
}

/// Independent oracle: explicit Gram-Schmidt of `1, x, …, x^N` in the moment inner product.
pub fn gram_schmidt_oracle<T: Scalar>(table: &MomentTable<T>, n: usize) -> Result<RecurrenceTable<T>> {
    if n > table.n_max() || n == 0 {
        return Err(Error::domain(
            "gram_schmidt_oracle",
            format!("N = {n} outside 1..={}", table.n_max()),
        ));
    }
    let mu = table.mu();
    let ctx = mu[0].context();
    // ⟨x^k, Σ c_i x^i⟩ = Σ c_i μ_{k+i}
    let pair = |k: usize, c: &[T]| {
        c.iter()
            .enumerate()
            .fold(T::zero(ctx), |acc, (i, ci)| acc + ci.clone() * &mu[k + i])
    };
    let mut polys: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    let mut h: Vec<T> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut c = vec![T::zero(ctx); k + 1];
        c[k] = T::one(ctx);
        for j in 0..k {
            let coef = pair(k, &polys[j]) / &h[j];
            for (i, pj) in polys[j].iter().enumerate() {
                let v = c[i].clone() - coef.clone() * pj;
                c[i] = v;
            }
        }
        let hk = pair(k, &c);
        if !(hk > T::zero(ctx)) {
            return Err(Error::DataIntegrity(format!("Gram-Schmidt norm {k} is not positive")));
        }
        h.push(hk);
        polys.push(c);
    }
    let p: Vec<T> = (0..=n)
        .map(|k| if k == 0 { T::zero(ctx) } else { polys[k][k - 1].clone() })
        .collect();
    let alpha: Vec<T> = (0..n).map(|k| p[k].clone() - &p[k + 1]).collect();
    let mut beta = vec![T::zero(ctx)];
    for k in 1..=n {
        beta.push(h[k].clone() / &h[k - 1]);
    }
    let mut d = vec![T::one(ctx)];
    for k in 0..=n {
        let next = d[k].clone() * &h[k];
        d.push(next);
    }
    let cancellation = (0..=n)
        .map(|k| mu[2 * k].log10_abs() - h[k].log10_abs())
        .fold(0.0f64, f64::max);
    Ok(RecurrenceTable {
        params: table.params().clone(),
        n,
        d,
        h,
        p,
        alpha,
        beta,
        digits: (table.certified_digits() - cancellation - ROUNDING_MARGIN).max(0.0),
        precision: *table.precision(),
    })
}

/// Monic polynomial in the monomial basis, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct MonicPolynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> MonicPolynomial<T> {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `x^{n−1}`, zero for `n = 0`.
    pub fn sub_leading(&self) -> T {
        let n = self.degree();
        if n == 0 {
            T::zero(self.coeffs[0].context())
        } else {
            self.coeffs[n - 1].clone()
        }
    }
}

/// `P_n` from `x P_k = P_{k+1} + α_k P_k + β_k P_{k−1}`, `P_0 = 1`, `P_{−1} = 0`.
pub fn polynomial<T: Scalar>(recur: &RecurrenceTable<T>, n: usize) -> Result<MonicPolynomial<T>> {
    if n > recur.n() {
        return Err(Error::domain("polynomial", format!("n = {n} exceeds N = {}", recur.n())));
    }
    let ctx = recur.ctx();
    let mut prev: Vec<T> = Vec::new();
    let mut cur = vec![T::one(ctx)];
    for k in 0..n {
        let mut next = vec![T::zero(ctx); k + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] = next[i + 1].clone() + c;
            next[i] = next[i].clone() - recur.alpha(k).clone() * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] = next[i].clone() - recur.beta(k).clone() * c;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(MonicPolynomial { coeffs: cur })
}

/// `(P(x), P′(x), P″(x))` by Horner.
pub fn eval_poly_derivs<T: Scalar>(poly: &MonicPolynomial<T>, x: &T) -> (T, T, T) {
    let ctx = x.context();
    let mut p0 = T::zero(ctx);
    let mut p1 = T::zero(ctx);
    let mut p2 = T::zero(ctx);
    for c in poly.coeffs.iter().rev() {
        p2 = p2 * x + &p1;
        p1 = p1 * x + &p0;
        p0 = p0 * x + c;
    }
    (p0, p1, p2.clone() + &p2)
}

/// `(P_n(x), P_{n−1}(x))` by running the recurrence at `x`, which stays stable
/// where the monomial form cancels badly.
pub fn eval_by_recurrence<T: Scalar>(recur: &RecurrenceTable<T>, n: usize, x: &T) -> (T, T) {
    let ctx = x.context();
    let mut prev = T::zero(ctx);
    let mut cur = T::one(ctx);
    for k in 0..n {
        let next = (x.clone() - recur.alpha(k)) * &cur - recur.beta(k).clone() * &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    (cur, prev)
}
