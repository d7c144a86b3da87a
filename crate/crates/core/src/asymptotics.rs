//! Coulomb-fluid quantities and the large-n and long-time expansions, measured against the exact pipeline.
//!
//! Every series is returned as a [`SeriesEval`]: its terms in decreasing order
//! of size, each tagged with its power of the expansion variable, so that a
//! truncation to `k` terms has a known first omitted exponent.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ladder::{aux_from_recurrence, AuxTable};
use crate::moments::{closed_form_table, WeightParams};
use crate::orthopoly::{recurrence_coeffs, RecurrenceTable};
use crate::precision::PrecisionCtx;
use crate::scalar::{Real, Scalar};
use crate::special::{log_barnes_g, log_gamma, zeta_prime_minus1};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "alpha_n")]
    AlphaN,
    #[serde(rename = "beta_n")]
    BetaN,
    #[serde(rename = "p_n")]
    PN,
    #[serde(rename = "H_n")]
    HN,
    #[serde(rename = "lnD_n")]
    LnDN,
    #[serde(rename = "ln_h_n")]
    LnHN,
    #[serde(rename = "b")]
    B,
    #[serde(rename = "b_half")]
    BHalf,
    #[serde(rename = "b_quarter_sq")]
    BQuarterSq,
    #[serde(rename = "A")]
    A,
    #[serde(rename = "F")]
    F,
    #[serde(rename = "mu0")]
    Mu0,
}

impl Quantity {
    pub const ALL: [Quantity; 12] = [
        Quantity::AlphaN,
        Quantity::BetaN,
        Quantity::PN,
        Quantity::HN,
        Quantity::LnDN,
        Quantity::LnHN,
        Quantity::B,
        Quantity::BHalf,
        Quantity::BQuarterSq,
        Quantity::A,
        Quantity::F,
        Quantity::Mu0,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Quantity::AlphaN => "alpha_n",
            Quantity::BetaN => "beta_n",
            Quantity::PN => "p_n",
            Quantity::HN => "H_n",
            Quantity::LnDN => "lnD_n",
            Quantity::LnHN => "ln_h_n",
            Quantity::B => "b",
            Quantity::BHalf => "b_half",
            Quantity::BQuarterSq => "b_quarter_sq",
            Quantity::A => "A",
            Quantity::F => "F",
            Quantity::Mu0 => "mu0",
        }
    }

    /// Whether the exact pipeline produces this quantity (the fluid ones it does not).
    pub fn has_exact(self) -> bool {
        matches!(
            self,
            Quantity::AlphaN | Quantity::BetaN | Quantity::PN | Quantity::HN | Quantity::LnDN | Quantity::LnHN | Quantity::Mu0
        )
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.id().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownQuantity(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    LargeN,
    LongTime,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace('-', "_").as_str() {
            "large_n" => Ok(Regime::LargeN),
            "long_time" => Ok(Regime::LongTime),
            other => Err(Error::Parse(format!("unknown regime {other:?}"))),
        }
    }
}

/// One term of a series: `value ∝ scale^exponent · (ln scale)^log_power`.
#[derive(Clone, Debug)]
pub struct Term<T> {
    pub label: String,
    pub exponent: f64,
    pub log_power: u8,
    pub value: T,
    /// Name of an undetermined constant this term stands for (its value is then 0 unless supplied).
    pub undetermined: Option<String>,
}

/// A truncated asymptotic series with its term ledger.
#[derive(Clone, Debug)]
pub struct SeriesEval<T> {
    pub quantity: Quantity,
    pub regime: Regime,
    pub n: usize,
    pub params: WeightParams,
    /// Number of leading terms kept.
    pub order: usize,
    pub terms: Vec<Term<T>>,
    pub total: T,
    /// Exponent of the first omitted term, or of the printed remainder when nothing is omitted.
    pub remainder_exponent: f64,
    pub undetermined: Vec<String>,
}

impl<T: Scalar> SeriesEval<T> {
    pub fn full_order(&self) -> usize {
        self.terms.len()
    }

    pub fn to_json(&self, digits: usize) -> Value {
        json!({
            "quantity": self.quantity,
            "regime": self.regime,
            "n": self.n,
            "params": self.params,
            "order": self.order,
            "total": self.total.to_text_digits(digits),
            "remainder_exponent": self.remainder_exponent,
            "undetermined": self.undetermined,
            "terms": self.terms.iter().map(|t| json!({
                "label": t.label,
                "exponent": t.exponent,
                "log_power": t.log_power,
                "value": t.value.to_text_digits(digits),
                "undetermined": t.undetermined,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Values for the constants the expansions leave open.
#[derive(Clone, Debug)]
pub struct Constants<T> {
    pub c2: Option<T>,
    pub c0: Option<T>,
}

impl<T> Default for Constants<T> {
    fn default() -> Self {
        Constants { c2: None, c0: None }
    }
}

/// `c̃₂(α, 0) = α − ln 2π` and `c̃₀(α, 0) = −(α/2) ln 2π − 2ζ′(−1) + ln G(α+1)`.
pub fn laguerre_constants<T: Real>(alpha: &T) -> Result<(T, T)> {
    let ctx = alpha.context();
    let ln2pi = (T::pi(ctx) * T::from_i64(2, ctx)).ln();
    let c2 = alpha.clone() - &ln2pi;
    let c0 = -(alpha.clone() / T::from_i64(2, ctx) * &ln2pi) - T::from_i64(2, ctx) * zeta_prime_minus1::<T>(ctx)
        + log_barnes_g(&(alpha.clone() + T::one(ctx)))?;
    Ok((c2, c0))
}

/// Known constants for the parameters: exact at `λ = 0`, none otherwise.
pub fn known_constants<T: Real>(params: &WeightParams, ctx: T::Ctx) -> Result<Constants<T>> {
    if params.lambda_is_zero() {
        let (c2, c0) = laguerre_constants(&params.alpha_as::<T>(ctx))?;
        Ok(Constants {
            c2: Some(c2),
            c0: Some(c0),
        })
    } else {
        Ok(Constants::default())
    }
}

struct Vars<T: Real> {
    n: T,
    a: T,
    l: T,
    t: T,
    sn: T,
    st: T,
    ln_n: T,
    ln_t: T,
    ctx: T::Ctx,
}

impl<T: Real> Vars<T> {
    fn new(n: usize, p: &WeightParams, ctx: T::Ctx) -> Self {
        let nn = T::from_i64(n as i64, ctx);
        let t = p.t_as::<T>(ctx);
        Vars {
            sn: nn.sqrt(),
            ln_n: if n > 0 { nn.ln() } else { T::zero(ctx) },
            st: t.sqrt(),
            ln_t: t.ln(),
            n: nn,
            a: p.alpha_as::<T>(ctx),
            l: p.lambda_as::<T>(ctx),
            t,
            ctx,
        }
    }

    fn k(&self, v: i64) -> T {
        T::from_i64(v, self.ctx)
    }

    /// `α + λ`
    fn s(&self) -> T {
        self.a.clone() + &self.l
    }

    /// `n^{e/2}`
    fn npow_half(&self, e: i32) -> T {
        let whole = self.n.powi(e.unsigned_abs() / 2);
        let v = if e.abs() % 2 == 1 { whole * &self.sn } else { whole };
        if e < 0 {
            T::one(self.ctx) / v
        } else {
            v
        }
    }
}

fn term<T>(label: &str, exponent: f64, log_power: u8, value: T) -> Term<T> {
    Term {
        label: label.to_string(),
        exponent,
        log_power,
        value,
        undetermined: None,
    }
}

fn open_term<T>(label: &str, exponent: f64, name: &str, value: T) -> Term<T> {
    Term {
        label: label.to_string(),
        exponent,
        log_power: 0,
        value,
        undetermined: Some(name.to_string()),
    }
}

/// Printed large-n terms and remainder exponent.
fn largen_terms<T: Real>(q: Quantity, v: &Vars<T>, c: &Constants<T>) -> Result<(Vec<Term<T>>, f64)> {
    let (a, l, t, st) = (&v.a, &v.l, &v.t, &v.st);
    let s = v.s();
    let zero = T::zero(v.ctx);
    let ts = t.clone() + v.k(2) * &s;
    let out = match q {
        Quantity::B | Quantity::BHalf => {
            let div = if q == Quantity::B { 1 } else { 2 };
            let d = |x: T| x / v.k(div);
            let terms = vec![
                term("4n", 1.0, 0, d(v.k(4) * &v.n)),
                term("2(α+λ)", 0.0, 0, d(v.k(2) * &s)),
                term("-λ√t/n^{1/2}", -0.5, 0, d(-(l.clone() * st) * v.npow_half(-1))),
                term(
                    "λ√t[t+2(α+λ)]/(8n^{3/2})",
                    -1.5,
                    0,
                    d(l.clone() * st * &ts / v.k(8) * v.npow_half(-3)),
                ),
                term("-λ²t/(8n²)", -2.0, 0, d(-(l.square() * t) / v.k(8) * v.npow_half(-4))),
                term(
                    "-3λ√t[t+2(α+λ)]²/(128n^{5/2})",
                    -2.5,
                    0,
                    d(-(v.k(3) * l * st * ts.square()) / v.k(128) * v.npow_half(-5)),
                ),
                term(
                    "λ²t[t+2(α+λ)]/(16n³)",
                    -3.0,
                    0,
                    d(l.square() * t * &ts / v.k(16) * v.npow_half(-6)),
                ),
            ];
            (terms, -3.5)
        }
        Quantity::BQuarterSq => (
            vec![
                term("n²", 2.0, 0, v.n.square()),
                term("n(α+λ)", 1.0, 0, v.n.clone() * &s),
                term("-λ√t n^{1/2}/2", 0.5, 0, -(l.clone() * st * &v.sn) / v.k(2)),
                term("(α+λ)²/4", 0.0, 0, s.square() / v.k(4)),
                term(
                    "λ√t[t-2(α+λ)]/(16n^{1/2})",
                    -0.5,
                    0,
                    l.clone() * st * (t.clone() - v.k(2) * &s) / v.k(16) * v.npow_half(-1),
                ),
                term(
                    "-λ√t[3t²+4t(α+λ)-4(α+λ)²]/(256n^{3/2})",
                    -1.5,
                    0,
                    -(l.clone() * st * (v.k(3) * t.square() + v.k(4) * t * &s - v.k(4) * s.square())) / v.k(256)
                        * v.npow_half(-3),
                ),
                term("λ²t²/(64n²)", -2.0, 0, l.square() * t.square() / v.k(64) * v.npow_half(-4)),
            ],
            -2.5,
        ),
        Quantity::A => (
            vec![
                term("-2n ln n", 1.0, 1, -(v.k(2) * &v.n * &v.ln_n)),
                term("2n", 1.0, 0, v.k(2) * &v.n),
                term("-(α+λ) ln n", 0.0, 1, -(s.clone() * &v.ln_n)),
                term("-λ√t/n^{1/2}", -0.5, 0, -(l.clone() * st) * v.npow_half(-1)),
                term("-(α+λ)²/(4n)", -1.0, 0, -(s.square()) / v.k(4) * v.npow_half(-2)),
                term(
                    "λ√t(6α+6λ+t)/(24n^{3/2})",
                    -1.5,
                    0,
                    l.clone() * st * (v.k(6) * &s + t) / v.k(24) * v.npow_half(-3),
                ),
                term(
                    "(2α³+6α²λ+3(2α-t)λ²+2λ³)/(48n²)",
                    -2.0,
                    0,
                    cubic(v) / v.k(48) * v.npow_half(-4),
                ),
            ],
            -2.5,
        ),
        Quantity::F => {
            let mut cterm = open_term("C", 0.0, "C", zero.clone());
            cterm.undetermined = Some("C".to_string());
            (
                vec![
                    term("-n² ln n", 2.0, 1, -(v.n.square() * &v.ln_n)),
                    term("3n²/2", 2.0, 0, v.k(3) * v.n.square() / v.k(2)),
                    term("-(α+λ)n ln n", 1.0, 1, -(s.clone() * &v.n * &v.ln_n)),
                    term("(α+λ)n", 1.0, 0, s.clone() * &v.n),
                    term("-2λ√t n^{1/2}", 0.5, 0, -(v.k(2) * l * st * &v.sn)),
                    term("-(α+λ)² ln n/4", 0.0, 1, -(s.square() * &v.ln_n) / v.k(4)),
                    cterm,
                    term(
                        "-λ√t(6α+6λ+t)/(12n^{1/2})",
                        -0.5,
                        0,
                        -(l.clone() * st * (v.k(6) * &s + t)) / v.k(12) * v.npow_half(-1),
                    ),
                    term(
                        "-(2α³+6α²λ+3(2α-t)λ²+2λ³)/(48n)",
                        -1.0,
                        0,
                        -cubic(v) / v.k(48) * v.npow_half(-2),
                    ),
                ],
                -1.5,
            )
        }
        Quantity::AlphaN => (
            vec![
                term("2n", 1.0, 0, v.k(2) * &v.n),
                term("1+α+λ", 0.0, 0, v.k(1) + &s),
                term("-λ√t/(2n^{1/2})", -0.5, 0, -(l.clone() * st) / v.k(2) * v.npow_half(-1)),
                term(
                    "λ[4t²+8t(α+λ+1)+4α²-1]/(64√t n^{3/2})",
                    -1.5,
                    0,
                    l.clone() * (v.k(4) * t.square() + v.k(8) * t * (s.clone() + v.k(1)) + v.k(4) * a.square() - v.k(1))
                        / (v.k(64) * st)
                        * v.npow_half(-3),
                ),
                term(
                    "-λ²(4t²-4α²+1)/(64tn²)",
                    -2.0,
                    0,
                    -(l.square() * (v.k(4) * t.square() - v.k(4) * a.square() + v.k(1))) / (v.k(64) * t)
                        * v.npow_half(-4),
                ),
            ],
            -2.5,
        ),
        Quantity::BetaN => (
            vec![
                term("n²", 2.0, 0, v.n.square()),
                term("(α+λ)n", 1.0, 0, s.clone() * &v.n),
                term("-λ√t n^{1/2}/2", 0.5, 0, -(l.clone() * st * &v.sn) / v.k(2)),
                term("λ(2α+λ)/4", 0.0, 0, l.clone() * (v.k(2) * a + l) / v.k(4)),
                term(
                    "λ[4t²-8t(α+λ)-12α²+3]/(64√t n^{1/2})",
                    -0.5,
                    0,
                    l.clone() * (v.k(4) * t.square() - v.k(8) * t * &s - v.k(12) * a.square() + v.k(3)) / (v.k(64) * st)
                        * v.npow_half(-1),
                ),
                term(
                    "λ²(1-4α²)/(32tn)",
                    -1.0,
                    0,
                    l.square() * (v.k(1) - v.k(4) * a.square()) / (v.k(32) * t) * v.npow_half(-2),
                ),
            ],
            -1.5,
        ),
        Quantity::PN | Quantity::HN => {
            let tail = vec![
                term("λ√t n^{1/2}", 0.5, 0, l.clone() * st * &v.sn),
                term("-λ(2t+2α+λ)/4", 0.0, 0, -(l.clone() * (v.k(2) * t + v.k(2) * a + l)) / v.k(4)),
                term(
                    "λ[4t²+8(α+λ)t+4α²-1]/(32√t n^{1/2})",
                    -0.5,
                    0,
                    l.clone() * (v.k(4) * t.square() + v.k(8) * &s * t + v.k(4) * a.square() - v.k(1)) / (v.k(32) * st)
                        * v.npow_half(-1),
                ),
                term(
                    "-λ²(4t²-4α²+1)/(64tn)",
                    -1.0,
                    0,
                    -(l.square() * (v.k(4) * t.square() - v.k(4) * a.square() + v.k(1))) / (v.k(64) * t)
                        * v.npow_half(-2),
                ),
            ];
            if q == Quantity::PN {
                let mut terms = vec![
                    term("-n²", 2.0, 0, -v.n.square()),
                    term("-(α+λ)n", 1.0, 0, -(s.clone() * &v.n)),
                ];
                terms.extend(tail);
                (terms, -1.5)
            } else {
                (tail, -1.5)
            }
        }
        Quantity::LnDN => {
            let c2 = c.c2.clone();
            let c0 = c.c0.clone();
            let mut c2_term = open_term("-c̃₂n", 1.0, "c2", zero.clone());
            if let Some(c2) = c2 {
                c2_term.value = -(c2 * &v.n);
                c2_term.undetermined = None;
            }
            let known_const = -(l.clone() * t) / v.k(2) - l.clone() * (v.k(2) * a + l) / v.k(4) * &v.ln_t;
            let mut c0_term = open_term("-λt/2-λ(2α+λ)ln t/4-c̃₀", 0.0, "c0", known_const.clone());
            if let Some(c0) = c0 {
                c0_term.value = known_const - c0;
                c0_term.undetermined = None;
            }
            (
                vec![
                    term("n² ln n", 2.0, 1, v.n.square() * &v.ln_n),
                    term("-3n²/2", 2.0, 0, -(v.k(3) * v.n.square()) / v.k(2)),
                    term("(α+λ)n ln n", 1.0, 1, s.clone() * &v.n * &v.ln_n),
                    c2_term,
                    term("2λ√t n^{1/2}", 0.5, 0, v.k(2) * l * st * &v.sn),
                    term(
                        "(6α²+6αλ+3λ²-2)/12 ln n",
                        0.0,
                        1,
                        (v.k(6) * a.square() + v.k(6) * a * l + v.k(3) * l.square() - v.k(2)) / v.k(12) * &v.ln_n,
                    ),
                    c0_term,
                    term(
                        "λ[4t²+24t(α+λ)-12α²+3]/(48√t n^{1/2})",
                        -0.5,
                        0,
                        l.clone() * (v.k(4) * t.square() + v.k(24) * t * &s - v.k(12) * a.square() + v.k(3))
                            / (v.k(48) * st)
                            * v.npow_half(-1),
                    ),
                    term(
                        "-[12λ²t²-8t(α+λ)(4α²+2αλ+λ²-2)+3λ²(4α²-1)]/(192tn)",
                        -1.0,
                        0,
                        -(v.k(12) * l.square() * t.square()
                            - v.k(8) * t * &s * (v.k(4) * a.square() + v.k(2) * a * l + l.square() - v.k(2))
                            + v.k(3) * l.square() * (v.k(4) * a.square() - v.k(1)))
                            / (v.k(192) * t)
                            * v.npow_half(-2),
                    ),
                ],
                -1.5,
            )
        }
        Quantity::LnHN => {
            let mut c_term = open_term("α+λ-c̃₂", 0.0, "c2", s.clone());
            if let Some(c2) = c.c2.clone() {
                c_term.value = s.clone() - c2;
                c_term.undetermined = None;
            }
            (
                vec![
                    term("2n ln n", 1.0, 1, v.k(2) * &v.n * &v.ln_n),
                    term("-2n", 1.0, 0, -(v.k(2) * &v.n)),
                    term("(1+α+λ) ln n", 0.0, 1, (v.k(1) + &s) * &v.ln_n),
                    c_term,
                    term("λ√t/n^{1/2}", -0.5, 0, l.clone() * st * v.npow_half(-1)),
                    term(
                        "(6α(α+λ+1)+3λ(λ+2)+2)/(12n)",
                        -1.0,
                        0,
                        (v.k(6) * a * (s.clone() + v.k(1)) + v.k(3) * l * (l.clone() + v.k(2)) + v.k(2)) / v.k(12)
                            * v.npow_half(-2),
                    ),
                ],
                -1.5,
            )
        }
        Quantity::Mu0 => {
            return Err(Error::UnknownQuantity(format!("{q} has no large-n expansion")));
        }
    };
    Ok(out)
}

/// `2α³ + 6α²λ + 3(2α−t)λ² + 2λ³`
fn cubic<T: Real>(v: &Vars<T>) -> T {
    let (a, l, t) = (&v.a, &v.l, &v.t);
    v.k(2) * a.powi(3) + v.k(6) * a.square() * l + v.k(3) * (v.k(2) * a - t) * l.square() + v.k(2) * l.powi(3)
}

/// Printed long-time terms (powers of `t`) and remainder exponent.
fn longtime_terms<T: Real>(q: Quantity, v: &Vars<T>) -> Result<(Vec<Term<T>>, f64)> {
    let (a, l, t) = (&v.a, &v.l, &v.t);
    let n = &v.n;
    let t2 = t.square();
    let nna = n.clone() * (n.clone() + a);
    let c2n = v.k(2) * n + a - l;
    // 6n² + 2n(3α−λ+3) + (α+1)(α−λ+2)
    let quad = v.k(6) * n.square() + v.k(2) * n * (v.k(3) * a - l + v.k(3)) + (a.clone() + v.k(1)) * (a.clone() - l + v.k(2));
    let lead_a = v.k(2) * n + a + v.k(1);
    let out = match q {
        Quantity::AlphaN => vec![
            term("2n+α+1", 0.0, 0, lead_a.clone()),
            term("λ(2n+α+1)/t", -1.0, 0, l.clone() * &lead_a / t),
            term("-λ[6n²+2n(3α-λ+3)+(α+1)(α-λ+2)]/t²", -2.0, 0, -(l.clone() * &quad) / &t2),
        ],
        Quantity::BetaN => vec![
            term("n(n+α)", 0.0, 0, nna.clone()),
            term("2λn(n+α)/t", -1.0, 0, v.k(2) * l * &nna / t),
            term("-3λn(n+α)(2n+α-λ)/t²", -2.0, 0, -(v.k(3) * l * &nna * &c2n) / &t2),
        ],
        Quantity::HN => vec![
            term("λn", 0.0, 0, l.clone() * n),
            term("-λn(n+α)/t", -1.0, 0, -(l.clone() * &nna) / t),
            term("λn(n+α)(2n+α-λ)/t²", -2.0, 0, l.clone() * &nna * &c2n / &t2),
        ],
        Quantity::PN => vec![
            term("-n(n+α)", 0.0, 0, -nna.clone()),
            term("-λn(n+α)/t", -1.0, 0, -(l.clone() * &nna) / t),
            term("λn(n+α)(2n+α-λ)/t²", -2.0, 0, l.clone() * &nna * &c2n / &t2),
        ],
        Quantity::LnDN => {
            let one = T::one(v.ctx);
            let c = log_barnes_g(&(n.clone() + &one))? + log_barnes_g(&(n.clone() + a + &one))?
                - log_barnes_g(&(a.clone() + &one))?;
            vec![
                term("λn ln t", 0.0, 1, l.clone() * n * &v.ln_t),
                term("ln[G(n+1)G(n+α+1)/G(α+1)]", 0.0, 0, c),
                term("λn(n+α)/t", -1.0, 0, l.clone() * &nna / t),
                term("-λn(n+α)(2n+α-λ)/(2t²)", -2.0, 0, -(l.clone() * &nna * &c2n) / (v.k(2) * &t2)),
            ]
        }
        Quantity::LnHN => {
            let one = T::one(v.ctx);
            let c = log_gamma(&(n.clone() + &one))? + log_gamma(&(n.clone() + a + &one))?;
            vec![
                term("λ ln t", 0.0, 1, l.clone() * &v.ln_t),
                term("ln[Γ(n+1)Γ(n+α+1)]", 0.0, 0, c),
                term("λ(2n+α+1)/t", -1.0, 0, l.clone() * &lead_a / t),
                term(
                    "-λ[6n²+2n(3α-λ+3)+(α+1)(α-λ+2)]/(2t²)",
                    -2.0,
                    0,
                    -(l.clone() * &quad) / (v.k(2) * &t2),
                ),
            ]
        }
        Quantity::Mu0 => {
            // t^λ [Γ(α+1) + λΓ(α+2)/t + λ(λ−1)Γ(α+3)/(2t²) + λ(λ−1)(λ−2)Γ(α+4)/(6t³)]
            let lf = l.to_f64();
            let tl = (l.clone() * &v.ln_t).exp();
            let g = |k: i64| log_gamma(&(a.clone() + v.k(k))).map(|x| x.exp());
            let one = T::one(v.ctx);
            let l1 = l.clone() - &one;
            let l2 = l.clone() - v.k(2);
            vec![
                term("t^λ Γ(α+1)", lf, 0, tl.clone() * g(1)?),
                term("λ t^{λ-1} Γ(α+2)", lf - 1.0, 0, tl.clone() * l * g(2)? / t),
                term("λ(λ-1) t^{λ-2} Γ(α+3)/2", lf - 2.0, 0, tl.clone() * l * &l1 * g(3)? / (v.k(2) * &t2)),
                term(
                    "λ(λ-1)(λ-2) t^{λ-3} Γ(α+4)/6",
                    lf - 3.0,
                    0,
                    tl.clone() * l * &l1 * &l2 * g(4)? / (v.k(6) * &t2 * t),
                ),
            ]
        }
        other => {
            return Err(Error::UnknownQuantity(format!("{other} has no long-time expansion")));
        }
    };
    let rem = if q == Quantity::Mu0 { l.to_f64() - 4.0 } else { -3.0 };
    Ok((out, rem))
}

fn assemble<T: Real>(
    quantity: Quantity,
    regime: Regime,
    n: usize,
    params: &WeightParams,
    order: Option<usize>,
    (mut terms, printed_rem): (Vec<Term<T>>, f64),
    ctx: T::Ctx,
) -> Result<SeriesEval<T>> {
    let full = terms.len();
    let order = order.unwrap_or(full);
    if order == 0 || order > full {
        return Err(Error::domain(
            "series",
            format!("order {order} outside 1..={full} for {quantity}"),
        ));
    }
    let remainder_exponent = if order < full {
        terms[order].exponent
    } else {
        printed_rem
    };
    terms.truncate(order);
    let total = terms.iter().fold(T::zero(ctx), |acc, t| acc + &t.value);
    let undetermined = terms.iter().filter_map(|t| t.undetermined.clone()).collect();
    Ok(SeriesEval {
        quantity,
        regime,
        n,
        params: params.clone(),
        order,
        terms,
        total,
        remainder_exponent,
        undetermined,
    })
}

/// Large-n expansion truncated to `order` leading terms (`None`: all printed terms).
pub fn largen_series<T: Real>(
    quantity: Quantity,
    n: usize,
    params: &WeightParams,
    order: Option<usize>,
    constants: &Constants<T>,
    ctx: T::Ctx,
) -> Result<SeriesEval<T>> {
    if n == 0 {
        return Err(Error::domain("largen_series", "n must be at least 1"));
    }
    let v = Vars::<T>::new(n, params, ctx);
    let terms = largen_terms(quantity, &v, constants)?;
    assemble(quantity, Regime::LargeN, n, params, order, terms, ctx)
}

/// Long-time expansion in powers of `1/t` at the `t` of `params`.
pub fn longtime_series<T: Real>(
    quantity: Quantity,
    n: usize,
    params: &WeightParams,
    order: Option<usize>,
    ctx: T::Ctx,
) -> Result<SeriesEval<T>> {
    let v = Vars::<T>::new(n, params, ctx);
    let terms = longtime_terms(quantity, &v)?;
    assemble(quantity, Regime::LongTime, n, params, order, terms, ctx)
}

/// The free-energy series; its constant `C` is always undetermined.
pub fn free_energy_series<T: Real>(n: usize, params: &WeightParams, ctx: T::Ctx) -> Result<SeriesEval<T>> {
    largen_series(Quantity::F, n, params, None, &Constants::default(), ctx)
}

fn fluid_domain(op: &'static str, n: usize, params: &WeightParams) -> Result<()> {
    if n == 0 {
        return Err(Error::domain(op, "n must be at least 1"));
    }
    if Scalar::to_f64(params.alpha()) < 0.0 {
        return Err(Error::domain(op, format!("the fluid picture needs alpha >= 0, got {params}")));
    }
    Ok(())
}

/// Positive root `b` of `b − 2α − 2λ + 2λ√(t/(b+t)) = 4n`, by safeguarded Newton.
pub fn fluid_endpoint<T: Real>(n: usize, params: &WeightParams, ctx: &PrecisionCtx) -> Result<T> {
    fluid_domain("fluid_endpoint", n, params)?;
    let s = T::ctx_for(ctx);
    let a = params.alpha_as::<T>(s);
    let l = params.lambda_as::<T>(s);
    let t = params.t_as::<T>(s);
    let two = T::from_i64(2, s);
    let four_n = T::from_i64(4 * n as i64, s);
    let f = |b: &T| {
        let w = (t.clone() / (b.clone() + &t)).sqrt();
        b.clone() - two.clone() * &a - two.clone() * &l + two.clone() * &l * &w - &four_n
    };
    let df = |b: &T| {
        let bt = b.clone() + &t;
        T::one(s) - l.clone() * t.sqrt() / (bt.clone() * bt.sqrt())
    };
    let centre = four_n.clone() + two.clone() * &a + two.clone() * &l;
    let spread = two.clone() * l.abs();
    let mut lo = centre.clone() - &spread;
    if lo < T::zero(s) {
        lo = T::zero(s);
    }
    let mut hi = centre.clone() + &spread + T::one(s);
    let (flo, fhi) = (f(&lo), f(&hi));
    let zero = T::zero(s);
    if !(flo <= zero && fhi >= zero) {
        return Err(Error::domain(
            "fluid_endpoint",
            format!("no sign change in [{lo:?}, {hi:?}] for {params}"),
        ));
    }
    let tol = T::decimal_digits(s) - 3.0;
    let mut b = centre.clone();
    if b > hi || b < lo {
        b = (lo.clone() + &hi) / &two;
    }
    for _ in 0..400 {
        let fb = f(&b);
        if fb.is_zero() {
            return Ok(b);
        }
        if fb < zero {
            lo = b.clone();
        } else {
            hi = b.clone();
        }
        let d = df(&b);
        let mut next = b.clone() - fb / &d;
        if !(next > lo && next < hi) || d.is_zero() {
            next = (lo.clone() + &hi) / &two;
        }
        let step = (next.clone() - &b).abs();
        b = next;
        if step.is_zero() || step.log10_abs() - b.log10_abs() < -tol {
            return Ok(b);
        }
    }
    Err(Error::Precision {
        op: "fluid_endpoint",
        msg: format!("Newton iteration did not settle for {params}"),
        last: b.to_text_digits(30),
        previous: String::new(),
    })
}

/// `A = b/2 − (2n+α) ln(b/4) − λ ln(t/4) − 2λ ln(√((b+t)/t) + 1)` at the solved `b`.
pub fn lagrange_multiplier<T: Real>(n: usize, params: &WeightParams, ctx: &PrecisionCtx) -> Result<T> {
    let b: T = fluid_endpoint(n, params, ctx)?;
    Ok(lagrange_from_endpoint(n, params, &b))
}

fn lagrange_from_endpoint<T: Real>(n: usize, params: &WeightParams, b: &T) -> T {
    let s = b.context();
    let a = params.alpha_as::<T>(s);
    let l = params.lambda_as::<T>(s);
    let t = params.t_as::<T>(s);
    let two = T::from_i64(2, s);
    let four = T::from_i64(4, s);
    b.clone() / &two
        - (T::from_i64(2 * n as i64, s) + &a) * (b.clone() / &four).ln()
        - l.clone() * (t.clone() / &four).ln()
        - two * &l * (((b.clone() + &t) / &t).sqrt() + T::one(s)).ln()
}

/// Endpoint, multiplier and free-energy series at one `n`.
#[derive(Clone, Debug)]
pub struct FluidQuantities<T> {
    pub n: usize,
    pub params: WeightParams,
    pub b: T,
    pub a: T,
    pub f: SeriesEval<T>,
}

pub fn fluid_quantities<T: Real>(n: usize, params: &WeightParams, ctx: &PrecisionCtx) -> Result<FluidQuantities<T>> {
    let b: T = fluid_endpoint(n, params, ctx)?;
    let a = lagrange_from_endpoint(n, params, &b);
    let f = free_energy_series(n, params, T::ctx_for(ctx))?;
    Ok(FluidQuantities {
        n,
        params: params.clone(),
        b,
        a,
        f,
    })
}

/// Exact recurrence and auxiliary tables to order `n_max`, with at least `target` certified digits.
pub fn exact_pipeline<T: Real>(
    params: &WeightParams,
    n_max: usize,
    target: u32,
) -> Result<(RecurrenceTable<T>, AuxTable<T>)> {
    let mut ctx = PrecisionCtx::for_hankel(target, n_max);
    let mut last = f64::NAN;
    for _ in 0..=ctx.max_refinements {
        let table = closed_form_table::<T>(n_max, params, &ctx)?;
        let recur = recurrence_coeffs(&table, n_max)?;
        if recur.certified_digits() >= target as f64 {
            let aux = aux_from_recurrence(&recur)?;
            return Ok((recur, aux));
        }
        last = recur.certified_digits();
        let short = (target as f64 - last).ceil() as u32 + 10;
        ctx = ctx.raised_by(short);
    }
    Err(Error::Precision {
        op: "exact_pipeline",
        msg: format!("only {last:.1} of {target} digits survived the Hankel factorisation for {params}"),
        last: String::new(),
        previous: String::new(),
    })
}

/// The exact-pipeline value of a quantity at order `n` (`N` must exceed `n` for `α_n`, `R_n`).
pub fn exact_value<T: Real>(quantity: Quantity, n: usize, recur: &RecurrenceTable<T>, aux: &AuxTable<T>) -> Result<T> {
    let need = match quantity {
        Quantity::AlphaN | Quantity::LnHN => n + 1,
        _ => n,
    };
    if need > recur.n() {
        return Err(Error::domain(
            "exact_value",
            format!("{quantity} at n = {n} needs a table to order {need}, have {}", recur.n()),
        ));
    }
    Ok(match quantity {
        Quantity::AlphaN => recur.alpha(n).clone(),
        Quantity::BetaN => recur.beta(n).clone(),
        Quantity::PN => recur.p(n).clone(),
        Quantity::HN => aux.h(n).clone(),
        Quantity::LnDN => recur.hankel(n).ln(),
        Quantity::LnHN => recur.h(n).ln(),
        Quantity::Mu0 => recur.hankel(1).clone(),
        other => return Err(Error::UnknownQuantity(format!("{other} has no exact-pipeline value"))),
    })
}

/// One `(scale, |exact − series|)` observation.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergencePoint {
    pub scale: f64,
    pub log10_error: f64,
    /// `log10` of the smallest error the exact value can resolve.
    pub log10_floor: f64,
    pub used: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeStatus {
    Measured,
    ExactMatch,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub slope: Option<f64>,
    pub status: SlopeStatus,
    pub points: Vec<ConvergencePoint>,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub fn within(&self, expected: f64, band: f64) -> bool {
        self.slope.is_some_and(|s| (s - expected).abs() <= band)
    }
}

/// Points closer than this many digits to the floor are left out of the fit.
pub const FLOOR_MARGIN: f64 = 3.0;

/// Least-squares slope of `log|exact − series|` against `log scale`.
pub fn convergence_order(points: &[(f64, f64, f64)]) -> ConvergenceReport {
    let mut pts: Vec<ConvergencePoint> = points
        .iter()
        .map(|&(scale, log10_error, log10_floor)| ConvergencePoint {
            scale,
            log10_error,
            log10_floor,
            used: log10_error.is_finite() && log10_error >= log10_floor + FLOOR_MARGIN,
        })
        .collect();
    let mut notes = Vec::new();
    let dropped = pts.iter().filter(|p| !p.used).count();
    if dropped > 0 {
        notes.push(format!("{dropped} point(s) at or below the precision floor dropped"));
    }
    let used: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.used)
        .map(|p| (p.scale.log10(), p.log10_error))
        .collect();
    if used.is_empty() && !pts.is_empty() {
        return ConvergenceReport {
            slope: None,
            status: SlopeStatus::ExactMatch,
            points: pts,
            notes: vec!["every residual is below the precision floor".to_string()],
        };
    }
    if used.len() < 3 {
        notes.push(format!("only {} usable point(s)", used.len()));
        return ConvergenceReport {
            slope: None,
            status: SlopeStatus::Inconclusive,
            points: pts,
            notes,
        };
    }
    let m = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / m;
    let my = used.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    pts.sort_by(|a, b| a.scale.total_cmp(&b.scale));
    ConvergenceReport {
        slope: Some(sxy / sxx),
        status: SlopeStatus::Measured,
        points: pts,
        notes,
    }
}

/// Exact against series over a grid, with the measured slope.
#[derive(Clone, Debug)]
pub struct Comparison<T> {
    pub quantity: Quantity,
    pub regime: Regime,
    pub rows: Vec<ComparisonRow<T>>,
    pub report: ConvergenceReport,
    /// Exponent of the first omitted term, i.e. the slope the series claims.
    pub expected_slope: f64,
}

#[derive(Clone, Debug)]
pub struct ComparisonRow<T> {
    pub n: usize,
    pub t: String,
    pub scale: f64,
    pub exact: T,
    pub series: SeriesEval<T>,
    pub log10_error: f64,
}

impl<T: Scalar> Comparison<T> {
    /// CSV with columns `scale, exact, series, abs_err` followed by the ledger terms.
    pub fn to_csv(&self, digits: usize) -> String {
        let labels: Vec<String> = self
            .rows
            .first()
            .map(|r| r.series.terms.iter().map(|t| csv_quote(&t.label)).collect())
            .unwrap_or_default();
        let mut out = format!("scale,n,t,exact,series,abs_err");
        for l in &labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{:e}",
                r.scale,
                r.n,
                r.t,
                r.exact.to_text_digits(digits),
                r.series.total.to_text_digits(digits),
                10f64.powf(r.log10_error)
            ));
            for term in &r.series.terms {
                out.push(',');
                out.push_str(&term.value.to_text_digits(digits));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "quantity": self.quantity,
            "regime": self.regime,
            "expected_slope": self.expected_slope,
            "slope": self.report.slope,
            "status": self.report.status,
            "points": self.report.points,
            "notes": self.report.notes,
        })
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Large-n comparison on one exact table covering every `n` in `ns`.
pub fn compare_large_n<T: Real>(
    quantity: Quantity,
    params: &WeightParams,
    ns: &[usize],
    order: Option<usize>,
    constants: &Constants<T>,
    recur: &RecurrenceTable<T>,
    aux: &AuxTable<T>,
) -> Result<Comparison<T>> {
    let ctx = recur.ctx();
    let digits = recur.certified_digits();
    let mut rows = Vec::with_capacity(ns.len());
    let mut expected = f64::NAN;
    for &n in ns {
        let exact = exact_value(quantity, n, recur, aux)?;
        let series = largen_series(quantity, n, params, order, constants, ctx)?;
        expected = series.remainder_exponent;
        let err = (exact.clone() - &series.total).log10_abs();
        rows.push(ComparisonRow {
            n,
            t: crate::scalar::format_rational(params.t()),
            scale: n as f64,
            exact,
            series,
            log10_error: err,
        });
    }
    let pts: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|r| (r.scale, r.log10_error, r.exact.log10_abs().max(0.0) - digits))
        .collect();
    Ok(Comparison {
        quantity,
        regime: Regime::LargeN,
        rows,
        report: convergence_order(&pts),
        expected_slope: expected,
    })
}

/// Long-time comparison at order `n` over the `t` values in `ts`, building one table per `t` in parallel.
pub fn compare_long_time<T: Real>(
    quantity: Quantity,
    params: &WeightParams,
    n: usize,
    ts: &[crate::scalar::Exact],
    order: Option<usize>,
    target: u32,
) -> Result<Comparison<T>> {
    let rows = ts
        .par_iter()
        .map(|t| {
            let p = params.with_t(t.clone())?;
            let (recur, aux) = exact_pipeline::<T>(&p, n + 2, target)?;
            let ctx = recur.ctx();
            let exact = exact_value(quantity, n, &recur, &aux)?;
            let series = longtime_series(quantity, n, &p, order, ctx)?;
            let err = (exact.clone() - &series.total).log10_abs();
            let floor = exact.log10_abs().max(0.0) - recur.certified_digits();
            Ok((
                ComparisonRow {
                    n,
                    t: crate::scalar::format_rational(t),
                    scale: Scalar::to_f64(t),
                    exact,
                    series,
                    log10_error: err,
                },
                floor,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let expected = rows.first().map(|r| r.0.series.remainder_exponent).unwrap_or(f64::NAN);
    let pts: Vec<(f64, f64, f64)> = rows.iter().map(|(r, f)| (r.scale, r.log10_error, *f)).collect();
    Ok(Comparison {
        quantity,
        regime: Regime::LongTime,
        rows: rows.into_iter().map(|r| r.0).collect(),
        report: convergence_order(&pts),
        expected_slope: expected,
    })
}

/// Fitted constants with diagnostics.
#[derive(Clone, Debug)]
pub struct ConstantFit<T> {
    pub quantity: Quantity,
    pub c2: T,
    /// `None` for `ln h_n`, which only involves `c̃₂`.
    pub c0: Option<T>,
    /// Change in each constant when the lowest-n point is left out.
    pub c2_error: f64,
    pub c0_error: Option<f64>,
    /// Slope of the residual with the fitted constants in place, over the fit range.
    pub residual_slope: ConvergenceReport,
    pub advisories: Vec<String>,
    pub tag: &'static str,
}

/// Least-squares fit of the open constants in `ln D_n` (`c̃₂`, `c̃₀`) or `ln h_n` (`c̃₂`).
///
/// The known printed terms are subtracted; nuisance terms `n^{−3/2}`, `n^{−2}`,
/// `n^{−5/2}` soak up the first omitted orders so the constants are not biased by
/// them. The quoted error is the larger shift from refitting without the lowest-n
/// point or without the last nuisance term.
pub fn fit_undetermined_constants<T: Real>(
    quantity: Quantity,
    params: &WeightParams,
    ns: &[usize],
    recur: &RecurrenceTable<T>,
    aux: &AuxTable<T>,
) -> Result<ConstantFit<T>> {
    if !matches!(quantity, Quantity::LnDN | Quantity::LnHN) {
        return Err(Error::UnknownQuantity(format!("{quantity} has no open constants to fit")));
    }
    let with_c0 = quantity == Quantity::LnDN;
    let unknowns = if with_c0 { 5 } else { 4 };
    if ns.len() < unknowns + 1 {
        return Err(Error::domain(
            "fit_undetermined_constants",
            format!("need at least {} points, got {}", unknowns + 1, ns.len()),
        ));
    }
    let ctx = recur.ctx();
    let zeros = Constants {
        c2: Some(T::zero(ctx)),
        c0: Some(T::zero(ctx)),
    };
    let mut rows: Vec<(Vec<T>, T)> = Vec::with_capacity(ns.len());
    for &n in ns {
        let exact = exact_value(quantity, n, recur, aux)?;
        let known = largen_series(quantity, n, params, None, &zeros, ctx)?.total;
        let nn = T::from_i64(n as i64, ctx);
        let nsq = nn.sqrt();
        let mut basis = Vec::with_capacity(unknowns);
        // ln D: −c̃₂ n − c̃₀; ln h: −c̃₂
        basis.push(if with_c0 { -nn.clone() } else { -T::one(ctx) });
        if with_c0 {
            basis.push(-T::one(ctx));
        }
        basis.push(T::one(ctx) / (nn.clone() * &nsq));
        basis.push(T::one(ctx) / nn.square());
        basis.push(T::one(ctx) / (nn.square() * &nsq));
        rows.push((basis, exact - known));
    }
    let full = least_squares(&rows)?;
    let fewer_points = least_squares(&rows[1..])?;
    let fewer_terms: Vec<(Vec<T>, T)> = rows
        .iter()
        .map(|(b, y)| (b[..unknowns - 1].to_vec(), y.clone()))
        .collect();
    let fewer_terms = least_squares(&fewer_terms)?;
    let err = |i: usize| {
        let a = (full[i].clone() - &fewer_points[i]).abs().to_f64();
        let b = (full[i].clone() - &fewer_terms[i]).abs().to_f64();
        a.max(b)
    };
    let mut advisories = Vec::new();
    let c2 = full[0].clone();
    let c0 = with_c0.then(|| full[1].clone());
    let c2_error = err(0);
    let c0_error = with_c0.then(|| err(1));
    if c2_error > 1e-3 || c0_error.is_some_and(|e| e > 1e-2) {
        advisories.push("fit is poorly conditioned: dropping one point moves the constants noticeably".to_string());
    }
    let consts = Constants {
        c2: Some(c2.clone()),
        c0: c0.clone(),
    };
    let digits = recur.certified_digits();
    let mut pts = Vec::new();
    for &n in ns {
        let exact = exact_value(quantity, n, recur, aux)?;
        let series = largen_series(quantity, n, params, None, &consts, ctx)?;
        pts.push((n as f64, (exact.clone() - series.total).log10_abs(), exact.log10_abs().max(0.0) - digits));
    }
    Ok(ConstantFit {
        quantity,
        c2,
        c0,
        c2_error,
        c0_error,
        residual_slope: convergence_order(&pts),
        advisories,
        tag: "empirically fitted",
    })
}

/// Normal-equation least squares; fine at the working precisions used here.
fn least_squares<T: Real>(rows: &[(Vec<T>, T)]) -> Result<Vec<T>> {
    let m = rows[0].0.len();
    let ctx = rows[0].1.context();
    let mut a = vec![vec![T::zero(ctx); m + 1]; m];
    for (basis, y) in rows {
        for i in 0..m {
            for j in 0..m {
                a[i][j] = a[i][j].clone() + basis[i].clone() * &basis[j];
            }
            a[i][m] = a[i][m].clone() + basis[i].clone() * y;
        }
    }
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .expect("non-empty");
        a.swap(col, piv);
        if a[col][col].is_zero() {
            return Err(Error::domain("fit_undetermined_constants", "singular normal equations"));
        }
        for r in 0..m {
            if r != col {
                let f = a[r][col].clone() / &a[col][col];
                for c in col..=m {
                    let v = a[r][c].clone() - f.clone() * &a[col][c];
                    a[r][c] = v;
                }
            }
        }
    }
    Ok((0..m).map(|i| a[i][m].clone() / &a[i][i]).collect())
}
