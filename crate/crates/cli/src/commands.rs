//! The four subcommands. Each fills a [`Run`] and leaves writing the manifest to `main`.

use std::sync::Mutex;
use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use deformed_laguerre::asymptotics::{
    compare_large_n, compare_long_time, exact_pipeline, fit_undetermined_constants, known_constants, Comparison,
    Constants, Quantity, Regime, SlopeStatus,
};
use deformed_laguerre::ladder::{
    aux_from_recurrence, build_t_grid, default_step, hn_consistency, verify_compatibility, verify_discrete_system,
    verify_ode, verify_painleve_v, verify_sigma_form, verify_toda, ResidualReport,
};
use deformed_laguerre::moments::{build_moment_table, closed_form_table};
use deformed_laguerre::orthopoly::recurrence_coeffs;
use deformed_laguerre::scalar::format_rational;
use deformed_laguerre::{BigAuxTable, BigMomentTable, BigReal, BigRecurrenceTable, Exact, PrecisionCtx, Scalar};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig, Task};
use crate::output::Sink;

/// Slope bands: the observed slope must sit within this distance of the claimed exponent.
pub const LARGE_N_BAND: f64 = 0.2;
pub const LONG_TIME_BAND: f64 = 0.1;

const ODE_ORDERS: [usize; 4] = [1, 3, 5, 8];
const ODE_POINTS: [(i64, i64); 3] = [(1, 2), (2, 1), (7, 1)];
const SIGMA_ORDERS: [usize; 2] = [1, 4];

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub task: String,
    pub t: String,
    pub wall_ms: u128,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub t: String,
    pub status: Status,
    /// How far past its tolerance the check landed, in decades; used to pick the worst failure.
    #[serde(skip)]
    pub excess: f64,
    pub worst_n: Option<usize>,
    pub detail: Value,
}

/// Everything a subcommand reports back.
#[derive(Default)]
pub struct Run {
    pub timings: Mutex<Vec<Timing>>,
    pub checks: Mutex<Vec<Check>>,
    pub certified: Mutex<Vec<(String, f64)>>,
}

impl Run {
    fn time<R>(&self, task: &str, t: &str, f: impl FnOnce() -> Result<R>) -> Result<R> {
        let start = Instant::now();
        let out = f();
        self.timings.lock().expect("timings lock").push(Timing {
            task: task.to_string(),
            t: t.to_string(),
            wall_ms: start.elapsed().as_millis(),
        });
        out
    }

    fn check(&self, c: Check) {
        self.checks.lock().expect("checks lock").push(c);
    }

    fn certify(&self, t: &str, digits: f64) {
        self.certified.lock().expect("certified lock").push((t.to_string(), digits));
    }

    pub fn sorted_checks(&self) -> Vec<Check> {
        let mut v = self.checks.lock().expect("checks lock").clone();
        v.sort_by(|a, b| (a.t.as_str(), a.name.as_str()).cmp(&(b.t.as_str(), b.name.as_str())));
        v
    }

    pub fn worst_failure(&self) -> Option<Check> {
        self.sorted_checks()
            .into_iter()
            .filter(|c| c.status == Status::Fail)
            .max_by(|a, b| a.excess.total_cmp(&b.excess))
    }
}

fn t_key(t: &Exact) -> String {
    format_rational(t).replace('/', "over")
}

fn print_digits(certified: f64) -> usize {
    certified.floor().max(1.0) as usize
}

struct Tables {
    recur: BigRecurrenceTable,
    aux: BigAuxTable,
}

/// Moments, recurrence and auxiliaries to order `n`, raising precision until `digits` survive.
///
/// The moment table goes to `sink` as soon as it exists, so a later failure leaves it behind.
fn build_tables(cfg: &RunConfig, sink: &Sink, t: &Exact, n: usize, cross_check: bool) -> Result<Tables> {
    let params = cfg.params_at(t)?;
    let mut ctx = PrecisionCtx::for_hankel(cfg.digits, n);
    for attempt in 0..=ctx.max_refinements {
        let mut moments = if cross_check {
            build_moment_table::<BigReal>(n, &params, &ctx)?
        } else {
            closed_form_table::<BigReal>(n, &params, &ctx)?
        };
        if let Some(c) = &cfg.corrupt_moment {
            if c.j >= moments.mu().len() {
                bail!("corrupt_moment index {} is past the last moment {}", c.j, moments.mu().len() - 1);
            }
            let rel = BigReal::from_text(&c.rel, ctx.bits()).ok_or_else(|| anyhow!("bad corruption size"))?;
            moments.corrupt_moment(c.j, &rel);
        }
        write_moments(cfg, sink, t, &moments)?;
        let recur = recurrence_coeffs(&moments, n)?;
        if recur.certified_digits() >= cfg.digits as f64 || attempt == ctx.max_refinements {
            if recur.certified_digits() < cfg.digits as f64 {
                bail!(
                    "only {:.1} of {} digits certified at t = {} after {} refinements",
                    recur.certified_digits(),
                    cfg.digits,
                    format_rational(t),
                    attempt
                );
            }
            let aux = aux_from_recurrence(&recur)?;
            return Ok(Tables { recur, aux });
        }
        let short = (cfg.digits as f64 - recur.certified_digits()).ceil() as u32 + 10;
        ctx = ctx.raised_by(short);
    }
    unreachable!("refinement loop always returns")
}

fn write_moments(cfg: &RunConfig, sink: &Sink, t: &Exact, moments: &BigMomentTable) -> Result<()> {
    if !cfg.tasks.contains(&Task::Moments) {
        return Ok(());
    }
    let key = t_key(t);
    if cfg.wants(Format::Csv) {
        sink.write(&format!("moments_t{key}.csv"), &moments.to_csv(print_digits(moments.certified_digits())))?;
    }
    if cfg.wants(Format::Json) {
        sink.write_json(&format!("moments_t{key}.json"), &moments.to_json())?;
    }
    Ok(())
}

fn write_tables(cfg: &RunConfig, sink: &Sink, t: &Exact, tables: &Tables) -> Result<()> {
    let key = t_key(t);
    let digits = print_digits(tables.recur.certified_digits());
    if cfg.tasks.contains(&Task::Recurrence) {
        if cfg.wants(Format::Csv) {
            sink.write(&format!("recurrence_t{key}.csv"), &tables.recur.to_csv(digits))?;
        }
        if cfg.wants(Format::Json) {
            sink.write_json(&format!("recurrence_t{key}.json"), &tables.recur.to_json(digits))?;
        }
    }
    if cfg.tasks.contains(&Task::Aux) {
        let adigits = print_digits(tables.aux.certified_digits());
        if cfg.wants(Format::Csv) {
            sink.write(&format!("aux_t{key}.csv"), &tables.aux.to_csv(adigits))?;
        }
        if cfg.wants(Format::Json) {
            sink.write_json(&format!("aux_t{key}.json"), &tables.aux.to_json(adigits))?;
        }
    }
    Ok(())
}

pub fn compute(cfg: &RunConfig, sink: &Sink, run: &Run) -> Result<()> {
    cfg.t_grid.par_iter().try_for_each(|t| {
        let tk = format_rational(t);
        let tables = run.time("tables", &tk, || build_tables(cfg, sink, t, cfg.n_max, true))?;
        run.certify(&tk, tables.recur.certified_digits());
        run.time("write", &tk, || write_tables(cfg, sink, t, &tables))
    })
}

fn from_report(r: &ResidualReport) -> Check {
    Check {
        name: r.identity.clone(),
        t: r.t.clone(),
        status: if r.pass { Status::Pass } else { Status::Fail },
        excess: r.log10_residual - r.log10_tolerance,
        worst_n: r.worst_n,
        detail: serde_json::to_value(r).unwrap_or(Value::Null),
    }
}

pub fn verify(cfg: &RunConfig, sink: &Sink, run: &Run) -> Result<()> {
    if cfg.n_max < 2 {
        bail!("verify needs n_max >= 2");
    }
    cfg.t_grid.par_iter().try_for_each(|t| {
        let tk = format_rational(t);
        let params = cfg.params_at(t)?;
        let tables = run.time("tables", &tk, || build_tables(cfg, sink, t, cfg.n_max, true))?;
        run.certify(&tk, tables.recur.certified_digits());
        write_tables(cfg, sink, t, &tables)?;
        let (recur, aux) = (&tables.recur, &tables.aux);
        let mut reports = run.time("identities", &tk, || {
            let mut v = verify_compatibility(recur, aux);
            v.extend(verify_discrete_system(recur));
            let xs: Vec<BigReal> = ODE_POINTS.iter().map(|&(a, b)| BigReal::ratio(a, b, recur.ctx())).collect();
            for n in ODE_ORDERS.into_iter().filter(|&n| n < recur.n()) {
                v.push(verify_ode(recur, Some(aux), n, &xs)?);
            }
            Ok(v)
        })?;
        let fd = run.time("t-derivatives", &tk, || {
            let h = default_step(t, recur.certified_digits());
            let grid = build_t_grid::<BigReal>(&params, cfg.n_max, &h, recur.precision())?;
            let mut v = verify_toda(&grid);
            for n in SIGMA_ORDERS.into_iter().filter(|&n| n < recur.n()) {
                v.push(verify_painleve_v(&grid, n)?);
                v.push(verify_sigma_form(&grid, n)?);
            }
            v.push(hn_consistency(recur, aux, Some(&grid)));
            Ok(v)
        })?;
        reports.extend(fd);
        for r in &reports {
            run.check(from_report(r));
        }
        let doc = json!({
            "schema_version": crate::output::MANIFEST_SCHEMA_VERSION,
            "kind": "verification",
            "params": params,
            "n_max": cfg.n_max,
            "certified_digits": recur.certified_digits(),
            "identities": reports,
        });
        sink.write_json(&format!("verify_t{}.json", t_key(t)), &doc)
    })
}

fn slope_check(cmp: &Comparison<BigReal>, t: &str, band: f64, tag: &str) -> Check {
    let r = &cmp.report;
    let (status, excess) = match r.status {
        SlopeStatus::ExactMatch => (Status::Pass, f64::NEG_INFINITY),
        SlopeStatus::Inconclusive => (Status::Inconclusive, f64::NEG_INFINITY),
        SlopeStatus::Measured => {
            let gap = (r.slope.unwrap_or(f64::NAN) - cmp.expected_slope).abs();
            (if gap <= band { Status::Pass } else { Status::Fail }, gap - band)
        }
    };
    let mut detail = cmp.to_json();
    detail["band"] = json!(band);
    detail["status_label"] = json!(match r.status {
        SlopeStatus::ExactMatch => "exact match",
        SlopeStatus::Inconclusive => "inconclusive",
        SlopeStatus::Measured => "measured",
    });
    Check {
        name: format!("{tag}:{}", cmp.quantity),
        t: t.to_string(),
        status,
        excess,
        worst_n: None,
        detail,
    }
}

/// `n_max/8, n_max/4, n_max/2, n_max`, dropping duplicates and zeros.
pub fn geometric_ns(n_max: usize) -> Vec<usize> {
    let mut ns: Vec<usize> = [8, 4, 2, 1].iter().map(|d| n_max / d).filter(|&n| n >= 1).collect();
    ns.dedup();
    ns
}

pub fn asymptotics(cfg: &RunConfig, sink: &Sink, run: &Run, regime: Regime) -> Result<()> {
    match regime {
        Regime::LargeN => {
            let ns = geometric_ns(cfg.n_max);
            cfg.t_grid.par_iter().try_for_each(|t| {
                let tk = format_rational(t);
                let params = cfg.params_at(t)?;
                let (recur, aux) =
                    run.time("exact", &tk, || Ok(exact_pipeline::<BigReal>(&params, cfg.n_max + 1, cfg.digits)?))?;
                run.certify(&tk, recur.certified_digits());
                let digits = print_digits(recur.certified_digits());
                let none = Constants::default();
                for q in [Quantity::AlphaN, Quantity::BetaN, Quantity::PN, Quantity::HN] {
                    let cmp = compare_large_n(q, &params, &ns, None, &none, &recur, &aux)?;
                    if cfg.wants(Format::Csv) {
                        sink.write(&format!("largen_{q}_t{}.csv", t_key(t)), &cmp.to_csv(digits))?;
                    }
                    run.check(slope_check(&cmp, &tk, LARGE_N_BAND, "large_n"));
                }
                Ok(())
            })
        }
        Regime::LongTime => {
            if cfg.t_grid.len() < 3 {
                bail!("long-time comparisons need at least three t values");
            }
            let n = cfg.n_max;
            let params = cfg.params_at(&cfg.t_grid[0])?;
            let quantities = [
                Quantity::AlphaN,
                Quantity::BetaN,
                Quantity::HN,
                Quantity::PN,
                Quantity::LnDN,
                Quantity::LnHN,
            ];
            quantities.par_iter().try_for_each(|&q| {
                let cmp = run.time(&format!("long_time:{q}"), "all", || {
                    Ok(compare_long_time::<BigReal>(q, &params, n, &cfg.t_grid, None, cfg.digits)?)
                })?;
                if cfg.wants(Format::Csv) {
                    sink.write(&format!("longtime_{q}_n{n}.csv"), &cmp.to_csv(cfg.digits as usize))?;
                }
                run.check(slope_check(&cmp, "all", LONG_TIME_BAND, "long_time"));
                Ok(())
            })
        }
    }
}

/// Nine orders spread geometrically up to `n_max`.
pub fn fit_ns(n_max: usize) -> Vec<usize> {
    let mut ns: Vec<usize> = (0..9)
        .rev()
        .map(|k| (n_max as f64 * 2f64.powf(-(k as f64) / 2.0)).round() as usize)
        .filter(|&n| n >= 2)
        .collect();
    ns.dedup();
    ns
}

pub fn fit_constants(cfg: &RunConfig, sink: &Sink, run: &Run) -> Result<()> {
    let ns = fit_ns(cfg.n_max);
    if ns.len() < 6 {
        bail!("fit-constants needs n_max large enough for six distinct orders (try n_max >= 32)");
    }
    let fits = cfg
        .t_grid
        .par_iter()
        .map(|t| {
            let tk = format_rational(t);
            let params = cfg.params_at(t)?;
            let (recur, aux) = run.time("exact", &tk, || Ok(exact_pipeline::<BigReal>(&params, cfg.n_max, cfg.digits)?))?;
            run.certify(&tk, recur.certified_digits());
            let fit = run.time("fit", &tk, || Ok(fit_undetermined_constants(Quantity::LnDN, &params, &ns, &recur, &aux)?))?;
            let known = known_constants::<BigReal>(&params, recur.ctx())?;
            Ok((tk, fit, known))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (tk, fit, known) in &fits {
        let c0 = fit.c0.clone().expect("ln D_n fit has c0");
        let c0_err = fit.c0_error.unwrap_or(f64::INFINITY);
        let mut row = json!({
            "t": tk,
            "n": ns,
            "c2": fit.c2.to_text_digits(20),
            "c2_error": fit.c2_error,
            "c0": c0.to_text_digits(20),
            "c0_error": c0_err,
            "residual_slope": fit.residual_slope,
            "advisories": fit.advisories,
            "tag": fit.tag,
        });
        if let (Some(k2), Some(k0)) = (&known.c2, &known.c0) {
            let d2 = (fit.c2.clone() - k2).abs().to_f64();
            let d0 = (c0.clone() - k0).abs().to_f64();
            row["known_c2"] = json!(k2.to_text_digits(20));
            row["known_c0"] = json!(k0.to_text_digits(20));
            let ok = d2 <= fit.c2_error.max(1e-12) * 10.0 && d0 <= c0_err.max(1e-12) * 10.0;
            run.check(Check {
                name: "fit:known_constants".to_string(),
                t: tk.clone(),
                status: if ok { Status::Pass } else { Status::Fail },
                excess: (d2 / fit.c2_error.max(1e-300)).log10(),
                worst_n: None,
                detail: json!({ "c2_gap": d2, "c0_gap": d0 }),
            });
        }
        rows.push(row);
    }
    for i in 0..fits.len() {
        for j in i + 1..fits.len() {
            let (a, b) = (&fits[i].1, &fits[j].1);
            let d2 = (a.c2.clone() - &b.c2).abs().to_f64();
            let d0 = (a.c0.clone().expect("c0") - b.c0.as_ref().expect("c0")).abs().to_f64();
            let e2 = a.c2_error + b.c2_error;
            let e0 = a.c0_error.unwrap_or(0.0) + b.c0_error.unwrap_or(0.0);
            run.check(Check {
                name: "fit:t_independence".to_string(),
                t: format!("{}|{}", fits[i].0, fits[j].0),
                status: if d2 <= e2 && d0 <= e0 { Status::Pass } else { Status::Fail },
                excess: (d2 / e2).max(d0 / e0).log10(),
                worst_n: None,
                detail: json!({ "c2_gap": d2, "c2_allowed": e2, "c0_gap": d0, "c0_allowed": e0 }),
            });
        }
    }
    sink.write_json(
        "constants.json",
        &json!({
            "schema_version": crate::output::MANIFEST_SCHEMA_VERSION,
            "kind": "fitted_constants",
            "quantity": Quantity::LnDN,
            "fits": rows,
        }),
    )
}
