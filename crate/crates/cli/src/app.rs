//! Argument parsing, config layering and the exit-code contract.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use deformed_laguerre::asymptotics::Regime;
use serde_json::json;

use crate::commands::{self, Run, Status};
use crate::config::{parse_exact, RunConfig, Task};
use crate::output::{write_atomic, Sink, MANIFEST_NAME, MANIFEST_SCHEMA_VERSION};

pub const EXIT_OK: u8 = 0;
/// A verification identity or slope check failed.
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
/// A numerical module gave up; whatever was written is kept with a `.partial` suffix.
pub const EXIT_ERROR: u8 = 3;
/// Some slope was inconclusive and `--strict` was given.
pub const EXIT_INCONCLUSIVE: u8 = 4;

pub const OUT_DIR_ENV: &str = "DLAG_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "dlag", version, about = "Recurrence coefficients, identity checks and asymptotics for x^a e^-x (x+t)^l")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write moment, recurrence and auxiliary tables for every t.
    Compute(Common),
    /// Check the finite-n identities and the t-derivative equations.
    Verify(Common),
    /// Compare the large-n or long-time expansions against exact values.
    Asymptotics {
        #[arg(long, default_value = "large-n")]
        regime: String,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the open constants of ln D_n and test them for t-independence.
    FitConstants(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Deformation parameter; repeat for a grid.
    #[arg(long = "t")]
    t: Vec<String>,
    #[arg(long)]
    n_max: Option<usize>,
    /// Decimal digits to certify.
    #[arg(long)]
    digits: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv, json, or both comma-separated.
    #[arg(long, value_delimiter = ',')]
    format: Vec<String>,
    /// Treat inconclusive slopes as failures.
    #[arg(long)]
    strict: bool,
    /// Flat key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra tasks for `compute` (moments, recurrence, aux).
    #[arg(long = "task")]
    task: Vec<String>,
    /// Test hook: multiply moment j by 1 + rel, given as j:rel.
    #[arg(long, hide = true)]
    corrupt_moment: Option<String>,
}

fn layered_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        if !dir.is_empty() {
            cfg.out = PathBuf::from(dir);
        }
    }
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        cfg.apply_text(&text).with_context(|| format!("in config {}", path.display()))?;
    }
    if let Some(a) = &common.alpha {
        cfg.alpha = parse_exact("alpha", a)?;
    }
    if let Some(l) = &common.lambda {
        cfg.lambda = parse_exact("lambda", l)?;
    }
    if !common.t.is_empty() {
        cfg.t_grid = common.t.iter().map(|t| parse_exact("t", t)).collect::<Result<_>>()?;
    }
    if let Some(n) = common.n_max {
        cfg.n_max = n;
    }
    if let Some(d) = common.digits {
        cfg.digits = d;
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    if !common.format.is_empty() {
        cfg.formats = common.format.iter().map(|f| f.parse()).collect::<Result<_>>()?;
    }
    if common.strict {
        cfg.strict = true;
    }
    for task in &common.task {
        cfg.tasks.insert(task.parse()?);
    }
    if let Some(c) = &common.corrupt_moment {
        cfg.apply_text(&format!("corrupt_moment = {c}"))?;
    }
    Ok(cfg)
}

enum Mode {
    Compute,
    Verify,
    Asymptotics(Regime),
    FitConstants,
}

impl Mode {
    fn name(&self) -> &'static str {
        match self {
            Mode::Compute => "compute",
            Mode::Verify => "verify",
            Mode::Asymptotics(_) => "asymptotics",
            Mode::FitConstants => "fit-constants",
        }
    }
}

/// Parse `args` (including the program name), run, and return the process exit code.
pub fn run_from_args<I, S>(args: I) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (mode, common) = match cli.command {
        Command::Compute(c) => (Mode::Compute, c),
        Command::Verify(c) => (Mode::Verify, c),
        Command::Asymptotics { regime, common } => match regime.parse::<Regime>() {
            Ok(r) => (Mode::Asymptotics(r), common),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        },
        Command::FitConstants(c) => (Mode::FitConstants, c),
    };
    let mut cfg = match layered_config(&common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    match &mode {
        Mode::Compute => {
            if cfg.tasks.is_empty() {
                cfg.tasks.extend([Task::Recurrence, Task::Aux]);
            }
        }
        Mode::Verify => {
            cfg.tasks.insert(Task::Verify);
        }
        Mode::Asymptotics(Regime::LargeN) => {
            cfg.tasks.insert(Task::Largen);
        }
        Mode::Asymptotics(Regime::LongTime) => {
            cfg.tasks.insert(Task::Longtime);
        }
        Mode::FitConstants => {
            cfg.tasks.insert(Task::FitConstants);
        }
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e:#}");
        return EXIT_USAGE;
    }
    execute(&mode, &cfg)
}

fn execute(mode: &Mode, cfg: &RunConfig) -> u8 {
    let sink = match Sink::new(&cfg.out) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_ERROR;
        }
    };
    let run = Run::default();
    let start = Instant::now();
    let result = match mode {
        Mode::Compute => commands::compute(cfg, &sink, &run),
        Mode::Verify => commands::verify(cfg, &sink, &run),
        Mode::Asymptotics(r) => commands::asymptotics(cfg, &sink, &run, *r),
        Mode::FitConstants => commands::fit_constants(cfg, &sink, &run),
    };
    let checks = run.sorted_checks();
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    let inconclusive = checks.iter().filter(|c| c.status == Status::Inconclusive).count();
    let (code, status, error, files) = match &result {
        Err(e) => (EXIT_ERROR, "error", Some(format!("{e:#}")), sink.mark_partial()),
        Ok(()) if failed > 0 => (EXIT_CHECK_FAILED, "failed", None, sink.inventory()),
        Ok(()) if inconclusive > 0 && cfg.strict => (EXIT_INCONCLUSIVE, "inconclusive", None, sink.inventory()),
        Ok(()) => (EXIT_OK, "ok", None, sink.inventory()),
    };
    let worst = run.worst_failure();
    let mut timings = run.timings.lock().expect("timings lock").clone();
    timings.sort_by(|a, b| (a.t.as_str(), a.task.as_str()).cmp(&(b.t.as_str(), b.task.as_str())));
    let mut certified = run.certified.lock().expect("certified lock").clone();
    certified.sort_by(|a, b| a.0.cmp(&b.0));
    let manifest = json!({
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "command": mode.name(),
        "status": status,
        "exit_code": code,
        "error": error,
        "config": {
            "text": cfg.emit(),
            "alpha": deformed_laguerre::scalar::format_rational(&cfg.alpha),
            "lambda": deformed_laguerre::scalar::format_rational(&cfg.lambda),
            "t_grid": cfg.t_grid.iter().map(deformed_laguerre::scalar::format_rational).collect::<Vec<_>>(),
            "n_max": cfg.n_max,
            "digits": cfg.digits,
            "tasks": cfg.tasks,
            "formats": cfg.formats,
            "strict": cfg.strict,
        },
        "versions": {
            "dlag": env!("CARGO_PKG_VERSION"),
            "deformed_laguerre": deformed_laguerre::VERSION,
        },
        "wall_ms_total": start.elapsed().as_millis(),
        "timings": timings,
        "certified_digits": certified.iter().map(|(t, d)| json!({"t": t, "digits": d})).collect::<Vec<_>>(),
        "summary": {
            "checks": checks.len(),
            "passed": checks.iter().filter(|c| c.status == Status::Pass).count(),
            "failed": failed,
            "inconclusive": inconclusive,
            "worst_failure": worst.as_ref().map(|w| json!({"name": w.name, "t": w.t, "n": w.worst_n})),
        },
        "checks": checks,
        "files": files,
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    if let Err(e) = write_atomic(&sink.dir().join(MANIFEST_NAME), text.as_bytes()) {
        eprintln!("error: writing manifest: {e:#}");
        return EXIT_ERROR;
    }

    for c in &checks {
        let label = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        };
        println!("{label:<12} {:<24} t={}", c.name, c.t);
    }
    if let Some(e) = error {
        eprintln!("error: {e}");
        eprintln!("partial outputs kept in {}", sink.dir().display());
    } else if let Some(w) = worst {
        let at = w.worst_n.map(|n| format!(" at n={n}")).unwrap_or_default();
        eprintln!("failed: {}{at} (t={})", w.name, w.t);
    }
    code
}
