//! Run configuration: flat `key = value` files, repeated keys for lists, overridden by flags.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use deformed_laguerre::scalar::{format_rational, parse_rational};
use deformed_laguerre::{Exact, WeightParams};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Moments,
    Recurrence,
    Aux,
    Verify,
    Largen,
    Longtime,
    FitConstants,
}

impl Task {
    pub const ALL: [Task; 7] = [
        Task::Moments,
        Task::Recurrence,
        Task::Aux,
        Task::Verify,
        Task::Largen,
        Task::Longtime,
        Task::FitConstants,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Task::Moments => "moments",
            Task::Recurrence => "recurrence",
            Task::Aux => "aux",
            Task::Verify => "verify",
            Task::Largen => "largen",
            Task::Longtime => "longtime",
            Task::FitConstants => "fit-constants",
        }
    }

    fn requires(self) -> &'static [Task] {
        match self {
            Task::Moments => &[],
            Task::Recurrence => &[Task::Moments],
            Task::Aux | Task::Largen | Task::Longtime | Task::FitConstants => &[Task::Recurrence],
            Task::Verify => &[Task::Recurrence, Task::Aux],
        }
    }
}

impl FromStr for Task {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().replace('_', "-");
        Task::ALL
            .into_iter()
            .find(|t| t.id() == s)
            .ok_or_else(|| anyhow!("unknown task {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => bail!("unknown format {other:?}"),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Multiply `μ_j` by `1 + rel` before anything else runs.
#[derive(Clone, Debug, PartialEq)]
pub struct Corruption {
    pub j: usize,
    pub rel: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub alpha: Exact,
    pub lambda: Exact,
    pub t_grid: Vec<Exact>,
    pub n_max: usize,
    pub digits: u32,
    pub tasks: BTreeSet<Task>,
    pub out: PathBuf,
    pub formats: BTreeSet<Format>,
    pub strict: bool,
    pub corrupt_moment: Option<Corruption>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: Exact::from_integer(0.into()),
            lambda: Exact::from_integer(1.into()),
            t_grid: Vec::new(),
            n_max: 8,
            digits: 50,
            tasks: BTreeSet::new(),
            out: PathBuf::from("dlag-out"),
            formats: [Format::Csv, Format::Json].into_iter().collect(),
            strict: false,
            corrupt_moment: None,
        }
    }
}

pub fn parse_exact(key: &str, v: &str) -> Result<Exact> {
    parse_rational(v).ok_or_else(|| anyhow!("{key}: cannot read {v:?} as an exact decimal or p/q"))
}

impl RunConfig {
    /// Parse a config file's contents on top of `self`. List keys replace rather than extend earlier values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut seen_lists: BTreeSet<&str> = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value, got {raw:?}", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let ctx = || format!("line {}", lineno + 1);
            match key {
                "alpha" => self.alpha = parse_exact(key, value).with_context(ctx)?,
                "lambda" => self.lambda = parse_exact(key, value).with_context(ctx)?,
                "t" => {
                    if seen_lists.insert("t") {
                        self.t_grid.clear();
                    }
                    self.t_grid.push(parse_exact(key, value).with_context(ctx)?);
                }
                "n_max" => self.n_max = value.parse().with_context(ctx)?,
                "digits" => self.digits = value.parse().with_context(ctx)?,
                "task" => {
                    if seen_lists.insert("task") {
                        self.tasks.clear();
                    }
                    self.tasks.insert(value.parse().with_context(ctx)?);
                }
                "format" => {
                    if seen_lists.insert("format") {
                        self.formats.clear();
                    }
                    self.formats.insert(value.parse().with_context(ctx)?);
                }
                "out" => self.out = PathBuf::from(value),
                "strict" => self.strict = value.parse().with_context(ctx)?,
                "corrupt_moment" => self.corrupt_moment = Some(parse_corruption(value).with_context(ctx)?),
                other => bail!("line {}: unknown key {other:?}", lineno + 1),
            }
        }
        Ok(())
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// Canonical text form; `parse_text(emit())` gives back `self`.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("alpha = {}\n", format_rational(&self.alpha)));
        out.push_str(&format!("lambda = {}\n", format_rational(&self.lambda)));
        for t in &self.t_grid {
            out.push_str(&format!("t = {}\n", format_rational(t)));
        }
        out.push_str(&format!("n_max = {}\n", self.n_max));
        out.push_str(&format!("digits = {}\n", self.digits));
        for task in &self.tasks {
            out.push_str(&format!("task = {}\n", task.id()));
        }
        for f in &self.formats {
            out.push_str(&format!("format = {f}\n"));
        }
        out.push_str(&format!("out = {}\n", self.out.display()));
        out.push_str(&format!("strict = {}\n", self.strict));
        if let Some(c) = &self.corrupt_moment {
            out.push_str(&format!("corrupt_moment = {}:{}\n", c.j, c.rel));
        }
        out
    }

    /// Add the tasks every requested task depends on.
    pub fn close_tasks(&mut self) {
        loop {
            let extra: Vec<Task> = self
                .tasks
                .iter()
                .flat_map(|t| t.requires().iter().copied())
                .filter(|t| !self.tasks.contains(t))
                .collect();
            if extra.is_empty() {
                break;
            }
            self.tasks.extend(extra);
        }
    }

    /// Check the invariants and normalise: sorted `t` grid, closed task set.
    pub fn validate(&mut self) -> Result<()> {
        if self.t_grid.is_empty() {
            bail!("t grid is empty: pass --t at least once");
        }
        if self.t_grid.iter().any(|t| *t <= Exact::from_integer(0.into())) {
            bail!("every t must be positive");
        }
        self.t_grid.sort();
        self.t_grid.dedup();
        if self.n_max == 0 {
            bail!("n_max must be at least 1");
        }
        if self.digits == 0 {
            bail!("digits must be positive");
        }
        if self.formats.is_empty() {
            bail!("no output format selected");
        }
        self.close_tasks();
        for t in &self.t_grid {
            self.params_at(t)?;
        }
        Ok(())
    }

    pub fn params_at(&self, t: &Exact) -> Result<WeightParams> {
        WeightParams::new(self.alpha.clone(), self.lambda.clone(), t.clone()).map_err(|e| anyhow!(e))
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

fn parse_corruption(v: &str) -> Result<Corruption> {
    let (j, rel) = v
        .split_once(':')
        .ok_or_else(|| anyhow!("corrupt_moment: expected j:rel, got {v:?}"))?;
    let rel = rel.trim();
    parse_rational(rel).ok_or_else(|| anyhow!("corrupt_moment: bad relative size {rel:?}"))?;
    Ok(Corruption {
        j: j.trim().parse()?,
        rel: rel.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_repeat_and_comments_are_ignored() {
        let c = RunConfig::parse_text("alpha = 1/2 # half\nt = 2\nt=0.5\ntask = verify\n").unwrap();
        assert_eq!(c.t_grid.len(), 2);
        assert_eq!(format_rational(&c.alpha), "0.5");
        let mut c = c;
        c.validate().unwrap();
        assert_eq!(format_rational(&c.t_grid[0]), "0.5");
        assert!(c.tasks.contains(&Task::Aux) && c.tasks.contains(&Task::Moments));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse_text("colour = red").is_err());
        assert!(RunConfig::parse_text("alpha").is_err());
        assert!(RunConfig::parse_text("task = everything").is_err());
        let mut c = RunConfig::parse_text("t = -1").unwrap();
        assert!(c.validate().is_err());
        let mut c = RunConfig::parse_text("alpha = -1\nt = 1").unwrap();
        assert!(c.validate().is_err());
    }
}
