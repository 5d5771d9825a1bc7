//! Run configuration, report assembly and rendering for the `qsdiff` binary.

use std::fmt::Write as _;
use std::time::Instant;

use qsdiff::deform::Trunc;
use qsdiff::funcfield::ExampleId;
use qsdiff::suites::{self, AlgebraChoice, QMode, Suite, SuiteConfig, Task};
use qsdiff::{Check, Rat, Status};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("xdeg must be at least 2 (got {0})")]
    XDeg(u32),
    #[error("horizon must be at least xdeg (got H={0}, D={1})")]
    Horizon(u32, u32),
    #[error("wdeg must be at least 2 (got {0})")]
    WDeg(u32),
    #[error("nildeg must be at least 2 (got {0})")]
    NilDeg(u32),
    #[error("q-num must not be 0, 1 or -1 (got {0})")]
    QNum(String),
    #[error("cannot parse `{0}` as a rational number")]
    Rational(String),
    #[error("{0}")]
    Value(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QModeSpec {
    Symbolic,
    Numeric { q: String, s: String, lam: String },
}

/// Validated run configuration; the rational values are kept as strings so
/// the configuration serializes verbatim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub example: String,
    pub xdeg: u32,
    pub horizon: u32,
    pub wdeg: u32,
    pub nildeg: u32,
    pub seed: u64,
    pub qmode: QModeSpec,
    pub format: Format,
    pub command: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            example: "all".into(),
            xdeg: 8,
            horizon: 12,
            wdeg: 4,
            nildeg: 4,
            seed: 0,
            qmode: QModeSpec::Symbolic,
            format: Format::Text,
            command: "verify all".into(),
        }
    }
}

fn parse_rat(s: &str) -> Result<Rat, ConfigError> {
    s.trim().parse::<Rat>().map_err(|_| ConfigError::Rational(s.into()))
}

/// A rational point derived from the seed, away from `0, ±1`.
pub fn seeded_point(seed: u64) -> (String, String, String) {
    let j = seed % 7;
    (
        format!("{}/{}", 2 * j + 3, j + 1),
        format!("{}/{}", j + 2, 2 * j + 5),
        format!("{}/{}", j + 1, j + 3),
    )
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.xdeg < 2 {
            return Err(ConfigError::XDeg(self.xdeg));
        }
        if self.horizon < self.xdeg {
            return Err(ConfigError::Horizon(self.horizon, self.xdeg));
        }
        if self.wdeg < 2 {
            return Err(ConfigError::WDeg(self.wdeg));
        }
        if self.nildeg < 2 {
            return Err(ConfigError::NilDeg(self.nildeg));
        }
        self.examples()?;
        if let QModeSpec::Numeric { q, s, lam } = &self.qmode {
            let q0 = parse_rat(q)?;
            parse_rat(s)?;
            parse_rat(lam)?;
            let bad = ["0", "1", "-1"].iter().any(|x| parse_rat(x).ok() == Some(q0.clone()));
            if bad {
                return Err(ConfigError::QNum(q.clone()));
            }
        }
        Ok(())
    }

    pub fn examples(&self) -> Result<Vec<ExampleId>, ConfigError> {
        if self.example == "all" {
            Ok(ExampleId::ALL.to_vec())
        } else {
            Ok(vec![self.example.parse().map_err(ConfigError::Value)?])
        }
    }

    pub fn trunc(&self) -> Trunc {
        Trunc {
            xdeg: self.xdeg,
            horizon: self.horizon,
            wdeg: self.wdeg,
            nildeg: self.nildeg,
        }
    }

    pub fn suite_config(&self) -> Result<SuiteConfig, ConfigError> {
        self.validate()?;
        let qmode = match &self.qmode {
            QModeSpec::Symbolic => QMode::Symbolic,
            QModeSpec::Numeric { q, s, lam } => QMode::Numeric {
                q0: parse_rat(q)?,
                s0: parse_rat(s)?,
                lam0: parse_rat(lam)?,
            },
        };
        Ok(SuiteConfig {
            examples: self.examples()?,
            trunc: self.trunc(),
            seed: self.seed,
            qmode,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Evidence,
}

impl From<Status> for CheckStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Pass => CheckStatus::Pass,
            Status::Fail => CheckStatus::Fail,
            Status::Evidence => CheckStatus::Evidence,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub params: String,
    pub status: CheckStatus,
    pub witness: Option<String>,
    pub elapsed_ms: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub evidence: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub config: RunConfig,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl Report {
    fn new(config: RunConfig, mut checks: Vec<CheckRecord>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.params.cmp(&b.params)));
        let mut summary = Summary::default();
        for c in &checks {
            match c.status {
                CheckStatus::Pass => summary.passed += 1,
                CheckStatus::Fail => summary.failed += 1,
                CheckStatus::Evidence => summary.evidence += 1,
            }
        }
        Report {
            config,
            checks,
            summary,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = match c.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Evidence => "EVID",
            };
            let _ = writeln!(out, "{tag} {} [{}] ({} ms)", c.name, c.params, c.elapsed_ms);
            if let Some(w) = &c.witness {
                let _ = writeln!(out, "     {w}");
            }
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{} checks: {} passed, {} failed, {} evidence",
            self.checks.len(),
            s.passed,
            s.failed,
            s.evidence
        );
        out
    }

    pub fn render(&self) -> String {
        match self.config.format {
            Format::Text => self.to_text(),
            Format::Json => self.to_json(),
        }
    }
}

fn record(c: Check, elapsed_ms: u64) -> CheckRecord {
    CheckRecord {
        name: c.name,
        params: c.params,
        status: c.status.into(),
        witness: c.witness,
        elapsed_ms,
    }
}

/// Runs the tasks in parallel; each check carries the time of its task.
pub fn run_tasks(tasks: &[Task]) -> Vec<CheckRecord> {
    tasks
        .par_iter()
        .flat_map_iter(|t| {
            let start = Instant::now();
            let checks = t.run();
            let ms = start.elapsed().as_millis() as u64;
            checks.into_iter().map(move |c| record(c, ms))
        })
        .collect()
}

pub fn run_verify(cfg: &RunConfig, suite: Suite) -> Result<Report, ConfigError> {
    let sc = cfg.suite_config()?;
    let tasks = suites::tasks(suite, &sc);
    let mut config = cfg.clone();
    config.command = format!("verify {suite}");
    Ok(Report::new(config, run_tasks(&tasks)))
}

pub fn run_classify(cfg: &RunConfig, algebra: AlgebraChoice) -> Result<Report, ConfigError> {
    let sc = cfg.suite_config()?;
    let sets: Vec<_> = sc
        .examples
        .par_iter()
        .flat_map_iter(|ex| {
            let one = SuiteConfig {
                examples: vec![*ex],
                ..sc.clone()
            };
            let start = Instant::now();
            let sets = suites::classify_sets(&one, algebra);
            let ms = start.elapsed().as_millis() as u64;
            sets.into_iter().map(move |s| (s, ms))
        })
        .collect();
    let mut checks = Vec::new();
    for ((label, set), ms) in sets {
        let mut desc = format!("family: {}; expected: {}", set.family, set.expected);
        let _ = write!(desc, "; free: [{}]", set.free.join(", "));
        if !set.constraints.is_empty() {
            let _ = write!(desc, "; constraints: [{}]", set.constraints.join(", "));
        }
        if !set.basis.is_empty() {
            let _ = write!(desc, "; basis: [{}]", set.basis.join("; "));
        }
        checks.push(CheckRecord {
            name: format!("classify.{label}.{}.family", set.algebra),
            params: cfg.trunc().to_string(),
            status: CheckStatus::Pass,
            witness: Some(desc),
            elapsed_ms: ms,
        });
        checks.extend(set.checks.into_iter().map(|c| record(c, ms)));
    }
    let mut config = cfg.clone();
    config.command = format!("classify {algebra}");
    Ok(Report::new(config, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_configs_are_rejected() {
        let base = RunConfig::default();
        assert!(base.validate().is_ok());
        let cases = [
            RunConfig { xdeg: 1, ..base.clone() },
            RunConfig { horizon: 7, ..base.clone() },
            RunConfig { wdeg: 1, ..base.clone() },
            RunConfig { nildeg: 1, ..base.clone() },
            RunConfig { example: "c_x".into(), ..base.clone() },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
        for q in ["1", "-1", "0", "2/2"] {
            let c = RunConfig {
                qmode: QModeSpec::Numeric { q: q.into(), s: "2".into(), lam: "3".into() },
                ..base.clone()
            };
            assert_eq!(c.validate(), Err(ConfigError::QNum(q.into())));
        }
    }

    #[test]
    fn seeded_points_avoid_degenerate_q() {
        for seed in 0..20 {
            let (q, s, lam) = seeded_point(seed);
            let c = RunConfig {
                qmode: QModeSpec::Numeric { q, s, lam },
                ..RunConfig::default()
            };
            assert!(c.validate().is_ok());
        }
    }
}
