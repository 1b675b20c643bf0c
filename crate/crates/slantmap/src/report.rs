//! Check records and the serialized run report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::kenmotsu::StructureReport;
use crate::Real;

pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of one inequality `lhs ≤ rhs` with `slack = rhs − lhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport<T> {
    pub name: String,
    pub lhs: T,
    pub rhs: T,
    pub slack: T,
    pub tolerance: T,
    pub holds: bool,
    /// Informational reports are recorded but never counted as failures.
    #[serde(default)]
    pub informational: bool,
    /// Residuals of the equality-case conditions and related diagnostics.
    #[serde(default)]
    pub equality_diag: BTreeMap<String, T>,
}

impl<T: Real> InequalityReport<T> {
    pub fn new(name: impl Into<String>, lhs: T, rhs: T, tolerance: T) -> Self {
        let slack = rhs - lhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack,
            tolerance,
            holds: slack >= -tolerance,
            informational: false,
            equality_diag: BTreeMap::new(),
        }
    }

    pub fn with_diag(mut self, key: &str, value: T) -> Self {
        self.equality_diag.insert(key.to_owned(), value);
        self
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    pub fn diag(&self, key: &str) -> Option<T> {
        self.equality_diag.get(key).copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Inequality,
    Identity,
    Angle,
    Structure,
}

/// One pass/fail verdict in a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub subject: String,
    pub check: String,
    pub kind: CheckKind,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
}

impl CheckRecord {
    pub fn new(
        subject: impl Into<String>,
        check: impl Into<String>,
        kind: CheckKind,
        passed: bool,
    ) -> Self {
        Self {
            subject: subject.into(),
            check: check.into(),
            kind,
            passed,
            metrics: BTreeMap::new(),
        }
    }

    /// Non-finite values cannot be written as JSON numbers and are dropped.
    pub fn metric(mut self, key: &str, value: f64) -> Self {
        if value.is_finite() {
            self.metrics.insert(key.to_owned(), value);
        }
        self
    }

    pub fn from_inequality<T: Real>(subject: impl Into<String>, r: &InequalityReport<T>) -> Self {
        let mut rec = Self::new(subject, r.name.clone(), CheckKind::Inequality, r.holds)
            .metric("lhs", r.lhs.as_f64())
            .metric("rhs", r.rhs.as_f64())
            .metric("slack", r.slack.as_f64())
            .metric("tolerance", r.tolerance.as_f64());
        for (k, v) in &r.equality_diag {
            rec = rec.metric(&format!("diag.{k}"), v.as_f64());
        }
        rec
    }

    /// A residual check: passes when `residual ≤ tolerance`.
    pub fn residual(
        subject: impl Into<String>,
        check: impl Into<String>,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        Self::new(
            subject,
            check,
            CheckKind::Identity,
            residual.is_finite() && residual <= tolerance,
        )
        .metric("residual", residual)
        .metric("tolerance", tolerance)
    }

    /// An angle regression: passes when `|measured − expected| ≤ tolerance`.
    pub fn angle(
        subject: impl Into<String>,
        check: impl Into<String>,
        measured: f64,
        expected: f64,
        tol: f64,
    ) -> Self {
        let err = (measured - expected).abs();
        Self::new(subject, check, CheckKind::Angle, err <= tol)
            .metric("measured", measured)
            .metric("expected", expected)
            .metric("error", err)
            .metric("tolerance", tol)
    }

    pub fn structure<T: Real>(subject: &str, prefix: &str, r: &StructureReport<T>) -> Vec<Self> {
        r.identities
            .iter()
            .map(|id| {
                Self::residual(
                    subject,
                    format!("{prefix}.{}", id.name),
                    id.residual.as_f64(),
                    id.tolerance.as_f64(),
                )
            })
            .collect()
    }
}

/// A record that is reported but carries no verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub subject: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Observation {
    pub fn new(subject: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            name: name.into(),
            values: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn value(mut self, key: &str, value: f64) -> Self {
        if value.is_finite() {
            self.values.insert(key.to_owned(), value);
        }
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// A violated inequality found by a randomized sweep, with what is needed to
/// regenerate the instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub check: String,
    pub seed: u64,
    pub index: u64,
    pub slack: f64,
    pub instance: serde_json::Value,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub findings: usize,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fixtures: Vec<String>,
    pub tolerances: crate::Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub checks: Vec<CheckRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observations: Vec<Observation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub findings: Vec<Finding>,
    pub summary: Summary,
}

impl Default for RunReport {
    fn default() -> Self {
        Self::new()
    }
}

impl RunReport {
    pub fn new() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            provenance: None,
            checks: Vec::new(),
            observations: Vec::new(),
            findings: Vec::new(),
            summary: Summary::default(),
        }
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = Some(p);
        self
    }

    pub fn push(&mut self, rec: CheckRecord) {
        if rec.passed {
            self.summary.pass += 1;
        } else {
            self.summary.fail += 1;
        }
        self.checks.push(rec);
    }

    pub fn extend(&mut self, recs: impl IntoIterator<Item = CheckRecord>) {
        for r in recs {
            self.push(r);
        }
    }

    pub fn observe(&mut self, obs: Observation) {
        self.observations.push(obs);
    }

    pub fn add_finding(&mut self, f: Finding) {
        self.summary.findings += 1;
        self.findings.push(f);
    }

    /// Folds another report's records into this one; provenance is kept.
    pub fn merge(&mut self, other: RunReport) {
        self.extend(other.checks);
        self.observations.extend(other.observations);
        for f in other.findings {
            self.add_finding(f);
        }
    }

    /// True when every check passed and no sweep produced a finding.
    pub fn is_clean(&self) -> bool {
        self.summary.fail == 0 && self.summary.findings == 0
    }

    /// Whether the summary agrees with the record lists.
    pub fn tallies_consistent(&self) -> bool {
        let pass = self.checks.iter().filter(|c| c.passed).count();
        pass == self.summary.pass
            && self.checks.len() - pass == self.summary.fail
            && self.findings.len() == self.summary.findings
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Self::Text),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format '{other}' (expected text or json)")),
        }
    }
}

pub fn emit(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => emit_json(report),
        Format::Text => emit_text(report),
    }
}

pub fn emit_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report values are finite");
    s.push('\n');
    s
}

pub fn parse_json(s: &str) -> Result<RunReport, serde_json::Error> {
    serde_json::from_str(s)
}

/// One line per record; metrics in key order.
pub fn emit_text(report: &RunReport) -> String {
    let mut out = String::new();
    if let Some(p) = &report.provenance {
        let _ = writeln!(
            out,
            "# {} seed={} schema_version={}",
            p.command, p.seed, report.schema_version
        );
    }
    for c in &report.checks {
        let _ = write!(
            out,
            "{} {} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.subject,
            c.check
        );
        for (k, v) in &c.metrics {
            let _ = write!(out, " {k}={v:e}");
        }
        out.push('\n');
    }
    for o in &report.observations {
        let _ = write!(out, "OBS {} {}", o.subject, o.name);
        for (k, v) in &o.values {
            let _ = write!(out, " {k}={v:e}");
        }
        for n in &o.notes {
            let _ = write!(out, " | {n}");
        }
        out.push('\n');
    }
    for f in &report.findings {
        let _ = writeln!(
            out,
            "FINDING {} seed={} index={} slack={:e}",
            f.check, f.seed, f.index, f.slack
        );
    }
    let _ = writeln!(
        out,
        "summary pass={} fail={} findings={}",
        report.summary.pass, report.summary.fail, report.summary.findings
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_json() {
        let s = serde_json::to_string(&RunReport::new()).unwrap();
        assert_eq!(
            s,
            r#"{"schema_version":1,"checks":[],"summary":{"pass":0,"fail":0}}"#
        );
    }

    #[test]
    fn one_pass_counts() {
        let mut r = RunReport::new();
        r.push(CheckRecord::residual("x", "id", 0.0, 1e-9));
        assert_eq!(r.summary.pass, 1);
        assert_eq!(r.summary.fail, 0);
        assert!(r.tallies_consistent());
    }

    #[test]
    fn json_round_trip() {
        let mut r = RunReport::new();
        r.push(CheckRecord::angle("fx", "theta", 0.1 + 0.2, 0.3, 1e-9));
        r.push(CheckRecord::residual("fx", "bad", f64::NAN, 1e-9));
        r.observe(
            Observation::new("fx", "note")
                .value("v", 1.0 / 3.0)
                .note("text"),
        );
        let back = parse_json(&emit_json(&r)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn holds_matches_slack() {
        let r = InequalityReport::new("t", 1.0, 1.0 - 2e-9, 1e-9);
        assert!(!r.holds);
        let r = InequalityReport::new("t", 1.0, 1.0 - 5e-10, 1e-9);
        assert!(r.holds);
    }
}
