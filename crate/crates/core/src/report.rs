//! Structured reports: named checks with measured values, a summary, and
//! command-specific data, serialized deterministically as JSON.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Recorded without a pass/fail judgement.
    Reported,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Reported => "INFO",
        }
    }
}

/// How the measured value is compared with the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    AtMost,
    AtLeast,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub inputs: Value,
    pub measured: f64,
    pub tolerance: Option<f64>,
    pub comparison: Comparison,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `measured ≤ tolerance`; NaN fails.
    pub fn at_most(name: impl Into<String>, inputs: Value, measured: f64, tolerance: f64) -> Self {
        let ok = measured <= tolerance;
        Self::judged(name, inputs, measured, tolerance, Comparison::AtMost, ok)
    }

    /// Passes when `measured ≥ tolerance`; NaN fails.
    pub fn at_least(name: impl Into<String>, inputs: Value, measured: f64, bound: f64) -> Self {
        let ok = measured >= bound;
        Self::judged(name, inputs, measured, bound, Comparison::AtLeast, ok)
    }

    /// An exact identity: measured is `0` when it holds and `1` otherwise.
    pub fn exact(name: impl Into<String>, inputs: Value, holds: bool) -> Self {
        Self {
            name: name.into(),
            inputs,
            measured: if holds { 0.0 } else { 1.0 },
            tolerance: Some(0.0),
            comparison: Comparison::AtMost,
            status: if holds { Status::Pass } else { Status::Fail },
            note: None,
        }
    }

    pub fn reported(name: impl Into<String>, inputs: Value, measured: f64) -> Self {
        Self {
            name: name.into(),
            inputs,
            measured,
            tolerance: None,
            comparison: Comparison::None,
            status: Status::Reported,
            note: None,
        }
    }

    fn judged(name: impl Into<String>, inputs: Value, measured: f64, tol: f64, comparison: Comparison, ok: bool) -> Self {
        Self {
            name: name.into(),
            inputs,
            measured,
            tolerance: Some(tol),
            comparison,
            status: if ok { Status::Pass } else { Status::Fail },
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub reported: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub summary: Summary,
    pub data: Value,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, checks: Vec<Check>, data: Value) -> Self {
        let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
        let summary = Summary {
            passed: count(Status::Pass),
            failed: count(Status::Fail),
            reported: count(Status::Reported),
        };
        Self {
            tool: "crlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: config.clone(),
            checks,
            summary,
            data,
        }
    }

    pub fn any_failed(&self) -> bool {
        self.summary.failed > 0
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// One line per check followed by the totals.
    pub fn console_summary(&self) -> String {
        let mut out = format!("crlab {} {}\n", self.version, self.command);
        for c in &self.checks {
            let bound = match (c.comparison, c.tolerance) {
                (Comparison::AtMost, Some(t)) => format!(" (<= {t:e})"),
                (Comparison::AtLeast, Some(t)) => format!(" (>= {t})"),
                _ => String::new(),
            };
            let _ = write!(out, "  {} {}: {:e}{bound}", c.status.label(), c.name, c.measured);
            if let Some(n) = &c.note {
                let _ = write!(out, " [{n}]");
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "{} passed, {} failed, {} reported",
            self.summary.passed, self.summary.failed, self.summary.reported
        );
        out
    }
}

/// Builds CSV text from a header and rows of numbers.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(header);
    for row in rows {
        let _ = w.write_record(row.iter().map(|v| v.to_string()));
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("CSV is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn checks_judge_their_values() {
        assert_eq!(Check::at_most("a", json!({}), 1e-13, 1e-12).status, Status::Pass);
        assert_eq!(Check::at_most("a", json!({}), f64::NAN, 1e-12).status, Status::Fail);
        assert_eq!(Check::at_least("a", json!({}), 3.9, 3.5).status, Status::Pass);
        assert_eq!(Check::exact("a", json!({}), false).status, Status::Fail);
    }

    #[test]
    fn summary_counts_and_json_is_stable() {
        let checks = vec![
            Check::at_most("a", json!({"n": 1}), 0.5, 1.0),
            Check::at_most("b", json!({}), 2.0, 1.0),
            Check::reported("c", json!({}), 0.25),
        ];
        let r = Report::new("verify-frame", &RunConfig::default(), checks, json!({"x": [1.5, 2.0]}));
        assert_eq!(r.summary, Summary { passed: 1, failed: 1, reported: 1 });
        assert!(r.any_failed());
        assert_eq!(r.to_json(), r.clone().to_json());
        assert!(r.console_summary().contains("FAIL b"));
    }

    #[test]
    fn csv_rows() {
        let t = csv_table(&["s", "sup_mu"], vec![vec![0.5, 0.25], vec![-1.0, 2.0]]);
        assert_eq!(t, "s,sup_mu\n0.5,0.25\n-1,2\n");
    }
}
