//! Verification reports: one entry per check with its residual, and a
//! checksum over everything except timing.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The truncation was too coarse to decide.
    Undecided,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// Fail dominates undecided, which dominates pass.
    pub fn combine(statuses: impl IntoIterator<Item = Status>) -> Status {
        statuses.into_iter().fold(Status::Pass, |acc, s| match (acc, s) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Undecided, _) | (_, Status::Undecided) => Status::Undecided,
            _ => Status::Pass,
        })
    }
}

/// The outcome of one named check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    /// Canonical text of the residual; `"0"` when the identity holds.
    pub residual: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

impl CheckResult {
    pub fn new(name: &str, status: Status, residual: impl Into<String>) -> Self {
        CheckResult { name: name.to_string(), status, residual: residual.into(), witness: None, details: serde_json::Value::Null }
    }

    /// A check whose residual is the given text, passing iff it is `"0"`.
    pub fn residual(name: &str, residual: impl Into<String>) -> Self {
        let residual = residual.into();
        CheckResult::new(name, Status::from_bool(residual == "0"), residual)
    }

    /// A boolean check; the residual records a short reason on failure.
    pub fn predicate(name: &str, ok: bool, failure: impl Into<String>) -> Self {
        CheckResult::new(name, Status::from_bool(ok), if ok { "0".to_string() } else { failure.into() })
    }

    pub fn with_witness(mut self, witness: Option<String>) -> Self {
        self.witness = witness;
        self
    }

    pub fn with_details<T: Serialize>(mut self, details: &T) -> Self {
        self.details = serde_json::to_value(details).unwrap_or(serde_json::Value::Null);
        self
    }
}

/// The deterministic part of a report.
#[derive(Clone, Debug, Serialize)]
pub struct ReportBody {
    pub scenario: serde_json::Value,
    pub status: Status,
    pub checks: Vec<CheckResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    #[serde(flatten)]
    pub body: ReportBody,
    /// Hex SHA-256 of the canonical JSON of the body.
    pub checksum: String,
    pub duration_ms: u64,
}

impl Report {
    pub fn new(scenario: serde_json::Value, checks: Vec<CheckResult>, duration_ms: u64) -> Self {
        let status = Status::combine(checks.iter().map(|c| c.status));
        let body = ReportBody { scenario, status, checks };
        let checksum = checksum(&body);
        Report { body, checksum, duration_ms }
    }

    pub fn status(&self) -> Status {
        self.body.status
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.body.checks.iter().find(|c| c.name == name)
    }
}

/// SHA-256 of the compact JSON serialization.
pub fn checksum<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("report bodies serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_combination() {
        assert_eq!(Status::combine([]), Status::Pass);
        assert_eq!(Status::combine([Status::Pass, Status::Undecided]), Status::Undecided);
        assert_eq!(Status::combine([Status::Undecided, Status::Fail, Status::Pass]), Status::Fail);
    }

    #[test]
    fn checksum_ignores_duration() {
        let checks = vec![CheckResult::residual("a", "0"), CheckResult::predicate("b", false, "x")];
        let a = Report::new(serde_json::json!({"name": "t"}), checks.clone(), 3);
        let b = Report::new(serde_json::json!({"name": "t"}), checks, 900);
        assert_eq!(a.checksum, b.checksum);
        assert_eq!(a.status(), Status::Fail);
        assert_eq!(a.checksum.len(), 64);
    }
}
