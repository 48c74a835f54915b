//! Validation report plumbing shared by the validators.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
    /// Residual witnessing a failure, rendered in the polynomial grammar;
    /// "0" for passing checks.
    pub residual: String,
    /// Total degree up to which the comparison was performed. Exact checks
    /// report the full truncation order.
    pub order: i64,
}

impl CheckEntry {
    pub fn pass(name: impl Into<String>, order: i64) -> Self {
        CheckEntry {
            name: name.into(),
            pass: true,
            residual: "0".into(),
            order,
        }
    }

    pub fn fail(name: impl Into<String>, residual: String, order: i64) -> Self {
        CheckEntry {
            name: name.into(),
            pass: false,
            residual,
            order,
        }
    }

    pub fn of(name: impl Into<String>, pass: bool, residual: String, order: i64) -> Self {
        CheckEntry {
            name: name.into(),
            pass,
            residual: if pass { "0".into() } else { residual },
            order,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct ValidationReport {
    pub entries: Vec<CheckEntry>,
}

impl ValidationReport {
    pub fn new() -> Self {
        ValidationReport::default()
    }

    pub fn push(&mut self, e: CheckEntry) {
        self.entries.push(e);
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| !e.pass)
    }

    pub fn merged(mut self, other: ValidationReport) -> ValidationReport {
        self.entries.extend(other.entries);
        self
    }
}
