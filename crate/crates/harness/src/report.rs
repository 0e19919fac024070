use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub expected: f64,
    /// Tolerance, bound or sample count, as declared.
    pub tolerance: f64,
    /// How `measured`, `expected` and `tolerance` combine into the verdict.
    pub relation: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    pub claims: String,
    pub passed: bool,
    pub diverged: Option<String>,
    pub checks: Vec<CheckResult>,
    pub samples: usize,
    pub timing_seconds: f64,
    pub seed: u64,
    pub threads: usize,
    pub config_hash: String,
    pub code_version: String,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.diverged.is_some() {
            3
        } else if self.passed {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: {} ({} checks, {:.2} s)\n",
            self.scenario,
            if self.passed { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.timing_seconds
        );
        if let Some(d) = &self.diverged {
            s.push_str(&format!("  diverged: {d}\n"));
        }
        for c in &self.checks {
            s.push_str(&format!(
                "  [{}] {:<30} measured={:.6e} expected={:.6e} tol={:.3e} ({})\n",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.measured,
                c.expected,
                c.tolerance,
                c.relation
            ));
            if !c.passed && !c.detail.is_empty() {
                s.push_str(&format!("         {}\n", c.detail));
            }
        }
        s
    }
}

/// SHA-256 of the canonical configuration text, hex encoded.
pub fn config_hash(cfg: &Config) -> String {
    let digest = Sha256::digest(cfg.canonical_text().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn code_version() -> String {
    format!("surfns {}", env!("CARGO_PKG_VERSION"))
}
