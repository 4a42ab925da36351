//! Machine-readable run reports.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Everything but `timings_ms` is a function of the inputs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    pub checks: Vec<Check>,
    pub result: Value,
    pub verdict: Verdict,
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn new(command: impl Into<String>, inputs_digest: String) -> Self {
        RunReport {
            command: command.into(),
            inputs_digest,
            checks: Vec::new(),
            result: Value::Null,
            verdict: Verdict::Pass,
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> bool {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
        if !passed {
            self.verdict = Verdict::Fail;
        }
        passed
    }

    /// Records a check from a result, keeping the error text as its detail.
    pub fn check_result<T, E: std::fmt::Display>(&mut self, name: &str, ok_detail: impl FnOnce(&T) -> String, r: Result<T, E>) -> Option<T> {
        match r {
            Ok(v) => {
                let detail = ok_detail(&v);
                self.check(name, true, detail);
                Some(v)
            }
            Err(e) => {
                self.check(name, false, e.to_string());
                None
            }
        }
    }

    /// Runs `f` and records its wall time under `label`.
    pub fn timed<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.timings_ms.entry(label.to_string()).or_default() += start.elapsed().as_secs_f64() * 1e3;
        out
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// One line per check plus the verdict.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            out.push_str(&format!("{mark} {}: {}\n", c.name, c.detail));
        }
        out.push_str(&format!("{}: {:?}\n", self.command, self.verdict).to_lowercase());
        out
    }
}

/// SHA-256 over labelled, length-prefixed input fields.
#[derive(Clone, Default)]
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new(command: &str) -> Self {
        InputDigest::default().field("command", command.as_bytes())
    }

    pub fn field(mut self, label: &str, bytes: &[u8]) -> Self {
        for part in [label.as_bytes(), bytes] {
            self.0.update((part.len() as u64).to_le_bytes());
            self.0.update(part);
        }
        self
    }

    pub fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}
