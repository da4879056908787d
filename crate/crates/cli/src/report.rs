use std::time::Instant;

use jlab::report::CheckReport;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub verdict: bool,
}

/// Machine-readable outcome of one invocation. Exit status is non-zero iff
/// some verdict in `checks` is false.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs_digest: String,
    pub seed: Option<u64>,
    pub elapsed_ms: f64,
    pub passed: bool,
    pub checks: Vec<CheckLine>,
    pub details: Value,
}

/// sha256 over labelled inputs; each input is hashed as its label, a NUL,
/// its length and its bytes, so concatenations cannot collide.
#[derive(Default, Clone)]
pub struct InputDigest {
    hasher: Sha256,
}

impl InputDigest {
    pub fn add(&mut self, label: &str, bytes: &[u8]) {
        self.hasher.update(label.as_bytes());
        self.hasher.update([0u8]);
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    pub fn finish(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

pub struct ReportBuilder {
    command: Vec<String>,
    digest: InputDigest,
    seed: Option<u64>,
    start: Instant,
    checks: Vec<CheckLine>,
    details: serde_json::Map<String, Value>,
}

impl ReportBuilder {
    pub fn new(command: Vec<String>) -> Self {
        ReportBuilder {
            command,
            digest: InputDigest::default(),
            seed: None,
            start: Instant::now(),
            checks: Vec::new(),
            details: serde_json::Map::new(),
        }
    }

    pub fn input(&mut self, label: &str, bytes: &[u8]) {
        self.digest.add(label, bytes);
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn check(&mut self, name: impl Into<String>, residual: f64, threshold: f64) {
        let c = jlab::report::Check::new(name, residual, threshold);
        self.checks.push(CheckLine {
            name: c.name,
            residual: c.residual,
            threshold: c.threshold,
            verdict: c.passed,
        });
    }

    pub fn checks(&mut self, report: &CheckReport) {
        for c in &report.checks {
            self.checks.push(CheckLine {
                name: c.name.clone(),
                residual: c.residual,
                threshold: c.threshold,
                verdict: c.passed,
            });
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report details serialize");
        self.details.insert(key.to_string(), v);
    }

    pub fn finish(&self) -> RunReport {
        RunReport {
            command: self.command.clone(),
            inputs_digest: self.digest.clone().finish(),
            seed: self.seed,
            elapsed_ms: self.start.elapsed().as_secs_f64() * 1e3,
            passed: self.checks.iter().all(|c| c.verdict),
            checks: self.checks.clone(),
            details: Value::Object(self.details.clone()),
        }
    }
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {:<40} residual {:>10.3e}  threshold {:.1e}",
                    if c.verdict { "PASS" } else { "FAIL" },
                    c.name,
                    c.residual,
                    c.threshold
                )
            })
            .collect()
    }
}
