//! Machine-readable outcomes of verification runs.
//!
//! Every checker produces a [`LemmaReport`]: the check's identifier, the
//! parameter grid it ran over, how many instances it evaluated, and the
//! violations it found (expected to be none). Reports serialize to a stable
//! JSON shape so runs can be archived byte for byte; wall time is kept on
//! the struct for logging but never serialized.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One failing instance: the inputs plus both sides of the violated claim.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub instance: Value,
    pub lhs: Value,
    pub rhs: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub grid: Value,
    pub instances: u64,
    pub violations: Vec<Violation>,
    pub status: String,
    pub seed: u64,
    #[serde(skip)]
    pub wall: Duration,
}

impl LemmaReport {
    pub fn new(lemma: &str, grid: Value, seed: u64) -> ReportBuilder {
        ReportBuilder {
            lemma: lemma.to_string(),
            grid,
            seed,
            instances: 0,
            violations: Vec::new(),
            started: std::time::Instant::now(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

/// Incremental collector for a single verification run.
pub struct ReportBuilder {
    lemma: String,
    grid: Value,
    seed: u64,
    instances: u64,
    violations: Vec<Violation>,
    started: std::time::Instant,
}

impl ReportBuilder {
    /// Records one evaluated instance; `ok == false` files a violation.
    pub fn record(&mut self, ok: bool, instance: Value, lhs: Value, rhs: Value) {
        self.instances += 1;
        if !ok {
            self.violations.push(Violation { instance, lhs, rhs });
        }
    }

    pub fn record_pass(&mut self) {
        self.instances += 1;
    }

    pub fn finish(self) -> LemmaReport {
        // Deterministic violation order regardless of evaluation sharding.
        let mut violations = self.violations;
        violations.sort_by(|a, b| a.instance.to_string().cmp(&b.instance.to_string()));
        let status = if violations.is_empty() { "pass" } else { "fail" };
        LemmaReport {
            lemma: self.lemma,
            grid: self.grid,
            instances: self.instances,
            violations,
            status: status.to_string(),
            seed: self.seed,
            wall: self.started.elapsed(),
        }
    }
}

/// Merges reports into one summary object keyed by lemma id, with an
/// overall status.
pub fn merge_reports(reports: &[LemmaReport]) -> Value {
    let mut by_id: serde_json::Map<String, Value> = serde_json::Map::new();
    for r in reports {
        let entry = by_id
            .entry(r.lemma.clone())
            .or_insert_with(|| Value::Array(Vec::new()));
        entry
            .as_array_mut()
            .expect("entries are arrays")
            .push(serde_json::to_value(r).expect("report serializes"));
    }
    let status = if reports.iter().all(|r| r.passed()) { "pass" } else { "fail" };
    serde_json::json!({ "lemmas": Value::Object(by_id), "status": status })
}
