//! Canonical report encoding.

use serde_json::Value;
use sha2::{Digest, Sha256};

/// Compact JSON with object keys in sorted order.
pub fn canonical(v: &Value) -> String {
    // serde_json's default map is ordered by key.
    serde_json::to_string(v).expect("values serialize")
}

pub fn config_hash(config: &Value) -> String {
    Sha256::digest(canonical(config).as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub struct Outcome {
    pub result: Value,
    pub violations: Vec<String>,
}

impl Outcome {
    pub fn new(result: Value) -> Self {
        Outcome {
            result,
            violations: Vec::new(),
        }
    }

    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.violations.push(what());
        }
    }
}

pub fn render(command: &str, config: &Value, outcome: &Outcome) -> String {
    let mut report = serde_json::json!({
        "command": command,
        "configHash": config_hash(config),
        "version": env!("CARGO_PKG_VERSION"),
        "result": outcome.result,
        "violations": outcome.violations,
    });
    if let Some(seed) = config.get("rngSeed") {
        report["rngSeed"] = seed.clone();
    }
    let mut s = serde_json::to_string_pretty(&report).expect("values serialize");
    s.push('\n');
    s
}
