//! Machine- and human-readable command results.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use orthomeasure::CMat;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;
use crate::format::JsonMatrix;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub reason: String,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub command: String,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub wall_clock_ms: f64,
    #[serde(default)]
    pub verdicts: BTreeMap<String, Value>,
    /// Non-finite residuals serialize as `null`.
    #[serde(default)]
    pub residuals: BTreeMap<String, Option<f64>>,
    #[serde(default)]
    pub dimensions: BTreeMap<String, Value>,
    #[serde(default)]
    pub witnesses: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

impl Certificate {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            tool_version: TOOL_VERSION.into(),
            seed: None,
            wall_clock_ms: 0.0,
            verdicts: BTreeMap::new(),
            residuals: BTreeMap::new(),
            dimensions: BTreeMap::new(),
            witnesses: BTreeMap::new(),
            error: None,
        }
    }

    pub fn failed(command: impl Into<String>, err: &CliError) -> Self {
        let mut cert = Self::new(command);
        cert.error = Some(ErrorInfo {
            kind: err.kind().into(),
            reason: err.reason(),
            message: err.to_string(),
            exit_code: err.exit_code(),
        });
        cert
    }

    pub fn verdict(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.verdicts.insert(key.into(), v.into());
        self
    }

    pub fn residual(&mut self, key: &str, x: f64) -> &mut Self {
        self.residuals.insert(key.into(), x.is_finite().then_some(x));
        self
    }

    pub fn dim(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.dimensions.insert(key.into(), v.into());
        self
    }

    pub fn witness(&mut self, key: &str, m: &CMat) -> &mut Self {
        self.witnesses.insert(key.into(), serde_json::to_value(JsonMatrix::from(m)).expect("finite matrix"));
        self
    }

    pub fn witness_list(&mut self, key: &str, ms: &[CMat]) -> &mut Self {
        let list: Vec<JsonMatrix> = ms.iter().map(JsonMatrix::from).collect();
        self.witnesses.insert(key.into(), serde_json::to_value(list).expect("finite matrices"));
        self
    }

    /// A witness matrix read back from the certificate.
    pub fn witness_matrix(&self, key: &str) -> Option<CMat> {
        let m: JsonMatrix = serde_json::from_value(self.witnesses.get(key)?.clone()).ok()?;
        m.to_cmat().ok()
    }

    pub fn witness_matrices(&self, key: &str) -> Option<Vec<CMat>> {
        let list: Vec<JsonMatrix> = serde_json::from_value(self.witnesses.get(key)?.clone()).ok()?;
        list.iter().map(|m| m.to_cmat().ok()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k:>28}: {v}");
        };
        line("command", self.command.clone());
        line("tool_version", self.tool_version.clone());
        if let Some(seed) = self.seed {
            line("seed", seed.to_string());
        }
        line("wall_clock_ms", format!("{:.3}", self.wall_clock_ms));
        if let Some(e) = &self.error {
            line("error", format!("{} ({}, exit {})", e.reason, e.kind, e.exit_code));
            line("message", e.message.clone());
        }
        for (k, v) in &self.verdicts {
            line(k, compact(v));
        }
        for (k, v) in &self.dimensions {
            line(k, compact(v));
        }
        for (k, v) in &self.residuals {
            line(k, v.map_or("non-finite".into(), |x| format!("{x:.6e}")));
        }
        if !self.witnesses.is_empty() {
            let names: Vec<&str> = self.witnesses.keys().map(String::as_str).collect();
            line("witnesses", format!("{} (use --output json)", names.join(", ")));
        }
        out
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
