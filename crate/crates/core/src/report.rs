// SPDX-License-Identifier: Apache-2.0

//! Run reports: structured results of one CLI invocation, rendered either
//! as line-oriented text or as a single JSON document.

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::linalg::{Complex, ComplexMatrix};
use crate::Error;

/// JSON encoding of a real number; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn complex(c: Complex) -> Value {
    Value::Array(vec![num(c.re), num(c.im)])
}

pub fn matrix(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect()))
            .collect(),
    )
}

/// Accumulates the bytes that determined a run.
#[derive(Debug, Clone, Default)]
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn update(&mut self, bytes: &[u8]) {
        // length prefix keeps concatenations unambiguous
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
    }

    pub fn hex(&self) -> String {
        format!("{:x}", self.0.clone().finalize())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        Self {
            kind: e.kind().into(),
            message: e.to_string(),
            exit_code: e.exit_code(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs_sha256: String,
    pub outputs: Map<String, Value>,
    pub diagnostics: Map<String, Value>,
    pub error: Option<ErrorInfo>,
    pub wall_time_ms: Option<f64>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.error.as_ref().map_or(0, |e| e.exit_code)
    }

    pub fn output(&mut self, key: &str, v: Value) {
        self.outputs.insert(key.into(), v);
    }

    pub fn diagnostic(&mut self, key: &str, v: Value) {
        self.diagnostics.insert(key.into(), v);
    }

    pub fn to_json(&self) -> Value {
        let mut top = Map::new();
        top.insert("command".into(), Value::Array(self.command.iter().cloned().map(Value::String).collect()));
        top.insert("diagnostics".into(), Value::Object(self.diagnostics.clone()));
        top.insert(
            "error".into(),
            match &self.error {
                None => Value::Null,
                Some(e) => serde_json::json!({ "exit_code": e.exit_code, "kind": e.kind, "message": e.message }),
            },
        );
        top.insert("exit_code".into(), Value::from(self.exit_code()));
        top.insert("inputs_sha256".into(), Value::String(self.inputs_sha256.clone()));
        top.insert("outputs".into(), Value::Object(self.outputs.clone()));
        if let Some(ms) = self.wall_time_ms {
            top.insert("wall_time_ms".into(), num(ms));
        }
        Value::Object(top)
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("command: {}\n", self.command.join(" ")));
        s.push_str(&format!("inputs_sha256: {}\n", self.inputs_sha256));
        match &self.error {
            None => s.push_str("status: ok (exit 0)\n"),
            Some(e) => s.push_str(&format!("status: error {} (exit {})\nmessage: {}\n", e.kind, e.exit_code, e.message)),
        }
        if !self.outputs.is_empty() {
            s.push_str("[outputs]\n");
            for (k, v) in &self.outputs {
                s.push_str(&format!("{k} = {}\n", compact(v)));
            }
        }
        if !self.diagnostics.is_empty() {
            s.push_str("[diagnostics]\n");
            for (k, v) in &self.diagnostics {
                s.push_str(&format!("{k} = {}\n", compact(v)));
            }
        }
        if let Some(ms) = self.wall_time_ms {
            s.push_str(&format!("wall_time_ms: {ms:.3}\n"));
        }
        s
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
