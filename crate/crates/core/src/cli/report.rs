use serde_json::{json, Map, Value};

use crate::expr::Verdict;

/// Ordered key/value report with a plain-text and a JSON rendering. Both
/// renderings depend only on the inserted data, so identical runs print
/// identical bytes.
#[derive(Debug, Clone)]
pub struct Report {
    entries: Vec<(String, Value)>,
    pub exit_code: i32,
}

impl Report {
    pub fn new(command: &str, input: Option<(&str, &[u8])>, seed: u64) -> Self {
        let mut r = Report {
            entries: Vec::new(),
            exit_code: 0,
        };
        r.text("command", command);
        if let Some((path, bytes)) = input {
            r.text("input", path);
            r.text("input_sha256", &super::digest(bytes));
        }
        r.put("seed", json!(seed));
        r
    }

    pub fn put(&mut self, key: &str, value: Value) {
        self.entries.push((key.to_string(), value));
    }

    pub fn text(&mut self, key: &str, value: &str) {
        self.put(key, Value::String(value.to_string()));
    }

    pub fn verdict(&mut self, key: &str, v: &Verdict) {
        self.put(key, verdict_json(v));
    }

    pub fn fail(&mut self, code: i32, message: &str) {
        self.exit_code = self.exit_code.max(code);
        self.text("failure", message);
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn status(&self) -> &'static str {
        match self.exit_code {
            0 => "ok",
            1 => "failed",
            _ => "error",
        }
    }

    pub fn to_json(&self) -> String {
        let mut m = Map::new();
        for (k, v) in &self.entries {
            m.insert(k.clone(), v.clone());
        }
        m.insert("status".into(), json!(self.status()));
        m.insert("exit_code".into(), json!(self.exit_code));
        let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut rows: Vec<(String, String)> = Vec::new();
        for (k, v) in &self.entries {
            flatten(k, v, &mut rows);
        }
        rows.push(("status".into(), self.status().into()));
        let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let pad = width - k.chars().count();
            out.push_str(&k);
            out.push_str(&" ".repeat(pad + 2));
            out.push_str(&v);
            out.push('\n');
        }
        out
    }
}

fn flatten(key: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) if m.contains_key("kind") => rows.push((key.into(), verdict_text(m))),
        Value::Object(m) => {
            for (k, inner) in m {
                flatten(&format!("{key}.{k}"), inner, rows);
            }
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            let parts: Vec<String> = items.iter().map(scalar_text).collect();
            rows.push((key.into(), parts.join(" ")));
        }
        Value::Array(items) => {
            for (i, inner) in items.iter().enumerate() {
                flatten(&format!("{key}[{}]", i + 1), inner, rows);
            }
        }
        other => rows.push((key.into(), scalar_text(other))),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn verdict_text(m: &Map<String, Value>) -> String {
    let kind = m["kind"].as_str().unwrap_or("?");
    match kind {
        "NumericZero" => format!(
            "NumericZero (samples {}, max residual {:.3e}, threshold {:.1e})",
            m["sample_count"],
            m["max_abs_residual"].as_f64().unwrap_or(f64::NAN),
            m["threshold"].as_f64().unwrap_or(f64::NAN)
        ),
        "ProvenNonzero" => match m.get("witness").and_then(Value::as_array) {
            Some(w) => {
                let pts: Vec<String> = w
                    .iter()
                    .map(|c| format!("{:.6}", c.as_f64().unwrap_or(f64::NAN)))
                    .collect();
                format!("ProvenNonzero (witness {})", pts.join(" "))
            }
            None => "ProvenNonzero".into(),
        },
        k => k.to_string(),
    }
}

pub fn verdict_json(v: &Verdict) -> Value {
    serde_json::to_value(v).expect("serializable")
}
