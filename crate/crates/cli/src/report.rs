//! Result objects and their text, JSON and CSV renderings.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{json, Map, Value};
use spectral_det::DetResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// The headline number of a result.
pub enum Headline {
    LogDet(f64),
    Value(Value),
}

pub struct Output {
    pub quantity: String,
    pub inputs: Map<String, Value>,
    pub headline: Headline,
    pub breakdown: Vec<(String, f64)>,
    pub error_estimate: f64,
    pub notes: Vec<String>,
}

impl Output {
    pub fn new(quantity: &str, inputs: Map<String, Value>, headline: Headline) -> Self {
        Self {
            quantity: quantity.to_string(),
            inputs,
            headline,
            breakdown: Vec::new(),
            error_estimate: 0.0,
            notes: Vec::new(),
        }
    }

    pub fn from_det(quantity: &str, inputs: Map<String, Value>, d: &DetResult) -> Self {
        let mut o = Self::new(quantity, inputs, Headline::LogDet(d.log_det));
        o.breakdown = d.breakdown.clone();
        o.error_estimate = d.error_estimate;
        o.notes = d.notes.clone();
        o
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("quantity".into(), json!(self.quantity));
        m.insert("inputs".into(), Value::Object(self.inputs.clone()));
        match &self.headline {
            Headline::LogDet(v) => {
                m.insert("log_det".into(), num(*v));
                m.insert("det".into(), num(v.exp()));
            }
            Headline::Value(v) => {
                m.insert("value".into(), v.clone());
            }
        }
        let mut b = Map::new();
        for (k, v) in &self.breakdown {
            b.insert(k.clone(), num(*v));
        }
        m.insert("breakdown".into(), Value::Object(b));
        m.insert("error_estimate".into(), num(self.error_estimate));
        m.insert("method_notes".into(), json!(self.notes));
        Value::Object(m)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.quantity);
        for (k, v) in &self.inputs {
            let _ = writeln!(s, "  input {k} = {v}");
        }
        match &self.headline {
            Headline::LogDet(v) => {
                let _ = writeln!(s, "log_det = {v:.15e}");
                let _ = writeln!(s, "det     = {:.15e}", v.exp());
            }
            Headline::Value(v) => {
                let _ = writeln!(s, "value = {v}");
            }
        }
        for (k, v) in &self.breakdown {
            let _ = writeln!(s, "  {k} = {v:.15e}");
        }
        let _ = writeln!(s, "error_estimate = {:.3e}", self.error_estimate);
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

/// JSON has no NaN or infinity; those become null.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

/// A table for sweeps.
pub struct Table {
    pub quantity: String,
    pub inputs: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(r) {
                    m.insert(c.clone(), num(*v));
                }
                Value::Object(m)
            })
            .collect();
        json!({ "quantity": self.quantity, "inputs": Value::Object(self.inputs.clone()), "value": rows })
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.quantity);
        let head: Vec<String> = self.columns.iter().map(|c| format!("{c:>22}")).collect();
        s.push_str(&head.join(""));
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:>22.12e}")).collect();
            s.push_str(&cells.join(""));
            s.push('\n');
        }
        s
    }
}
