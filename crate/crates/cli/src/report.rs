//! Machine-readable command reports.

use std::io::Write;

use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::value::RawValue;
use serde_json::{Map, Value};

pub const FORMAT_VERSION: &str = "ba-heat-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Fixed 17-significant-digit rendering; `null` for non-finite values.
pub fn number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

#[derive(Clone, Debug)]
pub struct Row {
    pub label: String,
    pub value: f64,
    pub se: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

#[derive(Debug)]
pub struct Report {
    command: String,
    inputs: Map<String, Value>,
    rows: Vec<Row>,
    checks: Vec<Check>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            inputs: Map::new(),
            rows: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.inputs.insert(key.into(), value.into());
        self
    }

    pub fn row(&mut self, label: impl Into<String>, value: f64) -> &mut Self {
        self.rows.push(Row {
            label: label.into(),
            value,
            se: None,
        });
        self
    }

    pub fn row_se(&mut self, label: impl Into<String>, value: f64, se: f64) -> &mut Self {
        self.rows.push(Row {
            label: label.into(),
            value,
            se: Some(se),
        });
        self
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool) -> &mut Self {
        self.checks.push(Check {
            name: name.into(),
            pass,
        });
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write<W: Write>(&self, format: Format, mut w: W) -> anyhow::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer(&mut w, self)?;
                writeln!(w)?;
            }
            Format::Csv => {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(["label", "value", "se"])?;
                for r in &self.rows {
                    let se = r.se.map(number).unwrap_or_default();
                    out.write_record([r.label.as_str(), &number(r.value), &se])?;
                }
                out.flush()?;
            }
        }
        Ok(())
    }
}

fn raw(v: f64) -> Box<RawValue> {
    RawValue::from_string(number(v)).expect("formatted float is valid JSON")
}

impl Serialize for Row {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("label", &self.label)?;
        m.serialize_entry("value", &raw(self.value))?;
        if let Some(se) = self.se {
            m.serialize_entry("se", &raw(se))?;
        }
        m.end()
    }
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(6))?;
        m.serialize_entry("command", &self.command)?;
        m.serialize_entry("inputs", &self.inputs)?;
        m.serialize_entry("rows", &self.rows)?;
        m.serialize_entry("status", if self.passed() { "pass" } else { "fail" })?;
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| serde_json::json!({ "name": c.name, "status": if c.pass { "pass" } else { "fail" } }))
            .collect();
        m.serialize_entry("checks", &checks)?;
        m.serialize_entry("version", FORMAT_VERSION)?;
        m.end()
    }
}
