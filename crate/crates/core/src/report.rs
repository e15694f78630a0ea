//! Machine-readable run reports: JSON with a schema number, and TSV.

use std::collections::BTreeMap;
use std::fmt::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledTable {
    pub name: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

fn fixed(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" { "0.000000".into() } else { s }
}

impl LabeledTable {
    pub fn from_matrix(name: &str, row_labels: &[String], col_labels: &[String], m: &DMatrix<f64>) -> Self {
        Self {
            name: name.into(),
            row_labels: row_labels.to_vec(),
            col_labels: col_labels.to_vec(),
            entries: (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect(),
        }
    }

    /// Header row of column labels, then one labeled row per line, six decimals.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.name);
        for c in &self.col_labels {
            out.push('\t');
            out.push_str(c);
        }
        out.push('\n');
        for (label, row) in self.row_labels.iter().zip(&self.entries) {
            out.push_str(label);
            for x in row {
                out.push('\t');
                out.push_str(&fixed(*x));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Success,
    NotConverged,
    GoldTie,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Success => 0,
            RunStatus::NotConverged => 2,
            RunStatus::GoldTie => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub input: String,
    pub config: BTreeMap<String, Value>,
    pub table: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub entries: Vec<Vec<f64>>,
    /// Winning column label per row; `None` for a tie.
    pub winners: Vec<Option<String>>,
    /// Winner minus runner-up per row; `None` when undefined.
    pub margins: Vec<Option<f64>>,
    pub mismatches: Vec<String>,
    pub tables: Vec<LabeledTable>,
    pub summary: BTreeMap<String, Value>,
    pub status: RunStatus,
}

impl RunReport {
    pub fn new(command: &str, input: &str, main: LabeledTable) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            command: command.into(),
            input: input.into(),
            config: BTreeMap::new(),
            table: main.name,
            row_labels: main.row_labels,
            col_labels: main.col_labels,
            entries: main.entries,
            winners: Vec::new(),
            margins: Vec::new(),
            mismatches: Vec::new(),
            tables: Vec::new(),
            summary: BTreeMap::new(),
            status: RunStatus::Success,
        }
    }

    pub fn main_table(&self) -> LabeledTable {
        LabeledTable {
            name: self.table.clone(),
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
            entries: self.entries.clone(),
        }
    }

    pub fn set_config(&mut self, key: &str, value: impl Into<Value>) {
        self.config.insert(key.into(), value.into());
    }

    pub fn set_summary(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.into(), value.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// The main table, then per-row winners, extra tables and the summary,
    /// separated by blank lines.
    pub fn to_tsv(&self) -> String {
        let mut out = self.main_table().to_tsv();
        if !self.winners.is_empty() {
            out.push_str("\nrow\twinner\tmargin\n");
            for (i, label) in self.row_labels.iter().enumerate() {
                let w = self.winners.get(i).cloned().flatten().unwrap_or_else(|| "-".into());
                let m = self.margins.get(i).copied().flatten().map(fixed).unwrap_or_else(|| "-".into());
                let _ = writeln!(out, "{label}\t{w}\t{m}");
            }
        }
        for t in &self.tables {
            out.push('\n');
            out.push_str(&t.to_tsv());
        }
        if !self.mismatches.is_empty() {
            let _ = write!(out, "\nmismatches\t{}\n", self.mismatches.join("\t"));
        }
        if !self.summary.is_empty() {
            out.push_str("\nsummary\tvalue\n");
            for (k, v) in &self.summary {
                let v = match v {
                    Value::String(s) => s.clone(),
                    Value::Number(n) => n.as_f64().filter(|_| !n.is_i64() && !n.is_u64()).map(fixed).unwrap_or_else(|| n.to_string()),
                    other => other.to_string(),
                };
                let _ = writeln!(out, "{k}\t{v}");
            }
        }
        out
    }
}
