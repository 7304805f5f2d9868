use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Rows of plain cells; rendered as CSV or embedded in the JSON output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

/// Output of one command. `passed == Some(false)` means a verification
/// failure (exit 2).
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub seed: u64,
    pub n: usize,
    pub tol: f64,
    pub passed: Option<bool>,
    pub result: Value,
    pub table: Table,
}

impl Report {
    pub fn new(command: &'static str, seed: u64, n: usize, tol: f64) -> Self {
        Self {
            command,
            seed,
            n,
            tol,
            passed: None,
            result: Value::Null,
            table: Table::default(),
        }
    }

    pub fn with_result<T: Serialize>(mut self, result: &T) -> Self {
        self.result = serde_json::to_value(result).expect("results serialize");
        self
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = table;
        self
    }

    pub fn with_verdict(mut self, passed: bool) -> Self {
        self.passed = Some(passed);
        self
    }

    pub fn failed(&self) -> bool {
        self.passed == Some(false)
    }

    pub fn to_json(&self) -> String {
        let mut v = json!({
            "command": self.command,
            "seed": self.seed,
            "N": self.n,
            "tol": self.tol,
            "result": self.result,
        });
        if let Some(p) = self.passed {
            v["passed"] = Value::Bool(p);
        }
        let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
        s.push('\n');
        s
    }

    /// Every row carries `seed`, `N` and `tol` so that rows stay
    /// reproducible after being cut out of the file.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut head = vec!["seed".to_string(), "N".into(), "tol".into()];
        head.extend(self.table.headers.iter().cloned());
        w.write_record(&head)?;
        let prefix = [self.seed.to_string(), self.n.to_string(), fmt(self.tol)];
        for row in &self.table.rows {
            w.write_record(prefix.iter().chain(row.iter()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Verification failures are always reported as JSON.
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Csv if !self.failed() => self.to_csv(),
            _ => Ok(self.to_json()),
        }
    }
}

/// Shortest round-trip representation.
pub fn fmt(x: f64) -> String {
    format!("{x:?}")
}
