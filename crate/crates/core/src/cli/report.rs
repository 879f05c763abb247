//! Run reports and CSV tables.

use std::io::Write;
use std::path::Path;
use std::time::Duration;

use crate::error::Result;
use crate::rational::{to_f64, Rational};

/// Rows of strings under fixed headers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Exact value and its decimal approximation, as adjacent CSV columns.
pub fn exact(value: &Rational) -> [String; 2] {
    [value.to_string(), format!("{:.6}", to_f64(value))]
}

/// What a subcommand produced.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Payload {
    pub text: String,
    pub table: Option<Table>,
    /// A claim was checked and did not hold.
    pub claim_failed: bool,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub command: &'static str,
    pub seed: Option<u64>,
    /// Scenario in file syntax.
    pub scenario: Option<String>,
    pub payload: Payload,
    pub wall_time: Duration,
}

impl RunReport {
    /// Human-readable form; everything but the last line is deterministic.
    pub fn render(&self) -> String {
        let mut s = format!("command: {}\n", self.command);
        if let Some(seed) = self.seed {
            s += &format!("seed: {seed}\n");
        }
        if let Some(echo) = &self.scenario {
            s += "scenario:\n";
            for line in echo.lines() {
                s += &format!("  {line}\n");
            }
        }
        s += "\n";
        s += &self.payload.text;
        if !self.payload.text.ends_with('\n') {
            s += "\n";
        }
        s += &format!("\nwall time: {:.3} s\n", self.wall_time.as_secs_f64());
        s
    }
}
