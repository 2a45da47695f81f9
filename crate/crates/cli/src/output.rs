use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use crate::error::CliError;

/// Buffered CSV rows, written in one go so a failed run leaves no partial file.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Writes to `path`, or to stdout without one.
    pub fn write(&self, path: Option<&Path>) -> Result<(), CliError> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(
                File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
            ),
            None => Box::new(io::stdout().lock()),
        };
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn maybe(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
