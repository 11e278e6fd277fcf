//! CSV ingestion for realizations and forecast records.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// A parsed CSV table restricted to the requested numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Columns {
    pub names: Vec<String>,
    /// Row-major values, one inner vector per data row.
    pub rows: Vec<Vec<f64>>,
}

impl Columns {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

fn open(path: impl AsRef<Path>) -> Result<File> {
    let path = path.as_ref();
    File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Reads a single numeric column.
pub fn read_column(path: impl AsRef<Path>, name: &str) -> Result<Vec<f64>> {
    let cols = read_columns(open(path)?, &[name])?;
    Ok(cols.rows.into_iter().map(|r| r[0]).collect())
}

/// Reads the named numeric columns from CSV data with a header row.
///
/// Line numbers in errors are 1-based and count the header as line 1.
pub fn read_columns<R: Read>(reader: R, names: &[&str]) -> Result<Columns> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Input {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut idx = Vec::with_capacity(names.len());
    for name in names {
        match headers.iter().position(|h| h == *name) {
            Some(i) => idx.push(i),
            None => {
                return Err(Error::Input {
                    line: 1,
                    message: format!("missing column `{name}`"),
                });
            }
        }
    }

    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Input {
            line,
            message: e.to_string(),
        })?;
        let mut row = Vec::with_capacity(idx.len());
        for (&j, name) in idx.iter().zip(names) {
            let field = record.get(j).unwrap_or("");
            let value: f64 = field.parse().map_err(|_| Error::Input {
                line,
                message: format!("cannot parse `{field}` in column `{name}`"),
            })?;
            if !value.is_finite() {
                return Err(Error::Input {
                    line,
                    message: format!("non-finite value in column `{name}`"),
                });
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Input {
            line: 2,
            message: "no data rows".into(),
        });
    }
    Ok(Columns {
        names: names.iter().map(|s| s.to_string()).collect(),
        rows,
    })
}

/// Reads named columns from a file path.
pub fn read_columns_path(path: impl AsRef<Path>, names: &[&str]) -> Result<Columns> {
    read_columns(open(path)?, names)
}

/// Header names present in a CSV file.
pub fn read_headers(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let headers = rdr.headers().map_err(|e| Error::Input {
        line: 1,
        message: e.to_string(),
    })?;
    Ok(headers.iter().map(str::to_string).collect())
}
