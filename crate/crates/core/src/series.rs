//! Plain CSV time series: one header row, one row per point, 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn series_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Series(msg.into()))
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return series_err("empty column name");
    }
    if name.chars().any(|c| c == ',' || c == '"' || c.is_control() || c.is_whitespace()) {
        return series_err(format!("invalid column name {name:?}"));
    }
    Ok(())
}

impl SeriesTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Result<Self> {
        let columns: Vec<String> = columns.into_iter().map(Into::into).collect();
        if columns.is_empty() {
            return series_err("a series needs at least one column");
        }
        for (i, c) in columns.iter().enumerate() {
            check_name(c)?;
            if columns[..i].contains(c) {
                return series_err(format!("duplicate column {c}"));
            }
        }
        Ok(Self { columns, rows: Vec::new() })
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return series_err(format!("row has {} values for {} columns", row.len(), self.columns.len()));
        }
        if let Some(i) = row.iter().position(|v| !v.is_finite()) {
            return series_err(format!("non-finite value in column {}", self.columns[i]));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let v = if *v == 0.0 { 0.0 } else { *v };
                write!(out, "{v:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
        let header = lines.next().filter(|h| !h.is_empty()).ok_or_else(|| Error::Series("missing header".into()))?;
        let mut table = Self::new(header.split(','))?;
        for (n, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<f64>().map_err(|_| Error::Series(format!("line {}: bad number {f:?}", n + 2))))
                .collect::<Result<Vec<_>>>()?;
            table.push_row(row).map_err(|e| Error::Series(format!("line {}: {e}", n + 2)))?;
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse_csv(&std::fs::read_to_string(path)?)
    }
}
