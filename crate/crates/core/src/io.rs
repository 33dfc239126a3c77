//! Dataset I/O: CSV with header `x_1,...,x_d,y`; the row order defines the
//! data index.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Parses a dataset CSV into `(inputs, outputs)`. Errors carry the offending
/// line number.
pub fn parse_dataset(content: &str) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::input("empty dataset: missing header line"))?;
    let columns: Vec<&str> = header.trim().split(',').collect();
    if columns.len() < 2 || columns.last() != Some(&"y") {
        return Err(Error::input(format!(
            "line 1: header must be x_1,...,x_d,y, got `{header}`"
        )));
    }
    let dim = columns.len() - 1;
    for (i, name) in columns[..dim].iter().enumerate() {
        let expected = format!("x_{}", i + 1);
        if name.trim() != expected {
            return Err(Error::input(format!(
                "line 1: column {} must be `{expected}`, got `{name}`",
                i + 1
            )));
        }
    }
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(Error::input(format!(
                "line {}: expected {} fields, got {}",
                idx + 1,
                dim + 1,
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(dim);
        for (c, field) in fields.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::input(format!("line {}: field {} is not a number: `{field}`", idx + 1, c + 1))
            })?;
            if c < dim {
                row.push(v);
            } else {
                outputs.push(v);
            }
        }
        inputs.push(row);
    }
    Ok((inputs, outputs))
}

/// Reads a dataset CSV from disk.
pub fn read_dataset(path: &Path) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    parse_dataset(&content)
}

/// Renders a dataset as CSV.
pub fn render_dataset(inputs: &[Vec<f64>], outputs: &[f64]) -> Result<String> {
    if inputs.len() != outputs.len() {
        return Err(Error::input(format!(
            "{} inputs but {} outputs",
            inputs.len(),
            outputs.len()
        )));
    }
    let dim = inputs.first().map(|r| r.len()).unwrap_or(1);
    let mut out = String::new();
    for i in 0..dim {
        let _ = write!(out, "x_{},", i + 1);
    }
    out.push_str("y\n");
    for (row, y) in inputs.iter().zip(outputs) {
        if row.len() != dim {
            return Err(Error::input("ragged input rows".to_string()));
        }
        for v in row {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{y}");
    }
    Ok(out)
}
