//! Long-format trace CSV: iteration, parameter, value.

use std::path::Path;

use copimp_core::Trace;

use crate::error::{io_err, CliError, Result};

/// Writes the trace after checking every value is finite; a NaN anywhere
/// aborts with the offending iteration.
pub fn write_trace(trace: &Trace, path: &Path) -> Result<()> {
    trace.validate_finite()?;
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
    w.write_record(["iteration", "parameter", "value"])
        .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
    for (it, row) in trace.iterations.iter().zip(&trace.rows) {
        for (param, value) in trace.parameters.iter().zip(row) {
            w.write_record([it.to_string().as_str(), param, format!("{value}").as_str()])
                .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
        }
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<Trace> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
    let mut parameters: Vec<String> = Vec::new();
    let mut iterations: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
        let bad_cell = |column: &str, message: String| CliError::Cell {
            path: path.into(),
            row: idx + 2,
            column: column.into(),
            message,
        };
        let it: usize = record
            .get(0)
            .unwrap_or("")
            .parse()
            .map_err(|_| bad_cell("iteration", "not an integer".into()))?;
        let param = record.get(1).unwrap_or("").to_string();
        let value: f64 = record
            .get(2)
            .unwrap_or("")
            .parse()
            .map_err(|_| bad_cell("value", "not a number".into()))?;
        if iterations.last() != Some(&it) {
            iterations.push(it);
            rows.push(Vec::new());
        }
        if iterations.len() == 1 {
            parameters.push(param.clone());
        }
        let col = rows.len() - 1;
        let expected = parameters.get(rows[col].len()).cloned().unwrap_or_default();
        if param != expected {
            return Err(bad_cell("parameter", format!("expected {expected}, got {param}")));
        }
        rows[col].push(value);
    }
    Ok(Trace { parameters, iterations, rows })
}
