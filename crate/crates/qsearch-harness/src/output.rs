//! Row emission. Every experiment produces a flat vector of serializable
//! rows; this module renders them as CSV (header + one record per row) or
//! pretty JSON, to a file or stdout. Output is byte-deterministic for a given
//! row vector.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::{HarnessError, OutputFormat};

pub fn render<T: Serialize>(rows: &[T], format: OutputFormat) -> Result<Vec<u8>, HarnessError> {
    match format {
        OutputFormat::Csv => render_csv(rows),
        OutputFormat::Json => {
            let mut buf = serde_json::to_vec_pretty(rows)
                .map_err(|e| HarnessError::Usage(format!("serializing rows: {e}")))?;
            buf.push(b'\n');
            Ok(buf)
        }
    }
}

fn render_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, HarnessError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| HarnessError::Usage(format!("serializing rows: {e}")))?;
    }
    writer
        .into_inner()
        .map_err(|e| HarnessError::Usage(format!("flushing csv: {e}")))
}

/// Write rows to `out`, or to stdout when no path is given.
pub fn emit<T: Serialize>(
    rows: &[T],
    out: Option<&Path>,
    format: OutputFormat,
) -> Result<(), HarnessError> {
    let bytes = render(rows, format)?;
    match out {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| HarnessError::io(format!("writing {}", path.display()), e)),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(&bytes)
                .and_then(|_| lock.flush())
                .map_err(|e| HarnessError::io("writing stdout", e))
        }
    }
}
