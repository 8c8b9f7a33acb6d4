//! Figure-reproduction commands built on the other modules.
//!
//! Every command has a `compute` step returning a plain struct and a `write`
//! step emitting CSV, JSON and SVG files into an output directory.

pub mod config;
pub mod ellipse;
pub mod error_curve;
pub mod pipeline;
pub mod report;
pub mod resolution;
pub mod scatter;
pub mod svg;

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// CSV cell for a value that may be singular or missing.
///
/// `None` and infinities become `inf`, NaN (a skipped simulation) becomes
/// `nan`.
pub fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_nan() => "nan".into(),
        Some(x) if x.is_finite() => x.to_string(),
        _ => "inf".into(),
    }
}

/// Pretty-printed JSON followed by a newline. Struct fields keep their
/// declaration order.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Write a CSV table with a header row.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
