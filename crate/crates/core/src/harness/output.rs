//! CSV writers. Floats are written in their shortest round-trip form, so
//! files are exact and identical for identical inputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Writes `rows` with a header line to `writer`.
pub fn write_csv<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let file = File::create(path.as_ref())?;
    write_csv(BufWriter::new(file), rows)
}
