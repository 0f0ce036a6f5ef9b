//! Files written once and atomically: CSV tables, snapshots and manifests.

use ibnls_core::RadialField;
use std::io::{self, Write};
use std::path::Path;
use tempfile::NamedTempFile;

/// Writes `bytes` to `path` through a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Full-precision text of a float; parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// CSV table with a header row.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    write_atomic(path, &bytes)
}

/// Field snapshot in the `N b q R_max M t` / `r Re Im` text format.
pub fn write_snapshot(path: &Path, v: &RadialField, b: f64, q: f64, t: f64) -> io::Result<()> {
    let mut bytes = Vec::new();
    v.write_snapshot(&mut bytes, b, q, t)?;
    write_atomic(path, &bytes)
}
