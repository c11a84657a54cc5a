//! Deterministic artifact writers.
//!
//! Every file begins with a one-line JSON provenance comment (CSV) or a
//! `provenance` field (JSON documents). Floats are rendered in scientific
//! notation with 17 significant digits — enough to round-trip an `f64` — so
//! identical resolved configurations yield byte-identical artifacts.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Provenance;
use crate::CliError;

/// Renders a float with 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

/// Creates `dir` if needed and returns `dir/name`.
pub fn prepare(dir: &Path, name: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir.join(name))
}

/// Writes a provenance-headed CSV: a `#` comment line carrying the provenance
/// JSON, a column-name line, then the records.
pub fn write_csv<I>(
    path: &Path,
    provenance: &Provenance,
    columns: &[&str],
    rows: I,
) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut file = File::create(path).map_err(|e| write_error(path, e))?;
    let header = serde_json::to_string(provenance).expect("provenance serializes");
    writeln!(file, "# {header}").map_err(|e| write_error(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer
        .write_record(columns)
        .map_err(|e| write_error(path, e))?;
    for row in rows {
        writer.write_record(&row).map_err(|e| write_error(path, e))?;
    }
    writer.flush().map_err(|e| write_error(path, e))?;
    Ok(())
}

/// Renders a document as pretty-printed JSON with a trailing newline.
pub fn render_json<T: Serialize>(doc: &T) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("document serializes");
    text.push('\n');
    text
}

/// Writes a document as pretty-printed JSON.
pub fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<(), CliError> {
    fs::write(path, render_json(doc)).map_err(|e| write_error(path, e))
}
