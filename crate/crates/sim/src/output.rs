//! CSV emission and loading.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::aggregate::Aggregate;
use crate::error::{io_err, Error, Result};
use crate::schemes::TrialRecord;

pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|source| Error::Csv {
            path: "<memory>".into(),
            source,
        })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io {
        path: "<memory>".into(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T], what: &'static str) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Empty(what));
    }
    let text = to_csv_string(rows)?;
    std::fs::write(path, text).map_err(io_err(path))
}

/// Writes `records` with the fixed trial header. Fails without creating the
/// file when there is nothing to write.
pub fn emit_csv(path: impl AsRef<Path>, records: &[TrialRecord]) -> Result<()> {
    write_rows(path.as_ref(), records, "no trial records")
}

pub fn emit_summary(path: impl AsRef<Path>, aggregates: &[Aggregate]) -> Result<()> {
    write_rows(path.as_ref(), aggregates, "no aggregates")
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<std::result::Result<Vec<T>, _>>().map_err(csv_err)
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    read_rows(path.as_ref())
}
