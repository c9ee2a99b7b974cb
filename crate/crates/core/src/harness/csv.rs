//! CSV output through the `csv` crate. Floats are written in their shortest
//! round-trip form; records end in `\n` on every platform.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{RegretTrace, SummaryRow, TraceRow};
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "t,run,algo,env,pseudo_regret";
pub const SUMMARY_HEADER: &str = "t,algo,env,mean,se,runs";

fn write_rows<W: Write, T: Serialize>(rows: &[T], w: W) -> csv::Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(trace: &RegretTrace, w: W) -> csv::Result<()> {
    if trace.rows.is_empty() {
        return header_only(w, TRACE_HEADER);
    }
    write_rows(&trace.rows, w)
}

pub fn write_summary<W: Write>(summary: &[SummaryRow], w: W) -> csv::Result<()> {
    if summary.is_empty() {
        return header_only(w, SUMMARY_HEADER);
    }
    write_rows(summary, w)
}

fn header_only<W: Write>(mut w: W, header: &str) -> csv::Result<()> {
    writeln!(w, "{header}")?;
    Ok(())
}

fn create(path: &Path) -> Result<std::fs::File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::File::create(path).map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

pub fn write_trace_csv(trace: &RegretTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_trace(trace, create(path)?).map_err(|e| csv_error(path, e))
}

pub fn write_summary_csv(summary: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_summary(summary, create(path)?).map_err(|e| csv_error(path, e))
}

fn read_rows<T: DeserializeOwned>(path: &Path, header: &str) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let found = reader.headers().map_err(|e| csv_error(path, e))?;
    if found.iter().collect::<Vec<_>>().join(",") != header {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header '{header}'"),
        });
    }
    reader
        .deserialize()
        .collect::<csv::Result<Vec<T>>>()
        .map_err(|e| csv_error(path, e))
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<RegretTrace> {
    let rows: Vec<TraceRow> = read_rows(path.as_ref(), TRACE_HEADER)?;
    Ok(RegretTrace { rows })
}

pub fn read_summary_csv(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    read_rows(path.as_ref(), SUMMARY_HEADER)
}
