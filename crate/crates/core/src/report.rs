//! CSV and JSON emission for result tables.
//!
//! Every table has a fixed header. Floats are written in shortest round-trip
//! form, so re-reading a file reproduces the in-memory rows exactly and
//! repeated runs produce byte-identical output.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub const CONVERGENCE_HEADER: [&str; 5] = ["x", "psi", "psi_over_x", "pi", "pi_logx_over_x"];
pub const CROSSCHECK_HEADER: [&str; 9] = [
    "sigma",
    "t",
    "zeta_side_re",
    "zeta_side_im",
    "laplace_re",
    "laplace_im",
    "tail_bound",
    "abs_diff",
    "pass",
];
pub const LIMIT_HEADER: [&str; 4] = ["t", "g", "reference", "rel_gap"];
pub const LINE_LIMIT_HEADER: [&str; 4] = ["sigma", "tau", "scaled_re", "scaled_im"];
pub const KA_HEADER: [&str; 2] = ["a", "k_a"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    Header { expected: Vec<String>, found: Vec<String> },
}

/// Writes `header` followed by one line per row.
pub fn write_csv<W: Write, T: Serialize>(writer: W, header: &[&str], rows: &[T]) -> Result<(), ReportError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows back, checking the header first.
pub fn read_csv<Rd: Read, T: DeserializeOwned>(reader: Rd, header: &[&str]) -> Result<Vec<T>, ReportError> {
    let mut r = csv::Reader::from_reader(reader);
    let found: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if found.iter().map(String::as_str).ne(header.iter().copied()) {
        return Err(ReportError::Header {
            expected: header.iter().map(|s| s.to_string()).collect(),
            found,
        });
    }
    r.deserialize().map(|row| row.map_err(ReportError::from)).collect()
}

pub fn write_json<W: Write, T: Serialize>(mut writer: W, value: &T) -> Result<(), ReportError> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    Ok(())
}
