//! Report emission: the result table as CSV (fixed column order,
//! scientific notation with 6 fractional digits) and JSON (full
//! fidelity, parses back into equal reports).

use std::io;

use crate::campaign::BasicResult;
use crate::secondlevel::TestReport;
use crate::{Error, Result};

/// Fixed CSV column order of the result table.
pub const CSV_COLUMNS: [&str; 11] = [
    "generator",
    "n",
    "m",
    "s",
    "d_tv",
    "tv_threshold",
    "t_asin",
    "p_chi2",
    "reliable",
    "verdict_chi2",
    "verdict_tv",
];

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

/// Scientific notation with 7 significant digits.
fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

/// Writes the result table as CSV with a header row.
///
/// # Errors
///
/// `Config` when `reports` is empty; `Io` on write failure.
pub fn write_csv<W: io::Write>(out: W, reports: &[TestReport]) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::Config("no reports to tabulate".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in reports {
        w.write_record([
            r.generator.as_str(),
            &r.n.to_string(),
            &r.m.to_string(),
            &r.s.to_string(),
            &sci(r.d_tv),
            &sci(r.tv_threshold),
            &sci(r.t_asin),
            &sci(r.p_chi2),
            &r.reliable.to_string(),
            &r.verdict_chi2.to_string(),
            &r.verdict_tv.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes per-sequence basic results as CSV (seq, seed, s_asin,
/// p_value).
///
/// # Errors
///
/// `Io` on write failure.
pub fn write_basic_csv<W: io::Write>(out: W, results: &[BasicResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seq", "seed", "s_asin", "p_value"])
        .map_err(csv_err)?;
    for b in results {
        w.write_record([
            b.seq.to_string(),
            b.seed.to_string(),
            sci(b.s_asin),
            sci(b.p_value),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes reports as pretty JSON.
///
/// # Errors
///
/// `Config` on serialization failure (wraps the JSON error).
pub fn write_json<W: io::Write>(out: W, reports: &[TestReport]) -> Result<()> {
    serde_json::to_writer_pretty(out, reports)
        .map_err(|e| Error::Config(format!("json: {e}")))
}

/// Reads reports back from JSON.
///
/// # Errors
///
/// `Config` on malformed input.
pub fn read_json<R: io::Read>(input: R) -> Result<Vec<TestReport>> {
    serde_json::from_reader(input).map_err(|e| Error::Config(format!("json: {e}")))
}
