//! CSV and JSON output for sweep records.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bench::run::ExperimentRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 12] = [
    "algorithm",
    "m",
    "n",
    "K",
    "N",
    "L",
    "T",
    "trials",
    "successes",
    "recovery_probability",
    "mean_iterations",
    "mean_runtime_us_per_iter",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `Json` for a `.json` extension, `Csv` otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

fn optional<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn row(r: &ExperimentRecord) -> [String; 12] {
    [
        r.algorithm.clone(),
        r.m.to_string(),
        r.n.to_string(),
        r.k.to_string(),
        optional(r.big_n),
        optional(r.l),
        r.t.to_string(),
        r.trials.to_string(),
        r.successes.to_string(),
        format!("{:.6}", r.recovery_probability),
        format!("{:.6}", r.mean_iterations),
        optional(r.mean_runtime_us_per_iter.map(|t| format!("{t:.3}"))),
    ]
}

pub fn write_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(row(r))?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub fn to_csv_string(records: &[ExperimentRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

pub fn to_json_string(records: &[ExperimentRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(records)?)
}

pub fn emit<W: Write>(records: &[ExperimentRecord], format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(records, out),
        Format::Json => {
            let text = to_json_string(records)?;
            out.write_all(text.as_bytes())
                .and_then(|_| out.write_all(b"\n"))
                .map_err(|e| Error::io("<json output>", e))
        }
    }
}

pub fn emit_to_path(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    emit(records, Format::from_path(path), std::io::BufWriter::new(file))
}
