//! Plain CSV files for matrices, sparse signals and measurement vectors.
//!
//! Every file starts with a dimension record, followed by the data:
//!
//! * matrix: `m,n`, then `m` rows of `n` values;
//! * signal: `n,K`, then `K` records `index,value` with ascending indices;
//! * vector: `m`, then `m` records of one value.
//!
//! Values are written in Rust's shortest round-trip form, so a write/read
//! cycle is lossless.

use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{IndexSet, SensingMatrix};
use crate::signals::SparseSignal;

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
}

fn records<R: Read>(input: R) -> Result<Vec<csv::StringRecord>> {
    Ok(reader(input).records().collect::<std::result::Result<Vec<_>, _>>()?)
}

fn field<T: FromStr>(record: &csv::StringRecord, i: usize, what: &str) -> Result<T> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record
        .get(i)
        .ok_or_else(|| Error::Parse(format!("line {line}: missing {what}")))?;
    raw.parse()
        .map_err(|_| Error::Parse(format!("line {line}: cannot parse {what} from {raw:?}")))
}

fn expect_width(record: &csv::StringRecord, width: usize, what: &str) -> Result<()> {
    if record.len() != width {
        let line = record.position().map_or(0, |p| p.line());
        return Err(Error::Parse(format!(
            "line {line}: {what} has {} fields, expected {width}",
            record.len()
        )));
    }
    Ok(())
}

fn split_header(mut recs: Vec<csv::StringRecord>, what: &str) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    if recs.is_empty() {
        return Err(Error::Parse(format!("{what} file is empty")));
    }
    let header = recs.remove(0);
    Ok((header, recs))
}

pub fn read_matrix<R: Read>(input: R) -> Result<SensingMatrix> {
    let (header, rows) = split_header(records(input)?, "matrix")?;
    expect_width(&header, 2, "matrix header")?;
    let m: usize = field(&header, 0, "m")?;
    let n: usize = field(&header, 1, "n")?;
    if rows.len() != m {
        return Err(Error::Parse(format!("matrix header says {m} rows, found {}", rows.len())));
    }
    let mut entries = DMatrix::zeros(m, n);
    for (i, row) in rows.iter().enumerate() {
        expect_width(row, n, "matrix row")?;
        for j in 0..n {
            entries[(i, j)] = field(row, j, "matrix entry")?;
        }
    }
    SensingMatrix::new(entries)
}

pub fn write_matrix<W: Write>(a: &SensingMatrix, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record([a.m().to_string(), a.n().to_string()])?;
    for i in 0..a.m() {
        w.write_record(a.entries().row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| Error::io("<matrix output>", e))
}

pub fn read_signal<R: Read>(input: R) -> Result<SparseSignal> {
    let (header, rows) = split_header(records(input)?, "signal")?;
    expect_width(&header, 2, "signal header")?;
    let n: usize = field(&header, 0, "n")?;
    let k: usize = field(&header, 1, "K")?;
    if rows.len() != k {
        return Err(Error::Parse(format!("signal header says K = {k}, found {} entries", rows.len())));
    }
    let mut indices = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    for row in &rows {
        expect_width(row, 2, "signal entry")?;
        indices.push(field::<usize>(row, 0, "index")?);
        values.push(field::<f64>(row, 1, "value")?);
    }
    let support = IndexSet::from_sorted(indices)?;
    SparseSignal::new(n, support, values)
}

pub fn write_signal<W: Write>(x: &SparseSignal, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record([x.n().to_string(), x.k().to_string()])?;
    for (i, v) in x.support().iter().zip(x.values()) {
        w.write_record([i.to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<signal output>", e))
}

pub fn read_vector<R: Read>(input: R) -> Result<DVector<f64>> {
    let (header, rows) = split_header(records(input)?, "vector")?;
    expect_width(&header, 1, "vector header")?;
    let m: usize = field(&header, 0, "length")?;
    if rows.len() != m {
        return Err(Error::Parse(format!("vector header says {m} entries, found {}", rows.len())));
    }
    let values = rows
        .iter()
        .map(|row| {
            expect_width(row, 1, "vector entry")?;
            let v: f64 = field(row, 0, "vector entry")?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse(format!("vector entry {v} is not finite")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(values))
}

pub fn write_vector<W: Write>(v: &DVector<f64>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record([v.len().to_string()])?;
    for x in v.iter() {
        w.write_record([x.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<vector output>", e))
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn load_matrix(path: &Path) -> Result<SensingMatrix> {
    read_matrix(open(path)?)
}

pub fn save_matrix(a: &SensingMatrix, path: &Path) -> Result<()> {
    write_matrix(a, create(path)?)
}

pub fn load_signal(path: &Path) -> Result<SparseSignal> {
    read_signal(open(path)?)
}

pub fn save_signal(x: &SparseSignal, path: &Path) -> Result<()> {
    write_signal(x, create(path)?)
}

pub fn load_vector(path: &Path) -> Result<DVector<f64>> {
    read_vector(open(path)?)
}

pub fn save_vector(v: &DVector<f64>, path: &Path) -> Result<()> {
    write_vector(v, create(path)?)
}
