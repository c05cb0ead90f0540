//! PCF collection and matrix files.
//!
//! A collection is either a JSON document
//! `{"dtype": "f32"|"f64", "pcfs": [[[t, v], ...], ...]}` or a directory of
//! two-column CSV files with header `t,v`, one PCF per file, read in
//! lexicographic file name order.
//!
//! Numbers are written in the shortest decimal form that parses back to the
//! same bits, and read with correctly rounded parsing at the target
//! precision, so a write/read cycle is lossless. Matrices are written as
//! headerless row-major CSV or as nested JSON rows.

use std::fmt::{LowerExp, Write as _};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use masspcf_core::{Pcf, PcfError, Scalar, ScalarKind};
use serde::Deserialize;
use serde_json::value::RawValue;

use crate::error::Error;
use crate::matrix::PairwiseMatrix;
use crate::Result;

/// Scalar types that can be written to and parsed from text losslessly.
pub trait TextScalar: Scalar + FromStr + LowerExp {
    const DTYPE: &'static str;
}

impl TextScalar for f32 {
    const DTYPE: &'static str = "f32";
}

impl TextScalar for f64 {
    const DTYPE: &'static str = "f64";
}

pub fn dtype_name(kind: ScalarKind) -> &'static str {
    match kind {
        ScalarKind::F32 => f32::DTYPE,
        ScalarKind::F64 => f64::DTYPE,
    }
}

pub fn parse_dtype(s: &str) -> Option<ScalarKind> {
    match s {
        "f32" | "float32" => Some(ScalarKind::F32),
        "f64" | "float64" => Some(ScalarKind::F64),
        _ => None,
    }
}

/// Appends the shortest round-trip decimal form of `x`. Very large and very
/// small magnitudes use exponent notation.
pub fn push_number<T: Scalar + LowerExp>(out: &mut String, x: T) {
    let a = x.abs().to_f64();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        write!(out, "{x}").unwrap();
    } else {
        write!(out, "{x:e}").unwrap();
    }
}

pub fn format_number<T: Scalar + LowerExp>(x: T) -> String {
    let mut s = String::new();
    push_number(&mut s, x);
    s
}

/// A collection of PCFs of one scalar kind.
#[derive(Clone, Debug, PartialEq)]
pub enum PcfCollection {
    F32(Vec<Pcf<f32>>),
    F64(Vec<Pcf<f64>>),
}

impl PcfCollection {
    pub fn kind(&self) -> ScalarKind {
        match self {
            PcfCollection::F32(_) => ScalarKind::F32,
            PcfCollection::F64(_) => ScalarKind::F64,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            PcfCollection::F32(v) => v.len(),
            PcfCollection::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends `other`; both must have the same scalar kind.
    pub fn merge(self, other: PcfCollection) -> std::result::Result<PcfCollection, PcfError> {
        match (self, other) {
            (PcfCollection::F32(mut a), PcfCollection::F32(b)) => {
                a.extend(b);
                Ok(PcfCollection::F32(a))
            }
            (PcfCollection::F64(mut a), PcfCollection::F64(b)) => {
                a.extend(b);
                Ok(PcfCollection::F64(a))
            }
            (a, b) => Err(PcfError::MixedPrecision {
                left: a.kind(),
                right: b.kind(),
            }),
        }
    }
}

impl From<Vec<Pcf<f32>>> for PcfCollection {
    fn from(v: Vec<Pcf<f32>>) -> Self {
        PcfCollection::F32(v)
    }
}

impl From<Vec<Pcf<f64>>> for PcfCollection {
    fn from(v: Vec<Pcf<f64>>) -> Self {
        PcfCollection::F64(v)
    }
}

fn format_error(path: &Path, location: Option<String>, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        location,
        message: message.into(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_scalar<T: TextScalar>(s: &str) -> Option<T> {
    s.trim().parse::<T>().ok()
}

#[derive(Deserialize)]
struct CollectionDoc<'a> {
    dtype: String,
    #[serde(borrow)]
    pcfs: Vec<Vec<[&'a RawValue; 2]>>,
}

/// Reads a JSON collection document.
pub fn read_json(path: &Path) -> Result<PcfCollection> {
    let text = read_text(path)?;
    let doc: CollectionDoc = serde_json::from_str(&text).map_err(|e| {
        format_error(
            path,
            Some(format!("line {}, column {}", e.line(), e.column())),
            e.to_string(),
        )
    })?;
    match parse_dtype(&doc.dtype) {
        Some(ScalarKind::F32) => Ok(PcfCollection::F32(json_pcfs(path, &doc)?)),
        Some(ScalarKind::F64) => Ok(PcfCollection::F64(json_pcfs(path, &doc)?)),
        None => Err(format_error(
            path,
            None,
            format!("unknown dtype {:?}, expected \"f32\" or \"f64\"", doc.dtype),
        )),
    }
}

fn json_pcfs<T: TextScalar>(path: &Path, doc: &CollectionDoc) -> Result<Vec<Pcf<T>>> {
    doc.pcfs
        .iter()
        .enumerate()
        .map(|(k, rows)| {
            let points = rows
                .iter()
                .enumerate()
                .map(|(r, pair)| {
                    let t = parse_scalar::<T>(pair[0].get());
                    let v = parse_scalar::<T>(pair[1].get());
                    match (t, v) {
                        (Some(t), Some(v)) => Ok([t, v]),
                        _ => Err(format_error(
                            path,
                            Some(format!("pcf {k}, row {r}")),
                            format!(
                                "expected two numbers, got [{}, {}]",
                                pair[0].get(),
                                pair[1].get()
                            ),
                        )),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Pcf::new(points)
                .map_err(|e| validation_error(path, format!("pcf {k}"), &e, |r| format!("row {r}")))
        })
        .collect()
}

/// Location of a validation error: `prefix` plus the offending row, if the
/// error names one.
fn validation_error(
    path: &Path,
    prefix: String,
    e: &PcfError,
    row: impl Fn(usize) -> String,
) -> Error {
    let location = match e {
        PcfError::NonIncreasingTimes { row: r } | PcfError::NonFinite { row: r } => {
            format!("{prefix}, {}", row(*r))
        }
        PcfError::NonZeroStart => format!("{prefix}, {}", row(0)),
        _ => prefix,
    };
    format_error(path, Some(location), e.to_string())
}

/// Reads one `t,v` CSV file.
pub fn read_csv_pcf<T: TextScalar>(path: &Path) -> Result<Pcf<T>> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| format_error(path, Some("line 1".into()), e.to_string()))?;
    if header.len() != 2 || &header[0] != "t" || &header[1] != "v" {
        return Err(format_error(
            path,
            Some("line 1".into()),
            "expected header \"t,v\"",
        ));
    }
    let mut points = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| format!("line {}", p.line()));
            format_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = || {
            format_error(
                path,
                Some(format!("line {line}")),
                format!(
                    "expected two numbers, got {:?}",
                    record.iter().collect::<Vec<_>>()
                ),
            )
        };
        if record.len() != 2 {
            return Err(bad());
        }
        match (parse_scalar::<T>(&record[0]), parse_scalar::<T>(&record[1])) {
            (Some(t), Some(v)) => points.push([t, v]),
            _ => return Err(bad()),
        }
        lines.push(line);
    }
    Pcf::new(points).map_err(|e| {
        let location = match &e {
            PcfError::NonIncreasingTimes { row } | PcfError::NonFinite { row } => {
                Some(format!("line {}", lines[*row]))
            }
            PcfError::NonZeroStart => Some(format!("line {}", lines[0])),
            _ => None,
        };
        format_error(path, location, e.to_string())
    })
}

/// `*.csv` files in `dir`, sorted by file name.
pub fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x == "csv") {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Reads a directory of CSV files at precision `kind`.
pub fn read_csv_dir(dir: &Path, kind: ScalarKind) -> Result<PcfCollection> {
    let files = csv_files(dir)?;
    Ok(match kind {
        ScalarKind::F32 => PcfCollection::F32(
            files
                .iter()
                .map(|f| read_csv_pcf(f))
                .collect::<Result<_>>()?,
        ),
        ScalarKind::F64 => PcfCollection::F64(
            files
                .iter()
                .map(|f| read_csv_pcf(f))
                .collect::<Result<_>>()?,
        ),
    })
}

/// Reads a collection from a JSON file or a CSV directory.
pub fn read_collection(path: &Path, csv_kind: ScalarKind) -> Result<PcfCollection> {
    if path.is_dir() {
        read_csv_dir(path, csv_kind)
    } else {
        read_json(path)
    }
}

/// Reads and concatenates several collections, which must share a scalar
/// kind.
pub fn read_collections(paths: &[PathBuf], csv_kind: ScalarKind) -> Result<PcfCollection> {
    let mut out: Option<PcfCollection> = None;
    for path in paths {
        let c = read_collection(path, csv_kind)?;
        out = Some(match out {
            None => c,
            Some(prev) => prev.merge(c)?,
        });
    }
    Ok(out.unwrap_or(match csv_kind {
        ScalarKind::F32 => PcfCollection::F32(Vec::new()),
        ScalarKind::F64 => PcfCollection::F64(Vec::new()),
    }))
}

fn push_rows<T: TextScalar>(out: &mut String, pcf: &Pcf<T>) {
    out.push('[');
    for (i, p) in pcf.as_matrix().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push('[');
        push_number(out, p[0]);
        out.push(',');
        push_number(out, p[1]);
        out.push(']');
    }
    out.push(']');
}

/// JSON collection document, one PCF per line.
pub fn collection_json<T: TextScalar>(pcfs: &[Pcf<T>]) -> String {
    let mut out = format!("{{\"dtype\":\"{}\",\"pcfs\":[", T::DTYPE);
    for (k, pcf) in pcfs.iter().enumerate() {
        out.push_str(if k == 0 { "\n" } else { ",\n" });
        push_rows(&mut out, pcf);
    }
    out.push_str("\n]}\n");
    out
}

/// `t,v` CSV text of one PCF.
pub fn pcf_csv<T: TextScalar>(pcf: &Pcf<T>) -> String {
    let mut out = String::from("t,v\n");
    for p in pcf.as_matrix() {
        push_number(&mut out, p[0]);
        out.push(',');
        push_number(&mut out, p[1]);
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(contents.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_json(path: &Path, collection: &PcfCollection) -> Result<()> {
    let text = match collection {
        PcfCollection::F32(v) => collection_json(v),
        PcfCollection::F64(v) => collection_json(v),
    };
    write_file(path, &text)
}

/// Writes `pcf_0.csv, pcf_1.csv, …` into `dir` (created if missing), with
/// indices zero-padded so that file name order is index order.
pub fn write_csv_dir(dir: &Path, collection: &PcfCollection) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let width = collection.len().saturating_sub(1).to_string().len();
    let name = |k: usize| dir.join(format!("pcf_{k:0width$}.csv"));
    match collection {
        PcfCollection::F32(v) => v
            .iter()
            .enumerate()
            .try_for_each(|(k, f)| write_file(&name(k), &pcf_csv(f))),
        PcfCollection::F64(v) => v
            .iter()
            .enumerate()
            .try_for_each(|(k, f)| write_file(&name(k), &pcf_csv(f))),
    }
}

/// Writes a single PCF as a `t,v` CSV file.
pub fn write_csv_pcf<T: TextScalar>(path: &Path, pcf: &Pcf<T>) -> Result<()> {
    write_file(path, &pcf_csv(pcf))
}

/// Matrix output encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Json,
}

/// Headerless row-major CSV.
pub fn matrix_csv<T: TextScalar>(m: &PairwiseMatrix<T>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        for (j, &x) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            push_number(&mut out, x);
        }
        out.push('\n');
    }
    out
}

/// Nested JSON rows, one row per line.
pub fn matrix_json<T: TextScalar>(m: &PairwiseMatrix<T>) -> String {
    let mut out = String::from("[");
    for (i, row) in m.rows().enumerate() {
        out.push_str(if i == 0 { "\n[" } else { ",\n[" });
        for (j, &x) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            push_number(&mut out, x);
        }
        out.push(']');
    }
    out.push_str("\n]\n");
    out
}

pub fn write_matrix<T: TextScalar>(
    path: &Path,
    m: &PairwiseMatrix<T>,
    format: MatrixFormat,
) -> Result<()> {
    let text = match format {
        MatrixFormat::Csv => matrix_csv(m),
        MatrixFormat::Json => matrix_json(m),
    };
    write_file(path, &text)
}

/// Reads a headerless numeric CSV matrix as rows.
pub fn read_matrix_csv<T: TextScalar>(path: &Path) -> Result<Vec<Vec<T>>> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| format!("line {}", p.line()));
            format_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .map(|cell| {
                parse_scalar::<T>(cell).ok_or_else(|| {
                    format_error(
                        path,
                        Some(format!("line {line}")),
                        format!("not a number: {cell:?}"),
                    )
                })
            })
            .collect::<Result<Vec<T>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Reads a nested-rows JSON matrix.
pub fn read_matrix_json<T: TextScalar>(path: &Path) -> Result<Vec<Vec<T>>> {
    let text = read_text(path)?;
    let rows: Vec<Vec<&RawValue>> = serde_json::from_str(&text).map_err(|e| {
        format_error(
            path,
            Some(format!("line {}, column {}", e.line(), e.column())),
            e.to_string(),
        )
    })?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .map(|cell| {
                    parse_scalar::<T>(cell.get()).ok_or_else(|| {
                        format_error(
                            path,
                            Some(format!("row {i}")),
                            format!("not a number: {}", cell.get()),
                        )
                    })
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_rendering() {
        assert_eq!(format_number(34.0f64), "34");
        assert_eq!(format_number(0.1f64), "0.1");
        assert_eq!(format_number(-0.0f64), "-0");
        assert_eq!(format_number(0.1f32), "0.1");
        assert_eq!(format_number(1e-7f64), "1e-7");
        assert_eq!(format_number(2.5e20f64), "2.5e20");
        for x in [f64::MIN_POSITIVE, 5e-324, f64::MAX, 1.0 / 3.0, 12345.678] {
            assert_eq!(
                format_number(x).parse::<f64>().unwrap().to_bits(),
                x.to_bits()
            );
        }
    }

    #[test]
    fn json_collection_text() {
        let f = Pcf::from_rows(&[[0.0f64, 5.0], [2.0, 3.0], [5.0, 0.0]]).unwrap();
        let text = collection_json(&[f.clone(), Pcf::zero()]);
        assert_eq!(
            text,
            "{\"dtype\":\"f64\",\"pcfs\":[\n[[0,5],[2,3],[5,0]],\n[[0,0]]\n]}\n"
        );
        assert_eq!(
            collection_json::<f32>(&[]),
            "{\"dtype\":\"f32\",\"pcfs\":[\n]}\n"
        );
    }

    #[test]
    fn matrix_text() {
        let items = vec![
            Pcf::from_rows(&[[0.0f64, 5.0], [2.0, 3.0], [5.0, 0.0]]).unwrap(),
            Pcf::from_rows(&[[0.0, 4.0], [2.0, 3.0], [3.0, 1.0], [5.0, 0.0]]).unwrap(),
        ];
        let m = crate::pdist(&items, 1.0, Some(1)).unwrap();
        assert_eq!(matrix_csv(&m), "0,6\n6,0\n");
        assert_eq!(matrix_json(&m), "[\n[0,6],\n[6,0]\n]\n");
    }

    #[test]
    fn merge_rejects_mixed() {
        let a = PcfCollection::F32(vec![Pcf::zero()]);
        let b = PcfCollection::F64(vec![Pcf::zero()]);
        assert_eq!(
            a.merge(b),
            Err(PcfError::MixedPrecision {
                left: ScalarKind::F32,
                right: ScalarKind::F64
            })
        );
    }
}
