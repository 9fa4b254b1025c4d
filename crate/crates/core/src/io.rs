//! CSV reading and writing of numeric matrices.
//!
//! Dialect: comma separated, '.' decimal point, optional header row. A first row whose
//! fields do not all parse as numbers is taken as the header.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Parsed matrix plus the header, if one was present.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvMatrix {
    pub header: Option<Vec<String>>,
    pub matrix: Matrix,
}

fn parse_field(s: &str) -> Option<f64> {
    let t = s.trim();
    // reject Rust-only spellings ("inf", "NaN", "infinity") so the dialect stays portable
    if t.is_empty() || t.bytes().any(|b| b.is_ascii_alphabetic() && b != b'e' && b != b'E') {
        return None;
    }
    t.parse::<f64>().ok()
}

/// Reads a numeric matrix; every data row must have the same width and only finite values.
pub fn read_matrix<R: Read>(reader: R) -> Result<CsvMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut header = None;
    let mut data = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("csv record {}: {e}", line + 1)))?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let parsed: Vec<Option<f64>> = rec.iter().map(parse_field).collect();
        if parsed.iter().any(Option::is_none) {
            if line == 0 && header.is_none() {
                header = Some(rec.iter().map(str::to_owned).collect());
                width = Some(rec.len());
                continue;
            }
            let bad = rec.iter().zip(&parsed).find(|(_, p)| p.is_none()).map(|(f, _)| f).unwrap_or("");
            return Err(Error::Parse(format!("line {}: '{bad}' is not a finite number", line + 1)));
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(Error::Parse(format!("line {}: expected {w} fields, found {}", line + 1, rec.len())));
        }
        data.extend(parsed.into_iter().flatten());
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Parse("no data rows".into()));
    }
    let matrix = Matrix::from_row_major(rows, width.unwrap_or(0), data)?;
    Ok(CsvMatrix { header, matrix })
}

/// Reads a matrix from an in-memory string.
pub fn read_matrix_str(s: &str) -> Result<CsvMatrix> {
    read_matrix(s.as_bytes())
}

/// Shortest decimal text that parses back to exactly `x` (at most 17 significant digits).
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Writes a header `prefix1..prefixd` and one line per row.
pub fn write_matrix<W: Write>(mut w: W, m: &Matrix, prefix: &str) -> Result<()> {
    let header: Vec<String> = (1..=m.ncols()).map(|j| format!("{prefix}{j}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|&x| format_f64(x)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}
