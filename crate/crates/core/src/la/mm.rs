//! Matrix Market reader and writer.
//!
//! Sparse matrices use the `coordinate real {general|symmetric}` formats and
//! dense data (vectors and column-major matrices) the `array real general` format.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::la::{DenseMatrix, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
}

fn mm_err(line: usize, message: impl Into<String>) -> Error {
    Error::MatrixMarket {
        line,
        message: message.into(),
    }
}

struct Header {
    format: String,
    symmetry: Symmetry,
}

fn parse_header(line: &str) -> Result<Header> {
    let toks: Vec<String> = line.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(mm_err(1, "missing %%MatrixMarket matrix banner"));
    }
    if toks[3] != "real" && toks[3] != "integer" {
        return Err(mm_err(1, format!("unsupported field '{}'", toks[3])));
    }
    let symmetry = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(mm_err(1, format!("unsupported symmetry '{other}'"))),
    };
    Ok(Header {
        format: toks[2].clone(),
        symmetry,
    })
}

/// Data lines with their 1-based line numbers, comments and blanks skipped.
fn data_lines<R: Read>(reader: R) -> Result<(Header, Vec<(usize, String)>)> {
    let mut lines = BufReader::new(reader).lines();
    let first = lines.next().ok_or_else(|| mm_err(1, "empty file"))??;
    let header = parse_header(&first)?;
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        out.push((k + 2, t.to_string()));
    }
    Ok((header, out))
}

fn parse_usize(tok: Option<&str>, line: usize) -> Result<usize> {
    tok.ok_or_else(|| mm_err(line, "missing integer"))?
        .parse()
        .map_err(|_| mm_err(line, "bad integer"))
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let v: f64 = tok
        .ok_or_else(|| mm_err(line, "missing value"))?
        .parse()
        .map_err(|_| mm_err(line, "bad value"))?;
    if !v.is_finite() {
        return Err(mm_err(line, "non-finite value"));
    }
    Ok(v)
}

pub fn read_sparse<R: Read>(reader: R) -> Result<SparseMatrix> {
    let (header, lines) = data_lines(reader)?;
    if header.format != "coordinate" {
        return Err(mm_err(1, "expected coordinate format"));
    }
    let (size_line, size) = lines.first().ok_or_else(|| mm_err(2, "missing size line"))?;
    let mut it = size.split_whitespace();
    let nrows = parse_usize(it.next(), *size_line)?;
    let ncols = parse_usize(it.next(), *size_line)?;
    let nnz = parse_usize(it.next(), *size_line)?;
    if lines.len() - 1 != nnz {
        return Err(mm_err(*size_line, format!("expected {nnz} entries, found {}", lines.len() - 1)));
    }
    let mut t = Vec::with_capacity(nnz * 2);
    for (ln, l) in &lines[1..] {
        let mut it = l.split_whitespace();
        let i = parse_usize(it.next(), *ln)?;
        let j = parse_usize(it.next(), *ln)?;
        let v = parse_f64(it.next(), *ln)?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(mm_err(*ln, format!("index ({i}, {j}) out of range")));
        }
        t.push((i - 1, j - 1, v));
        if header.symmetry == Symmetry::Symmetric && i != j {
            t.push((j - 1, i - 1, v));
        }
    }
    SparseMatrix::from_triplets(nrows, ncols, &t)
}

/// Writes `a`; with `Symmetry::Symmetric` only the lower triangle is stored.
pub fn write_sparse<W: Write>(mut w: W, a: &SparseMatrix, symmetry: Symmetry) -> Result<()> {
    let kind = match symmetry {
        Symmetry::General => "general",
        Symmetry::Symmetric => {
            if !a.is_symmetric(0.0) {
                return Err(Error::InvalidInput("matrix is not exactly symmetric".into()));
            }
            "symmetric"
        }
    };
    let mut body = String::new();
    let mut count = 0usize;
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if symmetry == Symmetry::Symmetric && j > i {
                continue;
            }
            // {:e} prints the shortest round-tripping representation
            writeln!(body, "{} {} {:e}", i + 1, j + 1, v).unwrap();
            count += 1;
        }
    }
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), count)?;
    w.write_all(body.as_bytes())?;
    Ok(())
}

pub fn read_dense<R: Read>(reader: R) -> Result<DenseMatrix> {
    let (header, lines) = data_lines(reader)?;
    if header.format != "array" || header.symmetry != Symmetry::General {
        return Err(mm_err(1, "expected array real general"));
    }
    let (size_line, size) = lines.first().ok_or_else(|| mm_err(2, "missing size line"))?;
    let mut it = size.split_whitespace();
    let nrows = parse_usize(it.next(), *size_line)?;
    let ncols = parse_usize(it.next(), *size_line)?;
    if lines.len() - 1 != nrows * ncols {
        return Err(mm_err(*size_line, "entry count does not match size"));
    }
    let values = lines[1..]
        .iter()
        .map(|(ln, l)| parse_f64(l.split_whitespace().next(), *ln))
        .collect::<Result<Vec<_>>>()?;
    DenseMatrix::from_col_major(nrows, ncols, values)
}

pub fn write_dense<W: Write>(mut w: W, a: &DenseMatrix) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", a.nrows(), a.ncols())?;
    let mut body = String::new();
    for v in a.values() {
        writeln!(body, "{v:e}").unwrap();
    }
    w.write_all(body.as_bytes())?;
    Ok(())
}

pub fn read_vector<R: Read>(reader: R) -> Result<Vec<f64>> {
    let d = read_dense(reader)?;
    if d.ncols() != 1 {
        return Err(Error::InvalidInput(format!("expected a column vector, got {} columns", d.ncols())));
    }
    Ok(d.values().to_vec())
}

pub fn write_vector<W: Write>(w: W, x: &[f64]) -> Result<()> {
    write_dense(w, &DenseMatrix::from_col_major(x.len(), 1, x.to_vec())?)
}

pub fn read_sparse_file(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    read_sparse(std::fs::File::open(path)?)
}

pub fn write_sparse_file(path: impl AsRef<Path>, a: &SparseMatrix, symmetry: Symmetry) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_sparse(f, a, symmetry)
}

pub fn read_vector_file(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    read_vector(std::fs::File::open(path)?)
}

pub fn write_vector_file(path: impl AsRef<Path>, x: &[f64]) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_vector(f, x)
}
