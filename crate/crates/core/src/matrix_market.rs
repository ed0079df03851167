//! Matrix Market coordinate-format reader and writer.
//!
//! Supports `real` and `integer` fields with `general`, `symmetric` and
//! `skew-symmetric` storage. Symmetric variants are expanded to general
//! storage on read; duplicate coordinate entries are summed; indices are
//! 1-based in files and 0-based in memory.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::csc::CscMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Reads a Matrix Market coordinate file into a [`CscMatrix`].
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CscMatrix> {
    let path = path.as_ref();
    let label = path.display().to_string();
    let file = File::open(path).map_err(|source| Error::Io {
        path: label.clone(),
        source,
    })?;
    read_matrix_market_from(BufReader::new(file), &label)
}

/// Reads Matrix Market data from any reader; `label` names the source in
/// error messages.
pub fn read_matrix_market_from(reader: impl Read, label: &str) -> Result<CscMatrix> {
    let reader = BufReader::new(reader);
    let mut lines = reader.lines().enumerate();

    // header
    let (header_no, header) = loop {
        match lines.next() {
            Some((no, line)) => {
                let line = line.map_err(|source| Error::Io {
                    path: label.to_string(),
                    source,
                })?;
                if !line.trim().is_empty() {
                    break (no + 1, line);
                }
            }
            None => return Err(parse_err(label, 1, "empty file")),
        }
    };
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_lowercase()).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_err(
            label,
            header_no,
            "header must start with %%MatrixMarket",
        ));
    }
    if tokens[1] != "matrix" {
        return Err(parse_err(label, header_no, "expected object 'matrix'"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(
            label,
            header_no,
            format!("unsupported format '{}': only 'coordinate' is supported", tokens[2]),
        ));
    }
    match tokens[3].as_str() {
        "real" | "integer" => {}
        other => {
            return Err(parse_err(
                label,
                header_no,
                format!("unsupported field '{other}': only 'real' and 'integer' are supported"),
            ))
        }
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => {
            return Err(parse_err(
                label,
                header_no,
                format!("unsupported symmetry '{other}'"),
            ))
        }
    };

    // size line
    let (mut n_rows, mut n_cols, mut declared_nnz) = (0usize, 0usize, 0usize);
    let mut size_seen = false;
    let mut declared_seen = 0usize;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for (no, line) in lines {
        let line_no = no + 1;
        let line = line.map_err(|source| Error::Io {
            path: label.to_string(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        if !size_seen {
            n_rows = fields
                .next()
                .ok_or_else(|| parse_err(label, line_no, "missing row count"))?
                .parse()
                .map_err(|_| parse_err(label, line_no, "cannot parse row count"))?;
            n_cols = fields
                .next()
                .ok_or_else(|| parse_err(label, line_no, "missing column count"))?
                .parse()
                .map_err(|_| parse_err(label, line_no, "cannot parse column count"))?;
            declared_nnz = fields
                .next()
                .ok_or_else(|| parse_err(label, line_no, "missing entry count"))?
                .parse()
                .map_err(|_| parse_err(label, line_no, "cannot parse entry count"))?;
            if fields.next().is_some() {
                return Err(parse_err(label, line_no, "trailing tokens on size line"));
            }
            size_seen = true;
            triplets.reserve(declared_nnz);
            continue;
        }
        if declared_seen == declared_nnz {
            return Err(parse_err(
                label,
                line_no,
                format!("more entries than the declared {declared_nnz}"),
            ));
        }
        let i: usize = fields
            .next()
            .ok_or_else(|| parse_err(label, line_no, "missing row index"))?
            .parse()
            .map_err(|_| parse_err(label, line_no, "cannot parse row index"))?;
        let j: usize = fields
            .next()
            .ok_or_else(|| parse_err(label, line_no, "missing column index"))?
            .parse()
            .map_err(|_| parse_err(label, line_no, "cannot parse column index"))?;
        let v: f64 = fields
            .next()
            .ok_or_else(|| parse_err(label, line_no, "missing value"))?
            .parse()
            .map_err(|_| parse_err(label, line_no, "cannot parse value"))?;
        if fields.next().is_some() {
            return Err(parse_err(label, line_no, "trailing tokens on entry line"));
        }
        if i < 1 || i > n_rows {
            return Err(parse_err(
                label,
                line_no,
                format!("row index {i} outside 1..={n_rows}"),
            ));
        }
        if j < 1 || j > n_cols {
            return Err(parse_err(
                label,
                line_no,
                format!("column index {j} outside 1..={n_cols}"),
            ));
        }
        let (r, c) = (i - 1, j - 1);
        declared_seen += 1;
        triplets.push((r, c, v));
        match symmetry {
            Symmetry::General => {}
            Symmetry::Symmetric => {
                if r != c {
                    triplets.push((c, r, v));
                }
            }
            Symmetry::SkewSymmetric => {
                if r != c {
                    triplets.push((c, r, -v));
                }
            }
        }
    }
    if !size_seen {
        return Err(parse_err(label, 0, "missing size line"));
    }
    if declared_seen != declared_nnz {
        return Err(parse_err(
            label,
            0,
            format!("file declares {declared_nnz} entries but contains {declared_seen}"),
        ));
    }
    CscMatrix::from_triplets(n_rows, n_cols, &triplets)
}

/// Writes a matrix in coordinate `real general` form, 1-based. Values are
/// printed with Rust's shortest round-trip formatting, so a write/read cycle
/// reproduces the matrix bit for bit.
pub fn write_matrix_market(a: &CscMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let label = path.display().to_string();
    let file = File::create(path).map_err(|source| Error::Io {
        path: label.clone(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    let io_err = |source| Error::Io {
        path: label.clone(),
        source,
    };
    writeln!(w, "%%MatrixMarket matrix coordinate real general").map_err(io_err)?;
    writeln!(w, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz()).map_err(io_err)?;
    for (r, c, v) in a.iter() {
        writeln!(w, "{} {} {}", r + 1, c + 1, v).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}
