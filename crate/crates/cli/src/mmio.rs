//! Matrix Market reading and writing (coordinate and array formats, real,
//! integer and pattern fields, general and symmetric storage).

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use hodlrkit::graph::SparsePattern;
use hodlrkit::matrix::DenseMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MmError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {message}")]
    DimensionMismatch { line: usize, message: String },
    #[error("expected a square matrix, found {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
}

/// Coordinate data as stored in the file (0-based, no mirroring applied).
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateMatrix {
    pub rows: usize,
    pub cols: usize,
    pub field: Field,
    pub symmetry: Symmetry,
    pub entries: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixMarket {
    Coordinate(CoordinateMatrix),
    Array(DenseMatrix),
}

impl MatrixMarket {
    /// Dense view of either format; symmetric storage is mirrored.
    pub fn into_dense(self) -> DenseMatrix {
        match self {
            MatrixMarket::Array(m) => m,
            MatrixMarket::Coordinate(c) => {
                let mut m = DenseMatrix::zeros(c.rows, c.cols);
                for &(i, j, v) in &c.entries {
                    m[(i, j)] += v;
                    if c.symmetry == Symmetry::Symmetric && i != j {
                        m[(j, i)] += v;
                    }
                }
                m
            }
        }
    }

    /// Sparse graph of a square matrix. General coordinate patterns are
    /// symmetrized by union; array input keeps every nonzero off-diagonal.
    pub fn into_pattern(self) -> Result<SparsePattern, MmError> {
        match self {
            MatrixMarket::Coordinate(c) => {
                if c.rows != c.cols {
                    return Err(MmError::NotSquare {
                        rows: c.rows,
                        cols: c.cols,
                    });
                }
                let pattern = if c.field == Field::Pattern {
                    SparsePattern::from_edges(c.rows, c.entries.iter().map(|&(i, j, _)| (i, j)))
                } else {
                    SparsePattern::from_triplets(
                        c.rows,
                        &c.entries,
                        c.symmetry == Symmetry::Symmetric,
                    )
                };
                Ok(pattern.expect("indices validated while parsing"))
            }
            MatrixMarket::Array(m) => {
                if !m.is_square() {
                    return Err(MmError::NotSquare {
                        rows: m.rows(),
                        cols: m.cols(),
                    });
                }
                let n = m.rows();
                let mut triplets = Vec::new();
                for j in 0..n {
                    for i in 0..n {
                        if m[(i, j)] != 0.0 {
                            triplets.push((i, j, m[(i, j)]));
                        }
                    }
                }
                Ok(SparsePattern::from_triplets(n, &triplets, false).expect("in range"))
            }
        }
    }
}

pub fn read_matrix_market(path: &Path) -> Result<MatrixMarket, MmError> {
    let text = fs::read_to_string(path).map_err(|source| MmError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_matrix_market(&text)
}

fn parse_err(line: usize, message: impl Into<String>) -> MmError {
    MmError::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_matrix_market(text: &str) -> Result<MatrixMarket, MmError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    let coordinate = match tokens[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err(1, format!("unsupported format `{other}`"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" if coordinate => Field::Pattern,
        other => return Err(parse_err(1, format!("unsupported field `{other}`"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry `{other}`"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim_start();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = data.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims = parse_usizes(size_line, size)?;
    let expected_len = if coordinate { 3 } else { 2 };
    if dims.len() != expected_len {
        return Err(parse_err(
            size_line,
            format!("size line needs {expected_len} integers, found {}", dims.len()),
        ));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if symmetry == Symmetry::Symmetric && rows != cols {
        return Err(MmError::DimensionMismatch {
            line: size_line,
            message: format!("symmetric storage needs a square matrix, header says {rows}x{cols}"),
        });
    }

    if coordinate {
        let nnz = dims[2];
        let mut entries = Vec::with_capacity(nnz);
        let mut last_line = size_line;
        for (line, body) in data {
            last_line = line;
            if entries.len() == nnz {
                return Err(parse_err(line, format!("more entries than the {nnz} declared")));
            }
            let parts: Vec<&str> = body.split_whitespace().collect();
            let want = if field == Field::Pattern { 2 } else { 3 };
            if parts.len() != want {
                return Err(parse_err(line, format!("expected {want} fields, found {}", parts.len())));
            }
            let i = parse_index(line, parts[0])?;
            let j = parse_index(line, parts[1])?;
            if i >= rows || j >= cols {
                return Err(MmError::DimensionMismatch {
                    line,
                    message: format!("entry ({}, {}) outside the {rows}x{cols} header", i + 1, j + 1),
                });
            }
            let v = if field == Field::Pattern {
                1.0
            } else {
                parse_value(line, parts[2])?
            };
            entries.push((i, j, v));
        }
        if entries.len() != nnz {
            return Err(parse_err(
                last_line + 1,
                format!("declared {nnz} entries but found {}", entries.len()),
            ));
        }
        Ok(MatrixMarket::Coordinate(CoordinateMatrix {
            rows,
            cols,
            field,
            symmetry,
            entries,
        }))
    } else {
        let mut m = DenseMatrix::zeros(rows, cols);
        let mut slots: Vec<(usize, usize)> = Vec::new();
        for j in 0..cols {
            let start = if symmetry == Symmetry::Symmetric { j } else { 0 };
            for i in start..rows {
                slots.push((i, j));
            }
        }
        let mut next = 0;
        let mut last_line = size_line;
        for (line, body) in data {
            last_line = line;
            for tok in body.split_whitespace() {
                let Some(&(i, j)) = slots.get(next) else {
                    return Err(MmError::DimensionMismatch {
                        line,
                        message: format!("more values than the {} the header implies", slots.len()),
                    });
                };
                let v = parse_value(line, tok)?;
                m[(i, j)] = v;
                if symmetry == Symmetry::Symmetric {
                    m[(j, i)] = v;
                }
                next += 1;
            }
        }
        if next != slots.len() {
            return Err(MmError::DimensionMismatch {
                line: last_line + 1,
                message: format!("expected {} values, found {next}", slots.len()),
            });
        }
        Ok(MatrixMarket::Array(m))
    }
}

fn parse_usizes(line: usize, s: &str) -> Result<Vec<usize>, MmError> {
    s.split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(line, format!("`{t}` is not a non-negative integer"))))
        .collect()
}

fn parse_index(line: usize, s: &str) -> Result<usize, MmError> {
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(parse_err(line, format!("`{s}` is not a 1-based index"))),
        Ok(k) => Ok(k - 1),
    }
}

fn parse_value(line: usize, s: &str) -> Result<f64, MmError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(line, format!("`{s}` is not a finite number")))
}

/// Renders with 17 significant digits, enough to round-trip any `f64`.
fn fmt_value(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").expect("writing to a String");
}

pub fn dense_to_string(m: &DenseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    writeln!(out, "{} {}", m.rows(), m.cols()).expect("writing to a String");
    for &v in m.as_slice() {
        fmt_value(&mut out, v);
        out.push('\n');
    }
    out
}

/// Lower triangle plus diagonal in coordinate symmetric form. Patterns
/// without values are written with the `pattern` field.
pub fn pattern_to_string(p: &SparsePattern) -> String {
    let mut entries: Vec<(usize, usize, Option<f64>)> = Vec::new();
    for j in 0..p.n() {
        if let Some(d) = p.diagonal() {
            if d[j] != 0.0 {
                entries.push((j, j, Some(d[j])));
            }
        }
        for (i, v) in p.row_entries(j) {
            if i > j {
                entries.push((i, j, p.has_values().then_some(v)));
            }
        }
    }
    let field = if p.has_values() { "real" } else { "pattern" };
    let mut out = format!("%%MatrixMarket matrix coordinate {field} symmetric\n");
    writeln!(out, "{} {} {}", p.n(), p.n(), entries.len()).expect("writing to a String");
    for (i, j, v) in entries {
        write!(out, "{} {}", i + 1, j + 1).expect("writing to a String");
        if let Some(v) = v {
            out.push(' ');
            fmt_value(&mut out, v);
        }
        out.push('\n');
    }
    out
}

pub fn write_string(path: &Path, contents: &str) -> Result<(), MmError> {
    let io_err = |source| MmError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io_err)?;
    f.write_all(contents.as_bytes()).map_err(io_err)
}

pub fn write_dense(path: &Path, m: &DenseMatrix) -> Result<(), MmError> {
    write_string(path, &dense_to_string(m))
}

pub fn write_pattern(path: &Path, p: &SparsePattern) -> Result<(), MmError> {
    write_string(path, &pattern_to_string(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_single_entry() {
        let m = parse_matrix_market("%%MatrixMarket matrix coordinate real symmetric\n1 1 1\n1 1 2.0\n").unwrap();
        let p = m.clone().into_pattern().unwrap();
        assert_eq!(p.n(), 1);
        assert_eq!(p.value(0, 0), 2.0);
        assert_eq!(m.into_dense()[(0, 0)], 2.0);
    }

    #[test]
    fn array_is_column_major() {
        let m = parse_matrix_market("%%MatrixMarket matrix array real general\n% note\n2 2\n1\n3\n2\n4\n").unwrap();
        assert_eq!(m.into_dense(), DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]));
    }

    #[test]
    fn wrong_entry_count_names_the_line() {
        let err = parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n2 2 1.0\n").unwrap_err();
        assert!(matches!(err, MmError::Parse { line: 5, .. }), "{err}");
        let err = parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1.0\n2 2 1.0\n").unwrap_err();
        assert!(matches!(err, MmError::Parse { line: 4, .. }), "{err}");
        assert!(err.to_string().starts_with("line 4"));
    }

    #[test]
    fn header_and_bounds_errors() {
        assert!(matches!(
            parse_matrix_market("%%MatrixMarket matrix coordinate complex general\n1 1 0\n"),
            Err(MmError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n"),
            Err(MmError::DimensionMismatch { line: 3, .. })
        ));
        assert!(matches!(
            parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n"),
            Err(MmError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n"),
            Err(MmError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn general_pattern_is_symmetrized() {
        let m = parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n3 3 2\n1 2\n3 2\n").unwrap();
        let p = m.into_pattern().unwrap();
        assert_eq!(p.neighbors(1), &[0, 2]);
        assert_eq!(p.neighbors(0), &[1]);
    }

    #[test]
    fn dense_round_trip_is_exact() {
        let m = DenseMatrix::from_fn(3, 4, |i, j| (i as f64 + 0.1).powi(j as i32 + 1) / 3.0 - 1e-300 * j as f64);
        let back = parse_matrix_market(&dense_to_string(&m)).unwrap().into_dense();
        assert_eq!(back, m);
    }

    #[test]
    fn pattern_round_trip() {
        let p = SparsePattern::from_triplets(3, &[(0, 0, 2.0), (1, 0, -1.0 / 3.0), (2, 1, -1.0), (2, 2, 2.0)], true).unwrap();
        let back = parse_matrix_market(&pattern_to_string(&p)).unwrap().into_pattern().unwrap();
        assert_eq!(back.to_dense(), p.to_dense());
        let bare = SparsePattern::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let back = parse_matrix_market(&pattern_to_string(&bare)).unwrap().into_pattern().unwrap();
        assert_eq!(back, bare);
    }
}
