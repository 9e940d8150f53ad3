//! Matrix Market files.
//!
//! Matrices use the coordinate format with 1-based indices; symmetric files
//! are expanded to general storage and duplicate entries are summed.
//! Vectors are read from either a dense `array` file or plain text with one
//! value per line.

use std::fmt::Write as _;

use vtm_core::CsrMatrix;

use crate::error::{FormatError, Result};

/// Storage declared in a coordinate header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
}

struct Header {
    array: bool,
    symmetry: Symmetry,
}

fn parse_header(line: &str) -> Result<Header> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(FormatError::parse(1, "missing %%MatrixMarket banner"));
    }
    if words.len() != 5 || words[1] != "matrix" {
        return Err(FormatError::parse(1, format!("malformed header '{}'", line.trim())));
    }
    let array = match words[2].as_str() {
        "coordinate" => false,
        "array" => true,
        other => return Err(FormatError::Unsupported(format!("storage '{other}'"))),
    };
    if words[3] != "real" {
        return Err(FormatError::parse(1, format!("field '{}' is not real", words[3])));
    }
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(FormatError::Unsupported(format!("symmetry '{other}'"))),
    };
    Ok(Header { array, symmetry })
}

/// Data lines with their 1-based line numbers, skipping comments and blanks.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'))
}

fn field<T: std::str::FromStr>(line: usize, word: Option<&str>, what: &str) -> Result<T> {
    let w = word.ok_or_else(|| FormatError::parse(line, format!("missing {what}")))?;
    w.parse().map_err(|_| FormatError::parse(line, format!("bad {what} '{w}'")))
}

fn real(line: usize, word: Option<&str>) -> Result<f64> {
    let v: f64 = field(line, word, "value")?;
    if !v.is_finite() {
        return Err(FormatError::parse(line, "non-finite value"));
    }
    Ok(v)
}

/// Parses a coordinate matrix.
pub fn read_matrix(text: &str) -> Result<CsrMatrix> {
    let header = parse_header(text.lines().next().unwrap_or(""))?;
    if header.array {
        return Err(FormatError::Unsupported("matrix array real general".into()));
    }
    let mut lines = data_lines(text);
    let (ln, size) = lines.next().ok_or_else(|| FormatError::parse(2, "missing size line"))?;
    let mut w = size.split_whitespace();
    let nrows: usize = field(ln, w.next(), "row count")?;
    let ncols: usize = field(ln, w.next(), "column count")?;
    let nnz: usize = field(ln, w.next(), "entry count")?;
    if w.next().is_some() {
        return Err(FormatError::parse(ln, "size line has extra fields"));
    }
    if header.symmetry == Symmetry::Symmetric && nrows != ncols {
        return Err(FormatError::parse(ln, "symmetric matrix must be square"));
    }
    let mut t = Vec::with_capacity(nnz * 2);
    let mut count = 0;
    for (ln, l) in lines {
        let mut w = l.split_whitespace();
        let i: usize = field(ln, w.next(), "row index")?;
        let j: usize = field(ln, w.next(), "column index")?;
        let v = real(ln, w.next())?;
        if w.next().is_some() {
            return Err(FormatError::parse(ln, "entry has extra fields"));
        }
        if i == 0 || i > nrows || j == 0 || j > ncols {
            return Err(FormatError::parse(ln, format!("index ({i}, {j}) out of range for {nrows}x{ncols}")));
        }
        if header.symmetry == Symmetry::Symmetric && j > i {
            return Err(FormatError::parse(ln, format!("entry ({i}, {j}) above the diagonal in a symmetric file")));
        }
        t.push((i - 1, j - 1, v));
        if header.symmetry == Symmetry::Symmetric && i != j {
            t.push((j - 1, i - 1, v));
        }
        count += 1;
    }
    if count != nnz {
        return Err(FormatError::parse(ln, format!("header declares {nnz} entries, found {count}")));
    }
    Ok(CsrMatrix::from_triplets(nrows, ncols, &t)?)
}

/// Writes a coordinate matrix. With [`Symmetry::Symmetric`] only the lower
/// triangle is written; the caller asserts that `m` is symmetric.
pub fn write_matrix(m: &CsrMatrix, symmetry: Symmetry) -> String {
    let entries: Vec<_> = m.triplets().filter(|&(i, j, _)| symmetry == Symmetry::General || j <= i).collect();
    let kind = match symmetry {
        Symmetry::General => "general",
        Symmetry::Symmetric => "symmetric",
    };
    let mut s =
        format!("%%MatrixMarket matrix coordinate real {kind}\n{} {} {}\n", m.nrows(), m.ncols(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v);
    }
    s
}

/// Parses a vector from a Matrix Market array file (one column) or from
/// plain text with one value per line.
pub fn read_vector(text: &str) -> Result<Vec<f64>> {
    let first = text.lines().next().unwrap_or("");
    if !first.trim_start().starts_with("%%") {
        return text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#') && !l.starts_with('%'))
            .map(|(ln, l)| {
                let mut w = l.split_whitespace();
                let v = real(ln, w.next())?;
                if w.next().is_some() {
                    return Err(FormatError::parse(ln, "expected one value per line"));
                }
                Ok(v)
            })
            .collect();
    }
    let header = parse_header(first)?;
    let mut lines = data_lines(text);
    let (ln, size) = lines.next().ok_or_else(|| FormatError::parse(2, "missing size line"))?;
    let mut w = size.split_whitespace();
    if header.array {
        let n: usize = field(ln, w.next(), "row count")?;
        let cols: usize = field(ln, w.next(), "column count")?;
        if cols != 1 {
            return Err(FormatError::parse(ln, format!("vector must have one column, found {cols}")));
        }
        let v: Vec<f64> = lines.map(|(ln, l)| real(ln, l.split_whitespace().next())).collect::<Result<_>>()?;
        if v.len() != n {
            return Err(FormatError::parse(ln, format!("header declares {n} values, found {}", v.len())));
        }
        Ok(v)
    } else {
        let m = read_matrix(text)?;
        if m.ncols() != 1 {
            return Err(FormatError::parse(ln, format!("vector must have one column, found {}", m.ncols())));
        }
        Ok((0..m.nrows()).map(|i| m.get(i, 0)).collect())
    }
}

/// Writes a vector as a one-column Matrix Market array.
pub fn write_vector(v: &[f64]) -> String {
    let mut s = format!("%%MatrixMarket matrix array real general\n{} 1\n", v.len());
    for x in v {
        let _ = writeln!(s, "{x:e}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_diagonal() {
        let m = read_matrix("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 2\n2 2 3\n").unwrap();
        assert_eq!(m, CsrMatrix::from_diagonal(&[2.0, 3.0]));
    }

    #[test]
    fn symmetric_expansion() {
        let m =
            read_matrix("%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 3\n1 1 2\n2 1 -1\n2 2 2\n").unwrap();
        assert_eq!(m.to_dense().as_slice(), &[2.0, -1.0, -1.0, 2.0]);
    }

    #[test]
    fn duplicates_are_summed() {
        let m = read_matrix("%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 2\n1 1 0.5\n").unwrap();
        assert_eq!(m.get(0, 0), 2.5);
    }

    #[test]
    fn array_matrix_is_unsupported() {
        let e = read_matrix("%%MatrixMarket matrix array real general\n1 1\n1\n").unwrap_err();
        assert!(e.to_string().contains("unsupported format"), "{e}");
    }

    #[test]
    fn errors_name_the_line() {
        let e = read_matrix("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n").unwrap_err();
        assert!(e.to_string().starts_with("line 3:"), "{e}");
        let e = read_matrix("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n").unwrap_err();
        assert!(e.to_string().starts_with("line 1:"), "{e}");
        let e = read_matrix("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n").unwrap_err();
        assert!(matches!(e, FormatError::Parse { .. }));
    }

    #[test]
    fn vector_formats() {
        assert_eq!(read_vector("1\n2.5\n\n-3e-2\n").unwrap(), vec![1.0, 2.5, -0.03]);
        let v = vec![0.1, -2.0, 1e-300];
        assert_eq!(read_vector(&write_vector(&v)).unwrap(), v);
        let coo = "%%MatrixMarket matrix coordinate real general\n3 1 1\n2 1 4\n";
        assert_eq!(read_vector(coo).unwrap(), vec![0.0, 4.0, 0.0]);
    }

    #[test]
    fn symmetric_writer_round_trips() {
        let m = vtm_core::netgen::grid2d(3, 3, 1.0, 0.1, 0).unwrap().a;
        assert_eq!(read_matrix(&write_matrix(&m, Symmetry::Symmetric)).unwrap(), m);
        assert_eq!(read_matrix(&write_matrix(&m, Symmetry::General)).unwrap(), m);
    }
}
