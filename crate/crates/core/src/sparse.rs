//! Compressed sparse row storage.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Real sparse matrix in compressed sparse row form.
///
/// Column indices inside a row are strictly increasing. Explicit zeros are
/// allowed and kept: the stored pattern is what splitting preserves.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "CsrParts", into = "CsrParts"))]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Serialized form; deserializing re-checks every invariant.
#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct CsrParts {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

#[cfg(feature = "serde")]
impl TryFrom<CsrParts> for CsrMatrix {
    type Error = Error;

    fn try_from(p: CsrParts) -> Result<Self> {
        Self::new(p.nrows, p.ncols, p.row_offsets, p.col_indices, p.values)
    }
}

#[cfg(feature = "serde")]
impl From<CsrMatrix> for CsrParts {
    fn from(m: CsrMatrix) -> Self {
        Self {
            nrows: m.nrows,
            ncols: m.ncols,
            row_offsets: m.row_offsets,
            col_indices: m.col_indices,
            values: m.values,
        }
    }
}

impl CsrMatrix {
    /// Builds a matrix from raw parts, checking every structural invariant.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::InvalidStructure(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                nrows + 1
            )));
        }
        if row_offsets[0] != 0 || row_offsets[nrows] != values.len() {
            return Err(Error::InvalidStructure("row_offsets must start at 0 and end at nnz".into()));
        }
        if col_indices.len() != values.len() {
            return Err(Error::InvalidStructure("col_indices and values differ in length".into()));
        }
        for i in 0..nrows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::InvalidStructure(format!("row_offsets decreases at row {i}")));
            }
            let cols = &col_indices[lo..hi];
            for (k, &c) in cols.iter().enumerate() {
                if c >= ncols {
                    return Err(Error::InvalidStructure(format!("column {c} out of range in row {i}")));
                }
                if k > 0 && cols[k - 1] >= c {
                    return Err(Error::InvalidStructure(format!("column indices not strictly increasing in row {i}")));
                }
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { nrows, ncols, row_offsets, col_indices, values })
    }

    /// Assembles from `(row, col, value)` triplets. Duplicates are summed in
    /// the order they appear.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidStructure(format!("entry ({r}, {c}) out of range")));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(r));
            }
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut slots: Vec<(usize, f64)> = vec![(0, 0.0); triplets.len()];
        for &(r, c, v) in triplets {
            slots[next[r]] = (c, v);
            next[r] += 1;
        }
        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        for i in 0..nrows {
            let row = &mut slots[counts[i]..counts[i + 1]];
            // stable: duplicates keep insertion order, so summation order is fixed
            row.sort_by_key(|&(c, _)| c);
            for &(c, v) in row.iter() {
                if col_indices.len() > row_offsets[i] && *col_indices.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self { nrows, ncols, row_offsets, col_indices, values })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_offsets: vec![0; nrows + 1], col_indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self { nrows: n, ncols: n, row_offsets: (0..=n).collect(), col_indices: (0..n).collect(), values: d.to_vec() }
    }

    /// Converts a dense matrix, keeping only nonzero entries.
    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut t = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &t).expect("dense entries are in range")
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Stored value at `(i, j)`, or zero.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row(i).0.binary_search(&j).is_ok()
    }

    /// Iterates over stored `(row, col, value)` entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A·x` with a dimension check.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.ncols, found: x.len() });
        }
        Ok(self.mul_vec(x))
    }

    /// `y = A·x`; panics on a length mismatch.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                col_indices[next[j]] = i;
                values[next[j]] = v;
                next[j] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, row_offsets: counts, col_indices, values }
    }

    /// True when the matrix equals its transpose entrywise within
    /// `rel_tol · max|a_ij|` (pattern differences count only if the
    /// unmatched value exceeds the tolerance).
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.max_abs();
        let tol = rel_tol * scale;
        let t = self.transpose();
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            let (cb, vb) = t.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let (x, y) = match (ca.get(p), cb.get(q)) {
                    (Some(&a), Some(&b)) if a == b => {
                        p += 1;
                        q += 1;
                        (va[p - 1], vb[q - 1])
                    }
                    (Some(&a), Some(&b)) if a < b => {
                        p += 1;
                        (va[p - 1], 0.0)
                    }
                    (Some(_), None) => {
                        p += 1;
                        (va[p - 1], 0.0)
                    }
                    _ => {
                        q += 1;
                        (0.0, vb[q - 1])
                    }
                };
                if (x - y).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Extracts `A[rows, cols]`, renumbering to local positions.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut t = Vec::new();
        for (r, &i) in rows.iter().enumerate() {
            let (cs, vs) = self.row(i);
            for (&j, &v) in cs.iter().zip(vs) {
                if col_map[j] != usize::MAX {
                    t.push((r, col_map[j], v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), &t).expect("mapped entries are in range")
    }

    /// Entrywise sum; the result pattern is the union of both patterns.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.nrows * self.ncols,
                found: other.nrows * other.ncols,
            });
        }
        let mut t: Vec<(usize, usize, f64)> = self.triplets().collect();
        t.extend(other.triplets());
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    /// Symmetric permutation `P A Pᵀ` where `perm[k]` is the old index placed at `k`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Self {
        let n = self.nrows;
        let mut inv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        row_offsets.push(0);
        let mut buf: Vec<(usize, f64)> = Vec::new();
        for &old in perm {
            buf.clear();
            let (cols, vals) = self.row(old);
            buf.extend(cols.iter().zip(vals).map(|(&j, &v)| (inv[j], v)));
            buf.sort_unstable_by_key(|e| e.0);
            for &(j, v) in &buf {
                col_indices.push(j);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Self { nrows: n, ncols: n, row_offsets, col_indices, values }
    }
}

/// Diagonal dominance class of a square matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Dominance {
    /// `|a_ii| > Σ_{j≠i} |a_ij|` on every row.
    Strict,
    /// `≥` on every row, with equality on at least one.
    Weak,
    No,
}

/// Classifies the rows of `a` by diagonal dominance.
/// Relative tolerance on row sums in [`is_diagonally_dominant`].
pub const DOMINANCE_SLACK: f64 = 8.0 * f64::EPSILON;

pub fn is_diagonally_dominant(a: &CsrMatrix) -> Result<Dominance> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    let mut strict = true;
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        let mut diag = 0.0;
        let mut off = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i {
                diag += v;
            } else {
                off += v.abs();
            }
        }
        let d = diag.abs();
        // rounding slack: row sums of assembled networks are inexact
        let slack = DOMINANCE_SLACK * (d + off);
        if d < off - slack {
            return Ok(Dominance::No);
        }
        if d <= off + slack {
            strict = false;
        }
    }
    Ok(if strict { Dominance::Strict } else { Dominance::Weak })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn dominance_classes() {
        let m = |r: &[&[f64]]| CsrMatrix::from_dense(&DenseMatrix::from_rows(r).unwrap());
        assert_eq!(is_diagonally_dominant(&m(&[&[3.0, -1.0], &[-1.0, 2.0]])).unwrap(), Dominance::Strict);
        assert_eq!(is_diagonally_dominant(&m(&[&[1.0, -1.0], &[-1.0, 1.0]])).unwrap(), Dominance::Weak);
        assert_eq!(is_diagonally_dominant(&m(&[&[1.0, -2.0], &[0.0, 1.0]])).unwrap(), Dominance::No);
    }

    #[test]
    fn identity_spmv() {
        let i = CsrMatrix::identity(2);
        assert_eq!(i.spmv(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn laplacian_spmv() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0)]).unwrap();
        assert_eq!(a.spmv(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn spmv_dimension_mismatch() {
        let a = CsrMatrix::identity(3);
        assert!(matches!(a.spmv(&[1.0]), Err(Error::DimensionMismatch { expected: 3, found: 1 })));
    }

    #[test]
    fn random_spmv_matches_dense_product() {
        let mut rng = SplitMix64::new(7);
        let n = 50;
        let mut t = Vec::new();
        let mut dense = std::vec![std::vec![0.0; n]; n];
        for _ in 0..400 {
            let i = rng.below(n as u64) as usize;
            let j = rng.below(n as u64) as usize;
            let v = rng.next_f64() * 2.0 - 1.0;
            t.push((i, j, v));
            dense[i][j] += v;
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let y = a.spmv(&x).unwrap();
        for i in 0..n {
            let expect: f64 = (0..n).map(|j| dense[i][j] * x[j]).sum();
            assert!((y[i] - expect).abs() <= 1e-12);
        }
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(1, 2, &[(0, 1, 1.0), (0, 1, 2.5), (0, 0, 1.0)]).unwrap();
        assert_eq!(a.col_indices(), &[0, 1]);
        assert_eq!(a.values(), &[1.0, 3.5]);
    }

    #[test]
    fn rejects_unsorted_columns() {
        let err = CsrMatrix::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidStructure(_)));
    }

    #[test]
    fn transpose_and_symmetry() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 3.0), (1, 1, 1.0)]).unwrap();
        assert!(!a.is_symmetric(0.0));
        let s = a.add(&a.transpose()).unwrap();
        assert!(s.is_symmetric(0.0));
        assert_eq!(s.get(1, 0), 3.0);
    }

    #[test]
    fn symmetric_permutation_preserves_entries() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (0, 2, 5.0), (2, 1, 7.0)]).unwrap();
        let p = a.permute_symmetric(&[2, 0, 1]);
        // old 2 -> new 0, old 0 -> new 1, old 1 -> new 2
        assert_eq!(p.get(1, 1), 1.0);
        assert_eq!(p.get(1, 0), 5.0);
        assert_eq!(p.get(0, 2), 7.0);
    }
}
