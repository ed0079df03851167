//! Compressed sparse column storage and the basic operations every other
//! module builds on.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Compressed sparse column matrix with `f64` entries.
///
/// `col_ptr` has one offset per column plus a trailing total; row indices are
/// strictly increasing within each column and duplicates are forbidden.
/// Instances are immutable after construction and safe to share across
/// threads.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    n_rows: usize,
    n_cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    /// Builds a matrix from raw CSC arrays, validating the invariants.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if col_ptr.len() != n_cols + 1 {
            return Err(Error::InvalidMatrix(format!(
                "col_ptr has length {}, expected {}",
                col_ptr.len(),
                n_cols + 1
            )));
        }
        if col_ptr[0] != 0 || *col_ptr.last().unwrap() != row_idx.len() {
            return Err(Error::InvalidMatrix(
                "col_ptr must start at 0 and end at nnz".into(),
            ));
        }
        if row_idx.len() != values.len() {
            return Err(Error::InvalidMatrix(
                "row_idx and values must have equal length".into(),
            ));
        }
        for j in 0..n_cols {
            if col_ptr[j] > col_ptr[j + 1] {
                return Err(Error::InvalidMatrix(format!(
                    "col_ptr decreases at column {j}"
                )));
            }
            let mut prev: Option<usize> = None;
            for &r in &row_idx[col_ptr[j]..col_ptr[j + 1]] {
                if r >= n_rows {
                    return Err(Error::InvalidMatrix(format!(
                        "row index {r} out of bounds in column {j}"
                    )));
                }
                if let Some(p) = prev {
                    if r <= p {
                        return Err(Error::InvalidMatrix(format!(
                            "row indices not strictly increasing in column {j}"
                        )));
                    }
                }
                prev = Some(r);
            }
        }
        Ok(CscMatrix {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({r}, {c}) out of bounds for a {n_rows}x{n_cols} matrix"
                )));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> =
            triplets.iter().map(|&(r, c, v)| (c, r, v)).collect();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut col_ptr = vec![0usize; n_cols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut it = sorted.into_iter().peekable();
        while let Some((c, r, v)) = it.next() {
            let mut acc = v;
            while let Some(&(c2, r2, v2)) = it.peek() {
                if c2 == c && r2 == r {
                    acc += v2;
                    it.next();
                } else {
                    break;
                }
            }
            row_idx.push(r);
            values.push(acc);
            col_ptr[c + 1] += 1;
        }
        for j in 0..n_cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        CscMatrix::new(n_rows, n_cols, col_ptr, row_idx, values)
    }

    pub fn identity(n: usize) -> Self {
        CscMatrix {
            n_rows: n,
            n_cols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let lo = self.col_ptr[j];
        let hi = self.col_ptr[j + 1];
        (&self.row_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn col_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    /// Value at `(i, j)`; zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (rows, vals) = self.col(j);
        match rows.binary_search(&i) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    /// Iterates stored entries as `(row, col, value)` in column-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_cols).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).map(move |(&r, &v)| (r, j, v))
        })
    }

    /// Sparse matrix-vector product `A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch(format!(
                "spmv: x has length {}, expected {}",
                x.len(),
                self.n_cols
            )));
        }
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x` without allocation; panics on mismatched lengths.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        y.fill(0.0);
        for j in 0..self.n_cols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                y[r] += v * xj;
            }
        }
    }

    /// Max over columns of the sum of absolute values.
    pub fn one_norm(&self) -> f64 {
        (0..self.n_cols)
            .map(|j| self.col(j).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> CscMatrix {
        let mut counts = vec![0usize; self.n_rows + 1];
        for &r in &self.row_idx {
            counts[r + 1] += 1;
        }
        for i in 0..self.n_rows {
            counts[i + 1] += counts[i];
        }
        let mut row_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut next = counts.clone();
        for j in 0..self.n_cols {
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                let pos = next[r];
                row_idx[pos] = j;
                values[pos] = v;
                next[r] += 1;
            }
        }
        CscMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            col_ptr: counts,
            row_idx,
            values,
        }
    }

    /// Dense submatrix `A(rows, cols)`. Index sets must be sorted ascending
    /// and in bounds; unstored positions are zero.
    pub fn extract_dense(&self, rows: &[usize], cols: &[usize]) -> Result<DenseMatrix> {
        for w in rows.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidParameter(
                    "extract: row set must be sorted strictly ascending".into(),
                ));
            }
        }
        for w in cols.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidParameter(
                    "extract: column set must be sorted strictly ascending".into(),
                ));
            }
        }
        if rows.last().is_some_and(|&r| r >= self.n_rows) {
            return Err(Error::InvalidParameter(
                "extract: row index out of range".into(),
            ));
        }
        if cols.last().is_some_and(|&c| c >= self.n_cols) {
            return Err(Error::InvalidParameter(
                "extract: column index out of range".into(),
            ));
        }
        let mut out = DenseMatrix::zeros(rows.len(), cols.len());
        for (local_j, &j) in cols.iter().enumerate() {
            let (rs, vs) = self.col(j);
            for (&r, &v) in rs.iter().zip(vs) {
                if let Ok(local_i) = rows.binary_search(&r) {
                    out.set(local_i, local_j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.iter() {
            out.set(r, c, v);
        }
        out
    }

    /// Diagonal values; zero where the entry is absent.
    pub fn diag(&self) -> Vec<f64> {
        let n = self.n_rows.min(self.n_cols);
        (0..n).map(|i| self.get(i, i)).collect()
    }

    /// True when every diagonal entry is stored and numerically nonzero.
    pub fn has_zero_free_diagonal(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        (0..self.n_cols).all(|j| self.get(j, j) != 0.0)
    }
}

/// Picks the retained entries of a dense column (or row) slice: the diagonal
/// position plus the `keep - 1` entries nearest to it by index distance, ties
/// resolved toward the smaller index. Returns indices sorted ascending.
///
/// When `indices` has at most `keep` entries the whole set is returned
/// untouched. `center` need not be present; when absent, the nearest `keep`
/// entries are retained.
pub fn nearest_to_diagonal_retained(indices: &[usize], center: usize, keep: usize) -> Vec<usize> {
    if indices.len() <= keep {
        return indices.to_vec();
    }
    let mut others: Vec<usize> = Vec::with_capacity(indices.len());
    let mut retained = Vec::with_capacity(keep);
    for &i in indices {
        if i == center {
            retained.push(i);
        } else {
            others.push(i);
        }
    }
    let budget = keep - retained.len();
    others.sort_by_key(|&i| (i.abs_diff(center), i));
    retained.extend(others.into_iter().take(budget));
    retained.sort_unstable();
    retained
}
