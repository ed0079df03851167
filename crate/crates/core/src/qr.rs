//! Incremental thin-QR least-squares kernels.
//!
//! A [`QrFactor`] keeps an explicit orthonormal basis `Q` (m x k), a packed
//! upper-triangular `R` (k x k), and a copy of the factored matrix. Columns
//! and rows can be appended without refactorizing from scratch; a full
//! refactorization is triggered automatically once the number of appended
//! columns exceeds twice the size of the last full factorization, which keeps
//! accumulated orthogonality loss in check.
//!
//! Orthogonalization is modified Gram-Schmidt with one reorthogonalization
//! pass, which holds `Q^T Q = I` near machine precision at the sizes used
//! here (at most a few hundred rows).

use crate::dense::{dot, norm2, DenseMatrix};

/// Relative threshold below which a diagonal of `R` is treated as rank
/// deficient.
pub const RANK_RTOL: f64 = 1e-14;

/// Thin QR factorization supporting column and row appends.
#[derive(Debug, Clone)]
pub struct QrFactor {
    m: usize,
    /// Orthonormal columns; a dependent input column is stored as a zero
    /// column with a zero diagonal in `R`.
    q_cols: Vec<Vec<f64>>,
    /// Packed upper triangle: `r_cols[j]` holds `R[0..=j, j]`.
    r_cols: Vec<Vec<f64>>,
    /// Copy of the factored matrix, column by column.
    mat_cols: Vec<Vec<f64>>,
    base_cols: usize,
    appended_cols: usize,
}

impl QrFactor {
    /// Factorization of a matrix with `m` rows and no columns yet.
    pub fn empty(m: usize) -> Self {
        QrFactor {
            m,
            q_cols: Vec::new(),
            r_cols: Vec::new(),
            mat_cols: Vec::new(),
            base_cols: 0,
            appended_cols: 0,
        }
    }

    /// Factorizes a dense matrix.
    pub fn factorize(b: &DenseMatrix) -> Self {
        let mut f = QrFactor::empty(b.n_rows());
        for j in 0..b.n_cols() {
            f.push_column(b.col(j));
        }
        f.base_cols = f.k();
        f.appended_cols = 0;
        f
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.q_cols.len()
    }

    /// True when some `|R_jj|` falls below `1e-14 * max_i |R_ii|`.
    pub fn rank_deficient(&self) -> bool {
        let max_diag = self.max_abs_diag();
        self.r_cols.iter().any(|rc| {
            let d = rc.last().copied().unwrap_or(0.0).abs();
            d <= RANK_RTOL * max_diag
        })
    }

    fn max_abs_diag(&self) -> f64 {
        self.r_cols
            .iter()
            .map(|rc| rc.last().copied().unwrap_or(0.0).abs())
            .fold(0.0, f64::max)
    }

    /// Entry of the (conceptual) square `R`; zero below the diagonal.
    pub fn r_entry(&self, i: usize, j: usize) -> f64 {
        if i <= j {
            self.r_cols[j][i]
        } else {
            0.0
        }
    }

    /// Column `j` of the orthonormal factor.
    pub fn q_col(&self, j: usize) -> &[f64] {
        &self.q_cols[j]
    }

    /// Appends the columns of `c`, updating `Q` and `R` in place.
    pub fn append_columns(&mut self, c: &DenseMatrix) {
        assert_eq!(c.n_rows(), self.m, "appended columns must have {} rows", self.m);
        for j in 0..c.n_cols() {
            self.push_column(c.col(j));
        }
        self.appended_cols += c.n_cols();
        self.maybe_refactorize();
    }

    /// Appends rows to the factored matrix and the right-hand side carried by
    /// the caller. `rows` must have `k` columns; `rhs_new` one entry per new
    /// row.
    pub fn append_rows(&mut self, rows: &DenseMatrix, rhs: &mut Vec<f64>, rhs_new: &[f64]) {
        let k = self.k();
        assert_eq!(rows.n_cols(), k, "appended rows must have {k} columns");
        assert_eq!(rows.n_rows(), rhs_new.len(), "one rhs entry per new row");
        let r = rows.n_rows();
        rhs.extend_from_slice(rhs_new);
        if r == 0 {
            return;
        }
        for j in 0..k {
            for i in 0..r {
                self.mat_cols[j].push(rows.get(i, j));
            }
        }
        if k == 0 {
            self.m += r;
            return;
        }

        // [B; Rws] = [[Q, 0], [0, I]] * [[R], [Rws]]; refactor the small
        // (k + r) x k stack and fold its Q back into the tall basis.
        let mut stack = DenseMatrix::zeros(k + r, k);
        for j in 0..k {
            for i in 0..=j {
                stack.set(i, j, self.r_cols[j][i]);
            }
            for i in 0..r {
                stack.set(k + i, j, rows.get(i, j));
            }
        }
        let small = QrFactor::factorize(&stack);

        let mut new_q: Vec<Vec<f64>> = Vec::with_capacity(k);
        for j in 0..k {
            let qt = small.q_col(j);
            let mut col = vec![0.0; self.m + r];
            for (t, q_old) in self.q_cols.iter().enumerate() {
                let w = qt[t];
                if w != 0.0 {
                    for (i, &qv) in q_old.iter().enumerate() {
                        col[i] += w * qv;
                    }
                }
            }
            for i in 0..r {
                col[self.m + i] = qt[k + i];
            }
            new_q.push(col);
        }
        self.q_cols = new_q;
        self.r_cols = small.r_cols;
        self.m += r;
    }

    /// Least-squares solve: minimizes `||B x - rhs||_2`.
    ///
    /// Rank-deficient directions are zeroed. Returns the solution and the
    /// norm of the residual `B x - rhs` computed against the stored matrix.
    pub fn solve(&self, rhs: &[f64]) -> (Vec<f64>, f64) {
        let (x, r) = self.solve_full(rhs);
        (x, norm2(&r))
    }

    /// As [`QrFactor::solve`], also returning the residual vector `B x - rhs`.
    pub fn solve_full(&self, rhs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(rhs.len(), self.m, "rhs length must equal row count");
        let k = self.k();
        let mut c = vec![0.0; k];
        for (j, q) in self.q_cols.iter().enumerate() {
            c[j] = dot(q, rhs);
        }
        let max_diag = self.max_abs_diag();
        let tol = RANK_RTOL * max_diag;
        let mut x = vec![0.0; k];
        for j in (0..k).rev() {
            let d = self.r_cols[j][j];
            if d.abs() <= tol {
                x[j] = 0.0;
                continue;
            }
            let mut acc = c[j];
            for t in j + 1..k {
                acc -= self.r_cols[t][j] * x[t];
            }
            x[j] = acc / d;
        }
        let mut resid: Vec<f64> = rhs.iter().map(|v| -v).collect();
        for (j, col) in self.mat_cols.iter().enumerate() {
            let xj = x[j];
            if xj != 0.0 {
                for (i, &v) in col.iter().enumerate() {
                    resid[i] += v * xj;
                }
            }
        }
        (x, resid)
    }

    /// Applies the stored matrix: `B x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.k());
        let mut y = vec![0.0; self.m];
        for (j, col) in self.mat_cols.iter().enumerate() {
            let xj = x[j];
            if xj != 0.0 {
                for (i, &v) in col.iter().enumerate() {
                    y[i] += v * xj;
                }
            }
        }
        y
    }

    /// Reconstructs `Q * R` (test oracle).
    pub fn reconstruct(&self) -> DenseMatrix {
        let k = self.k();
        let mut out = DenseMatrix::zeros(self.m, k);
        for j in 0..k {
            let col = out.col_mut(j);
            for i in 0..=j {
                let r = self.r_cols[j][i];
                if r != 0.0 {
                    for (t, &qv) in self.q_cols[i].iter().enumerate() {
                        col[t] += qv * r;
                    }
                }
            }
        }
        out
    }

    fn push_column(&mut self, col: &[f64]) {
        assert_eq!(col.len(), self.m);
        self.mat_cols.push(col.to_vec());
        let mut v = col.to_vec();
        let orig_norm = norm2(&v);
        let k = self.k();
        let mut rcol = vec![0.0; k + 1];
        for _pass in 0..2 {
            for (j, q) in self.q_cols.iter().enumerate() {
                let h = dot(q, &v);
                rcol[j] += h;
                if h != 0.0 {
                    for (vi, qi) in v.iter_mut().zip(q.iter()) {
                        *vi -= h * qi;
                    }
                }
            }
        }
        let nrm = norm2(&v);
        if orig_norm == 0.0 || nrm <= RANK_RTOL * orig_norm {
            // dependent column: zero basis vector, zero diagonal
            self.q_cols.push(vec![0.0; self.m]);
            rcol[k] = 0.0;
        } else {
            for vi in v.iter_mut() {
                *vi /= nrm;
            }
            self.q_cols.push(v);
            rcol[k] = nrm;
        }
        self.r_cols.push(rcol);
    }

    fn maybe_refactorize(&mut self) {
        if self.base_cols > 0 && self.appended_cols > 2 * self.base_cols {
            let mat = std::mem::take(&mut self.mat_cols);
            self.q_cols.clear();
            self.r_cols.clear();
            let saved = mat;
            self.mat_cols = Vec::with_capacity(saved.len());
            for col in &saved {
                self.push_column(col);
            }
            debug_assert_eq!(self.mat_cols.len(), saved.len());
            self.base_cols = self.k();
            self.appended_cols = 0;
        }
    }
}
