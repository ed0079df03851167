//! Small dense matrices and direct kernels.
//!
//! Everything here operates at "per column" or "capacitance" scale (a few
//! hundred rows at most), so plain column-major storage with unblocked
//! algorithms is all that is needed.

use crate::error::{Error, Result};

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DenseMatrix::zeros(n_rows, n_cols);
        for j in 0..n_cols {
            for i in 0..n_rows {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds a matrix from equal-length column slices.
    pub fn from_columns(n_rows: usize, cols: &[Vec<f64>]) -> Self {
        let mut m = DenseMatrix::zeros(n_rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), n_rows, "column length mismatch");
            m.col_mut(j).copy_from_slice(c);
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        self.data[j * self.n_rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        self.data[j * self.n_rows + i] = v;
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n_cols, self.n_rows, |i, j| self.get(j, i))
    }

    /// y = A * x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols, "matvec dimension mismatch");
        let mut y = vec![0.0; self.n_rows];
        for j in 0..self.n_cols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for (i, &a) in self.col(j).iter().enumerate() {
                y[i] += a * xj;
            }
        }
        y
    }

    /// C = A * B.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, other.n_rows, "matmul dimension mismatch");
        let mut c = DenseMatrix::zeros(self.n_rows, other.n_cols);
        for j in 0..other.n_cols {
            let y = self.matvec(other.col(j));
            c.col_mut(j).copy_from_slice(&y);
        }
        c
    }

    pub fn add_scaled(&self, other: &DenseMatrix, scale: f64) -> DenseMatrix {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        let mut out = self.clone();
        for (o, &v) in out.data.iter_mut().zip(other.data.iter()) {
            *o += scale * v;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Infinity norm (max row sum of absolute values).
    pub fn inf_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.n_rows];
        for j in 0..self.n_cols {
            for (i, &v) in self.col(j).iter().enumerate() {
                sums[i] += v.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Dense inverse via LU with partial pivoting. Oracle-scale sizes only.
    pub fn invert(&self) -> Result<DenseMatrix> {
        let lu = LuFactor::factorize(self)?;
        lu.solve_matrix(&DenseMatrix::identity(self.n_rows))
    }
}

/// LU factorization with partial pivoting of a square matrix.
pub struct LuFactor {
    n: usize,
    lu: DenseMatrix,
    perm: Vec<usize>,
    min_abs_pivot: f64,
}

const PIVOT_RTOL: f64 = 1e-14;

impl LuFactor {
    /// Factorizes `s`. Fails with [`Error::CapacitanceSingular`] when a pivot
    /// falls below `1e-14 * ||S||_inf`.
    pub fn factorize(s: &DenseMatrix) -> Result<LuFactor> {
        assert_eq!(s.n_rows(), s.n_cols(), "LU requires a square matrix");
        let n = s.n_rows();
        let mut lu = s.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = s.inf_norm();
        let mut min_abs_pivot = f64::INFINITY;

        for col in 0..n {
            let mut piv_row = col;
            let mut piv_val = lu.get(col, col).abs();
            for r in col + 1..n {
                let v = lu.get(r, col).abs();
                if v > piv_val {
                    piv_val = v;
                    piv_row = r;
                }
            }
            if piv_val < PIVOT_RTOL * scale || piv_val == 0.0 {
                return Err(Error::CapacitanceSingular);
            }
            if piv_row != col {
                perm.swap(col, piv_row);
                for j in 0..n {
                    let a = lu.get(col, j);
                    let b = lu.get(piv_row, j);
                    lu.set(col, j, b);
                    lu.set(piv_row, j, a);
                }
            }
            let pivot = lu.get(col, col);
            min_abs_pivot = min_abs_pivot.min(pivot.abs());
            for r in col + 1..n {
                let factor = lu.get(r, col) / pivot;
                lu.set(r, col, factor);
                if factor != 0.0 {
                    for j in col + 1..n {
                        let v = lu.get(r, j) - factor * lu.get(col, j);
                        lu.set(r, j, v);
                    }
                }
            }
        }
        if n == 0 {
            min_abs_pivot = 0.0;
        }
        Ok(LuFactor {
            n,
            lu,
            perm,
            min_abs_pivot,
        })
    }

    /// Smallest pivot magnitude seen during elimination.
    pub fn min_abs_pivot(&self) -> f64 {
        self.min_abs_pivot
    }

    pub fn solve_vec(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        // forward: L has unit diagonal
        for i in 1..self.n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu.get(i, j) * x[j];
            }
            x[i] = acc;
        }
        // backward
        for i in (0..self.n).rev() {
            let mut acc = x[i];
            for j in i + 1..self.n {
                acc -= self.lu.get(i, j) * x[j];
            }
            x[i] = acc / self.lu.get(i, i);
        }
        x
    }

    pub fn solve_matrix(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if rhs.n_rows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "LU solve: rhs has {} rows, expected {}",
                rhs.n_rows(),
                self.n
            )));
        }
        let mut out = DenseMatrix::zeros(self.n, rhs.n_cols());
        for j in 0..rhs.n_cols() {
            let x = self.solve_vec(rhs.col(j));
            out.col_mut(j).copy_from_slice(&x);
        }
        Ok(out)
    }
}

/// Solves S * X = RHS by LU with partial pivoting.
///
/// `S` must be square with as many rows as `RHS`. A pivot below
/// `1e-14 * ||S||_inf` reports the capacitance matrix as singular.
pub fn small_dense_solve(s: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    if s.n_rows() != s.n_cols() {
        return Err(Error::DimensionMismatch(format!(
            "small_dense_solve: S is {}x{}, expected square",
            s.n_rows(),
            s.n_cols()
        )));
    }
    if s.n_rows() != rhs.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "small_dense_solve: S has {} rows, RHS has {}",
            s.n_rows(),
            rhs.n_rows()
        )));
    }
    if s.n_rows() == 0 {
        return Ok(rhs.clone());
    }
    LuFactor::factorize(s)?.solve_matrix(rhs)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}
