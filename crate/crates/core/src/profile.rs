//! Irregularity profiling: per-column/row nonzero counts and the sets of
//! columns and rows whose counts exceed `factor * p`.

use crate::csc::{nearest_to_diagonal_retained, CscMatrix};

/// Density statistics of a square sparse matrix.
///
/// `p` is the average number of nonzeros per column, `floor(nnz / n)` clamped
/// to at least 1. A column or row is dense when its count strictly exceeds
/// `factor * p`. `p_dc` is the largest column count; `p_dr` is the largest
/// row count after the dense columns have been sparsified down to `p`
/// entries, taken over the dense rows when any exist.
#[derive(Debug, Clone)]
pub struct DensityProfile {
    pub p: usize,
    pub factor: f64,
    pub col_nnz: Vec<usize>,
    pub row_nnz: Vec<usize>,
    pub dense_cols: Vec<usize>,
    pub dense_rows: Vec<usize>,
    pub p_dc: usize,
    pub p_dr: usize,
}

impl DensityProfile {
    pub fn is_double_regular(&self) -> bool {
        self.dense_cols.is_empty() && self.dense_rows.is_empty()
    }
}

/// Profiles `a` with the given irregularity factor (the paper-standard
/// threshold uses factor 10).
pub fn density_profile(a: &CscMatrix, factor: f64) -> DensityProfile {
    let n = a.n_cols();
    let col_nnz: Vec<usize> = (0..n).map(|j| a.col_nnz(j)).collect();
    let mut row_nnz = vec![0usize; a.n_rows()];
    for j in 0..n {
        for &r in a.col(j).0 {
            row_nnz[r] += 1;
        }
    }
    let p = if n == 0 { 1 } else { (a.nnz() / n).max(1) };
    let threshold = factor * p as f64;
    let dense_cols: Vec<usize> = (0..n).filter(|&j| col_nnz[j] as f64 > threshold).collect();
    let dense_rows: Vec<usize> = (0..a.n_rows())
        .filter(|&i| row_nnz[i] as f64 > threshold)
        .collect();
    let p_dc = col_nnz.iter().copied().max().unwrap_or(0);

    // row counts after column sparsification (entries the split would drop
    // from dense columns no longer count toward their rows)
    let mut row_nnz_tilde = row_nnz.clone();
    for &j in &dense_cols {
        let (rows, _) = a.col(j);
        if rows.len() <= p {
            continue;
        }
        let retained = nearest_to_diagonal_retained(rows, j, p);
        let mut keep = retained.iter().peekable();
        for &r in rows {
            if keep.peek() == Some(&&r) {
                keep.next();
            } else {
                row_nnz_tilde[r] -= 1;
            }
        }
    }
    let p_dr = if dense_rows.is_empty() {
        row_nnz_tilde.iter().copied().max().unwrap_or(0)
    } else {
        dense_rows
            .iter()
            .map(|&i| row_nnz_tilde[i])
            .max()
            .unwrap_or(0)
    };

    DensityProfile {
        p,
        factor,
        col_nnz,
        row_nnz,
        dense_cols,
        dense_rows,
        p_dc,
        p_dr,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_empty_dense_sets() {
        let a = CscMatrix::identity(7);
        let prof = density_profile(&a, 10.0);
        assert_eq!(prof.p, 1);
        assert!(prof.dense_cols.is_empty());
        assert!(prof.dense_rows.is_empty());
        assert_eq!(prof.p_dc, 1);
        assert_eq!(prof.p_dr, 1);
    }

    #[test]
    fn threshold_is_strict() {
        // n = 40, nnz stays below 2n so p = 1; dense iff count > 10
        let n = 40;
        let mut triplets: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0)).collect();
        // column 3 ends up with exactly 10 entries: NOT dense
        for i in 0..10 {
            if i != 3 {
                triplets.push((i, 3, 1.0));
            }
        }
        // column 5 ends up with 11 entries: dense
        for i in 0..11 {
            if i != 5 {
                triplets.push((i, 5, 1.0));
            }
        }
        let a = CscMatrix::from_triplets(n, n, &triplets).unwrap();
        let prof = density_profile(&a, 10.0);
        assert_eq!(prof.p, 1, "nnz = {}", a.nnz());
        assert_eq!(prof.col_nnz[3], 10);
        assert_eq!(prof.col_nnz[5], 11);
        assert_eq!(prof.dense_cols, vec![5]);
        for j in 0..n {
            let dense = prof.dense_cols.contains(&j);
            assert_eq!(dense, prof.col_nnz[j] as f64 > 10.0 * prof.p as f64);
        }
    }

    #[test]
    fn p_clamped_to_one() {
        // nnz < n
        let a = CscMatrix::from_triplets(5, 5, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let prof = density_profile(&a, 10.0);
        assert_eq!(prof.p, 1);
    }

    #[test]
    fn row_counts_after_column_sparsification() {
        // 30x30: diagonal plus one fully dense column 4. p = 1, so the dense
        // column keeps only its diagonal and every other row loses its
        // column-4 entry.
        let n = 30;
        let mut triplets: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 2.0)).collect();
        for i in 0..n {
            if i != 4 {
                triplets.push((i, 4, 1.0));
            }
        }
        let a = CscMatrix::from_triplets(n, n, &triplets).unwrap();
        let prof = density_profile(&a, 10.0);
        assert_eq!(prof.p, 1);
        assert_eq!(prof.dense_cols, vec![4]);
        assert!(prof.dense_rows.is_empty());
        assert_eq!(prof.p_dc, 30);
        assert_eq!(prof.p_dr, 1);
    }
}
