//! Per-column state for the adaptive pattern strategies.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::dense::{norm2, DenseMatrix};
use crate::qr::QrFactor;
use crate::sai::{DropEvent, SaiContext};

/// Working state of one column `m_k` while its pattern is refined.
///
/// `cols` is the current pattern in factor column order; `rows` the nonzero
/// rows of `A(:, cols)` (plus row `k` itself) in factor row order. The
/// residual is `A m_k - e_k` restricted to `rows`, which carries its entire
/// support.
pub struct ColumnState {
    pub k: usize,
    pub(crate) cols: Vec<usize>,
    pub(crate) cols_set: HashSet<usize>,
    pub(crate) rows: Vec<usize>,
    pub(crate) row_pos: HashMap<usize, usize>,
    pub(crate) factor: QrFactor,
    pub(crate) rhs: Vec<f64>,
    pub solution: Vec<f64>,
    pub residual: Vec<f64>,
    pub r_norm: f64,
    /// Union of all dominant index sets chosen so far (RSAI).
    pub(crate) history: Vec<usize>,
    pub(crate) history_set: HashSet<usize>,
    /// Sparse power-iteration carrier `a_k^(l)` (PSAI).
    pub(crate) power_support: Vec<usize>,
    pub(crate) power_values: Vec<f64>,
}

impl ColumnState {
    /// Initial state: pattern `{k}`, rows the support of column `k` together
    /// with `k` itself. Returns `None` for a structurally empty column.
    pub fn init(ctx: &SaiContext, k: usize) -> Option<ColumnState> {
        let (rows_k, _) = ctx.a.col(k);
        if rows_k.is_empty() {
            return None;
        }
        let mut rows: Vec<usize> = rows_k.to_vec();
        if rows.binary_search(&k).is_err() {
            // row k carries the -1 of the residual even when a_kk is absent
            let pos = rows.partition_point(|&r| r < k);
            rows.insert(pos, k);
        }
        let row_pos: HashMap<usize, usize> =
            rows.iter().enumerate().map(|(p, &r)| (r, p)).collect();
        let mut col0 = vec![0.0; rows.len()];
        let (ris, vis) = ctx.a.col(k);
        for (&i, &v) in ris.iter().zip(vis) {
            col0[row_pos[&i]] = v;
        }
        let mat = DenseMatrix::from_columns(rows.len(), &[col0]);
        let factor = QrFactor::factorize(&mat);
        let rhs: Vec<f64> = rows.iter().map(|&r| if r == k { 1.0 } else { 0.0 }).collect();
        let mut state = ColumnState {
            k,
            cols: vec![k],
            cols_set: HashSet::from([k]),
            rows,
            row_pos,
            factor,
            rhs,
            solution: Vec::new(),
            residual: Vec::new(),
            r_norm: 0.0,
            history: Vec::new(),
            history_set: HashSet::new(),
            power_support: vec![k],
            power_values: vec![1.0],
        };
        state.refresh();
        Some(state)
    }

    /// Re-solves the least-squares problem over the current pattern.
    pub(crate) fn refresh(&mut self) {
        let (x, resid) = self.factor.solve_full(&self.rhs);
        self.r_norm = norm2(&resid);
        self.solution = x;
        self.residual = resid;
    }

    /// Number of pattern entries.
    pub fn pattern_len(&self) -> usize {
        self.cols.len()
    }

    /// Current pattern in factor order.
    pub fn pattern(&self) -> &[usize] {
        &self.cols
    }

    /// Dominant-set history (RSAI).
    pub fn history(&self) -> &[usize] {
        &self.history
    }

    /// Adds `new_cols` (sorted, disjoint from the pattern) to the pattern,
    /// growing the row set and updating the factorization incrementally.
    pub(crate) fn augment_with_columns(&mut self, ctx: &SaiContext, new_cols: &[usize]) {
        debug_assert!(new_cols.windows(2).all(|w| w[0] < w[1]));
        let mut new_rows: Vec<usize> = Vec::new();
        let mut rhs_new: Vec<f64> = Vec::new();
        for &j in new_cols {
            debug_assert!(!self.cols_set.contains(&j));
            for &i in ctx.a.col(j).0 {
                if !self.row_pos.contains_key(&i) {
                    self.row_pos.insert(i, self.rows.len() + new_rows.len());
                    rhs_new.push(if i == self.k { 1.0 } else { 0.0 });
                    new_rows.push(i);
                }
            }
        }
        if !new_rows.is_empty() {
            // existing pattern columns have no entries on the new rows
            let zero_rows = DenseMatrix::zeros(new_rows.len(), self.factor.k());
            self.factor.append_rows(&zero_rows, &mut self.rhs, &rhs_new);
            self.rows.extend(new_rows);
        }
        let m = self.rows.len();
        let mut cmat = DenseMatrix::zeros(m, new_cols.len());
        for (local_j, &j) in new_cols.iter().enumerate() {
            let (ris, vis) = ctx.a.col(j);
            for (&i, &v) in ris.iter().zip(vis) {
                cmat.set(self.row_pos[&i], local_j, v);
            }
        }
        self.factor.append_columns(&cmat);
        for &j in new_cols {
            self.cols.push(j);
            self.cols_set.insert(j);
        }
        self.refresh();
    }

    /// Rebuilds the factorization from scratch over `pattern` (sorted).
    pub(crate) fn rebuild_over_pattern(&mut self, ctx: &SaiContext, pattern: Vec<usize>) {
        let mut row_set: BTreeSet<usize> = BTreeSet::new();
        row_set.insert(self.k);
        for &j in &pattern {
            row_set.extend(ctx.a.col(j).0.iter().copied());
        }
        let rows: Vec<usize> = row_set.into_iter().collect();
        let row_pos: HashMap<usize, usize> =
            rows.iter().enumerate().map(|(p, &r)| (r, p)).collect();
        let mut mat = DenseMatrix::zeros(rows.len(), pattern.len());
        for (local_j, &j) in pattern.iter().enumerate() {
            let (ris, vis) = ctx.a.col(j);
            for (&i, &v) in ris.iter().zip(vis) {
                mat.set(row_pos[&i], local_j, v);
            }
        }
        self.factor = QrFactor::factorize(&mat);
        self.rhs = rows.iter().map(|&r| if r == self.k { 1.0 } else { 0.0 }).collect();
        self.rows = rows;
        self.row_pos = row_pos;
        self.cols_set = pattern.iter().copied().collect();
        self.cols = pattern;
        self.refresh();
    }

    /// Applies the adaptive dropping rule: an off-diagonal entry is removed
    /// when `|m_jk| <= eta / (nnz(m_k) * ||A||_1)`. Dropping and re-solving
    /// repeat until no entry violates the rule, so every surviving
    /// off-diagonal entry exceeds the final threshold.
    pub(crate) fn apply_dropping(&mut self, ctx: &SaiContext) -> Vec<DropEvent> {
        let mut events = Vec::new();
        if ctx.a_one_norm == 0.0 {
            return events;
        }
        loop {
            let nnz_now = self.solution.iter().filter(|v| **v != 0.0).count().max(1);
            let threshold = ctx.params.eta / (nnz_now as f64 * ctx.a_one_norm);
            let mut keep: Vec<usize> = Vec::with_capacity(self.cols.len());
            let mut dropped = false;
            for (t, &j) in self.cols.iter().enumerate() {
                if j != self.k && self.solution[t].abs() <= threshold {
                    events.push(DropEvent {
                        col: self.k,
                        row: j,
                        threshold,
                        value: self.solution[t],
                    });
                    dropped = true;
                } else {
                    keep.push(j);
                }
            }
            if !dropped {
                break;
            }
            keep.sort_unstable();
            self.rebuild_over_pattern(ctx, keep);
        }
        events
    }
}
