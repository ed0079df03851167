//! RSAI pattern growth: chase the dominant residual entries, excluding
//! indices already tried in earlier loops.

use std::collections::HashSet;

use crate::sai::state::ColumnState;
use crate::sai::SaiContext;

/// Picks up to `count` indices maximizing `|r_k(i)|` among nonzero residual
/// entries not yet in the history, ties toward the smaller index. The chosen
/// indices are appended to the history so later loops cannot repeat them.
///
/// An empty return means the history has exhausted the residual support; the
/// column loop stops early.
pub fn rsai_dominant(state: &mut ColumnState, count: usize) -> Vec<usize> {
    let mut cands: Vec<(usize, f64)> = Vec::new();
    for (local_i, &rv) in state.residual.iter().enumerate() {
        if rv != 0.0 {
            let i = state.rows[local_i];
            if !state.history_set.contains(&i) {
                cands.push((i, rv.abs()));
            }
        }
    }
    cands.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let chosen: Vec<usize> = cands.into_iter().take(count.max(1)).map(|(i, _)| i).collect();
    for &i in &chosen {
        state.history.push(i);
        state.history_set.insert(i);
    }
    chosen
}

/// Augments the pattern with every new column index appearing in the rows of
/// `dominant`. Returns the number of indices added (possibly zero, in which
/// case the loop continues with a fresh dominant set).
pub fn rsai_augment(ctx: &SaiContext, state: &mut ColumnState, dominant: &[usize]) -> usize {
    let at = ctx
        .at
        .as_ref()
        .expect("RSAI context carries the transpose");
    let mut rows: Vec<usize> = dominant.to_vec();
    rows.sort_unstable();
    let mut seen: HashSet<usize> = HashSet::new();
    let mut new_cols: Vec<usize> = Vec::new();
    for &i in &rows {
        for &j in at.col(i).0 {
            if !state.cols_set.contains(&j) && seen.insert(j) {
                new_cols.push(j);
            }
        }
    }
    if new_cols.is_empty() {
        return 0;
    }
    new_cols.sort_unstable();
    state.augment_with_columns(ctx, &new_cols);
    new_cols.len()
}
