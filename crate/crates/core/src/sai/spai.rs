//! SPAI pattern refinement: score candidate indices by the one-dimensional
//! residual minimization and add the most profitable ones.

use std::collections::HashSet;

use crate::sai::state::ColumnState;
use crate::sai::SaiContext;

/// Scores every candidate index for augmenting the pattern of `state`.
///
/// Candidates are the columns of `A` with a nonzero in some row where the
/// residual is nonzero, minus the current pattern. The score is the residual
/// norm after the optimal one-dimensional update along that column:
/// `rho_j^2 = ||r||^2 - (r^T A e_j)^2 / ||A e_j||^2`.
///
/// An empty return signals stagnation; the column loop stops early.
pub fn spai_candidates(ctx: &SaiContext, state: &ColumnState) -> Vec<(usize, f64)> {
    let at = ctx
        .at
        .as_ref()
        .expect("SPAI context carries the transpose");
    let mut seen: HashSet<usize> = HashSet::new();
    let mut cands: Vec<usize> = Vec::new();
    for (local_i, &rv) in state.residual.iter().enumerate() {
        if rv != 0.0 {
            let i = state.rows[local_i];
            for &j in at.col(i).0 {
                if !state.cols_set.contains(&j) && seen.insert(j) {
                    cands.push(j);
                }
            }
        }
    }
    cands.sort_unstable();
    cands
        .into_iter()
        .map(|j| {
            let (ris, vis) = ctx.a.col(j);
            let mut d = 0.0;
            for (&i, &v) in ris.iter().zip(vis) {
                if let Some(&pos) = state.row_pos.get(&i) {
                    d += state.residual[pos] * v;
                }
            }
            let rho2 = (state.r_norm * state.r_norm - d * d / ctx.col_sqnorm[j]).max(0.0);
            (j, rho2.sqrt())
        })
        .collect()
}

/// Adds the `add_count` candidates with the smallest scores (ties toward the
/// smaller index) and updates the least-squares solution.
pub fn spai_select_and_augment(
    ctx: &SaiContext,
    state: &mut ColumnState,
    scored: &[(usize, f64)],
    add_count: usize,
) {
    let mut order: Vec<&(usize, f64)> = scored.iter().collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut chosen: Vec<usize> = order
        .into_iter()
        .take(add_count.max(1))
        .map(|&(j, _)| j)
        .collect();
    chosen.sort_unstable();
    state.augment_with_columns(ctx, &chosen);
}
