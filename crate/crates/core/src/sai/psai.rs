//! PSAI pattern growth: carry `a_k^(l+1) = A a_k^(l)` starting from `e_k` and
//! union the pattern with the carrier's support each loop.

use std::collections::BTreeMap;

use crate::sai::state::ColumnState;
use crate::sai::SaiContext;

/// One PSAI expansion step.
pub enum PsaiStep {
    /// Pattern grew by this many indices.
    Expanded(usize),
    /// The carrier's support adds nothing new; further loops cannot either.
    FixedPoint,
    /// Adding the new indices would exceed the per-column pattern cap.
    Capped,
}

/// Advances the power carrier one step and augments the pattern with its new
/// support indices.
pub fn psai_expand(ctx: &SaiContext, state: &mut ColumnState) -> PsaiStep {
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for (idx, &j) in state.power_support.iter().enumerate() {
        let w = state.power_values[idx];
        if w == 0.0 {
            continue;
        }
        let (ris, vis) = ctx.a.col(j);
        for (&i, &v) in ris.iter().zip(vis) {
            *acc.entry(i).or_insert(0.0) += v * w;
        }
    }
    acc.retain(|_, v| *v != 0.0);
    if acc.is_empty() {
        return PsaiStep::FixedPoint;
    }
    state.power_support = acc.keys().copied().collect();
    state.power_values = acc.values().copied().collect();

    let new_cols: Vec<usize> = state
        .power_support
        .iter()
        .copied()
        .filter(|j| !state.cols_set.contains(j))
        .collect();
    if new_cols.is_empty() {
        // every support index was already tried; the reachable set is closed
        return PsaiStep::FixedPoint;
    }
    if state.cols.len() + new_cols.len() > ctx.cap {
        return PsaiStep::Capped;
    }
    state.augment_with_columns(ctx, &new_cols);
    PsaiStep::Expanded(new_cols.len())
}
