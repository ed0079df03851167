//! Column-wise sparse approximate inverses by F-norm minimization.
//!
//! `M ~ A^{-1}` is built one column at a time: each column solves
//! `min ||A m_k - e_k||_2` over an adaptively grown sparsity pattern. Three
//! strategies are provided, differing only in how the pattern grows:
//!
//! * SPAI scores candidate indices by the one-dimensional residual reduction
//!   and adds the few most profitable ones per loop;
//! * PSAI carries powers of `A` applied to `e_k` and unions their support
//!   into the pattern, with an adaptive dropping rule keeping `M` sparse;
//! * RSAI chases the dominant residual entries, augmenting with the column
//!   indices of those rows, with the same dropping rule.
//!
//! Columns are independent and built in parallel over a shared read-only
//! matrix; results are merged in index order, so the output is deterministic
//! regardless of scheduling.

mod psai;
mod rsai;
mod spai;
mod state;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csc::CscMatrix;
use crate::error::{Error, Result};

pub use psai::{psai_expand, PsaiStep};
pub use rsai::{rsai_augment, rsai_dominant};
pub use spai::{spai_candidates, spai_select_and_augment};
pub use state::ColumnState;

/// Adaptive pattern strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Spai,
    Psai,
    Rsai,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Spai => "spai",
            Strategy::Psai => "psai",
            Strategy::Rsai => "rsai",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spai" => Ok(Strategy::Spai),
            "psai" => Ok(Strategy::Psai),
            "rsai" => Ok(Strategy::Rsai),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy '{other}' (expected spai, psai or rsai)"
            ))),
        }
    }
}

/// Parameters of a preconditioner build.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaiParams {
    pub strategy: Strategy,
    /// Per-column residual target; the loop stops once `||r_k|| <= eta`.
    pub eta: f64,
    /// Maximum refinement loops per column.
    pub l_max: usize,
    /// Most-profitable indices added per SPAI loop.
    pub add_count: usize,
    /// Dominant indices chosen per RSAI loop.
    pub dominant_count: usize,
    /// Apply the adaptive dropping rule each loop (PSAI/RSAI).
    pub drop_enabled: bool,
    /// Per-column pattern cap before dropping; `None` means `10 p`.
    pub pattern_cap: Option<usize>,
    /// Collect drop events in the build log.
    pub record_drops: bool,
}

impl SaiParams {
    /// Defaults matching the experimental protocol: `eta = 0.4`; 20 loops and
    /// 5 added indices for SPAI; 10 loops for PSAI/RSAI with dropping on;
    /// 3 dominant indices for RSAI.
    pub fn new(strategy: Strategy) -> Self {
        SaiParams {
            strategy,
            eta: 0.4,
            l_max: match strategy {
                Strategy::Spai => 20,
                Strategy::Psai | Strategy::Rsai => 10,
            },
            add_count: 5,
            dominant_count: 3,
            drop_enabled: !matches!(strategy, Strategy::Spai),
            pattern_cap: None,
            record_drops: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eta must lie in (0, 1), got {}",
                self.eta
            )));
        }
        if self.l_max < 1 {
            return Err(Error::InvalidParameter("l_max must be at least 1".into()));
        }
        if self.add_count < 1 {
            return Err(Error::InvalidParameter("add_count must be at least 1".into()));
        }
        if self.dominant_count < 1 {
            return Err(Error::InvalidParameter(
                "dominant_count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// A built column-wise sparse approximate inverse.
#[derive(Debug, Clone)]
pub struct Preconditioner {
    /// The approximate inverse, column k approximating `A^{-1} e_k`.
    pub m: CscMatrix,
    /// Final `||A m_k - e_k||` per column.
    pub col_residuals: Vec<f64>,
    /// Number of columns whose residual stayed above `eta`.
    pub n_c: usize,
    /// `nnz(M) / nnz(A)` for the matrix the build ran on.
    pub spar: f64,
    /// Wall-clock build time.
    pub build_seconds: f64,
}

/// One dropped entry, recorded when `record_drops` is set.
#[derive(Debug, Clone)]
pub struct DropEvent {
    pub col: usize,
    pub row: usize,
    pub threshold: f64,
    pub value: f64,
}

/// Diagnostics collected alongside a build.
#[derive(Debug, Default)]
pub struct BuildLog {
    pub drop_events: Vec<DropEvent>,
    pub capped_columns: Vec<usize>,
    /// Per column: `(r_norm before, r_norm after)` for each augmentation.
    pub loop_traces: Vec<Vec<(f64, f64)>>,
}

/// Result of building one column.
#[derive(Debug, Clone)]
pub struct ColumnOutcome {
    pub k: usize,
    pub pattern: Vec<usize>,
    pub values: Vec<f64>,
    pub r_norm: f64,
    pub loop_trace: Vec<(f64, f64)>,
    pub capped: bool,
    pub drops: Vec<DropEvent>,
}

/// Shared read-only context for all column builds.
pub struct SaiContext<'a> {
    pub a: &'a CscMatrix,
    pub(crate) at: Option<CscMatrix>,
    pub(crate) col_sqnorm: Vec<f64>,
    pub a_one_norm: f64,
    /// Average nonzeros per column of `a`, clamped to >= 1.
    pub p: usize,
    /// Per-column pattern cap (pre-drop).
    pub cap: usize,
    pub params: SaiParams,
}

impl<'a> SaiContext<'a> {
    pub fn new(a: &'a CscMatrix, params: SaiParams) -> Result<SaiContext<'a>> {
        params.validate()?;
        if !a.is_square() {
            return Err(Error::InvalidMatrix(
                "preconditioner build requires a square matrix".into(),
            ));
        }
        let n = a.n_cols();
        let needs_transpose = matches!(params.strategy, Strategy::Spai | Strategy::Rsai);
        let at = needs_transpose.then(|| a.transpose());
        let col_sqnorm = match params.strategy {
            Strategy::Spai => (0..n)
                .map(|j| a.col(j).1.iter().map(|v| v * v).sum())
                .collect(),
            _ => Vec::new(),
        };
        let a_one_norm = if params.drop_enabled { a.one_norm() } else { 0.0 };
        let p = if n == 0 { 1 } else { (a.nnz() / n).max(1) };
        let cap = params.pattern_cap.unwrap_or(10 * p).max(1);
        Ok(SaiContext {
            a,
            at,
            col_sqnorm,
            a_one_norm,
            p,
            cap,
            params,
        })
    }
}

/// Initial state for column `k`: pattern `{k}`, the one-column least-squares
/// problem solved. `None` for a structurally empty column.
pub fn init_column(ctx: &SaiContext, k: usize) -> Option<ColumnState> {
    ColumnState::init(ctx, k)
}

/// Applies the dropping rule to the column, re-solving until every surviving
/// off-diagonal entry exceeds the threshold. Returns the drop events.
pub fn apply_dropping(ctx: &SaiContext, state: &mut ColumnState) -> Vec<DropEvent> {
    state.apply_dropping(ctx)
}

/// Runs the full adaptive loop for column `k`.
pub fn run_column(ctx: &SaiContext, k: usize) -> ColumnOutcome {
    let Some(mut state) = ColumnState::init(ctx, k) else {
        // structurally empty column: m_k = 0 with residual ||e_k|| = 1
        return ColumnOutcome {
            k,
            pattern: Vec::new(),
            values: Vec::new(),
            r_norm: 1.0,
            loop_trace: Vec::new(),
            capped: false,
            drops: Vec::new(),
        };
    };
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut drops: Vec<DropEvent> = Vec::new();
    let mut capped = false;
    let mut l = 0usize;
    while state.r_norm > ctx.params.eta && l < ctx.params.l_max {
        let before = state.r_norm;
        let advanced = match ctx.params.strategy {
            Strategy::Spai => {
                let scored = spai_candidates(ctx, &state);
                if scored.is_empty() {
                    false
                } else {
                    spai_select_and_augment(ctx, &mut state, &scored, ctx.params.add_count);
                    true
                }
            }
            Strategy::Psai => match psai_expand(ctx, &mut state) {
                PsaiStep::Expanded(_) => true,
                PsaiStep::FixedPoint => false,
                PsaiStep::Capped => {
                    capped = true;
                    false
                }
            },
            Strategy::Rsai => {
                let dominant = rsai_dominant(&mut state, ctx.params.dominant_count);
                if dominant.is_empty() {
                    false
                } else {
                    rsai_augment(ctx, &mut state, &dominant);
                    true
                }
            }
        };
        if !advanced {
            break;
        }
        trace.push((before, state.r_norm));
        if ctx.params.drop_enabled {
            let mut events = state.apply_dropping(ctx);
            if ctx.params.record_drops {
                drops.append(&mut events);
            }
        }
        l += 1;
    }
    if capped {
        log::warn!(
            "column {k}: pattern cap {} reached before the residual target, stopping early",
            ctx.cap
        );
    }
    ColumnOutcome {
        k,
        pattern: state.cols,
        values: state.solution,
        r_norm: state.r_norm,
        loop_trace: trace,
        capped,
        drops,
    }
}

/// Builds the sparse approximate inverse of `a` under `params`.
///
/// Requires a square matrix; a zero-free diagonal is expected (permute
/// first). Columns run in parallel and merge in index order.
pub fn build_preconditioner(a: &CscMatrix, params: &SaiParams) -> Result<Preconditioner> {
    build_impl(a, params).map(|(p, _)| p)
}

/// As [`build_preconditioner`], also returning per-column diagnostics.
pub fn build_preconditioner_logged(
    a: &CscMatrix,
    params: &SaiParams,
) -> Result<(Preconditioner, BuildLog)> {
    build_impl(a, params)
}

fn build_impl(a: &CscMatrix, params: &SaiParams) -> Result<(Preconditioner, BuildLog)> {
    let start = Instant::now();
    let ctx = SaiContext::new(a, params.clone())?;
    let n = a.n_cols();
    let outcomes: Vec<ColumnOutcome> = (0..n)
        .into_par_iter()
        .map(|k| run_column(&ctx, k))
        .collect();

    let nnz: usize = outcomes.iter().map(|o| o.pattern.len()).sum();
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    col_ptr.push(0);
    for outcome in &outcomes {
        let mut entries: Vec<(usize, f64)> = outcome
            .pattern
            .iter()
            .copied()
            .zip(outcome.values.iter().copied())
            .collect();
        entries.sort_by_key(|&(r, _)| r);
        for (r, v) in entries {
            row_idx.push(r);
            values.push(v);
        }
        col_ptr.push(row_idx.len());
    }
    let m = CscMatrix::new(n, n, col_ptr, row_idx, values)?;

    let col_residuals: Vec<f64> = outcomes.iter().map(|o| o.r_norm).collect();
    let n_c = col_residuals.iter().filter(|&&r| r > ctx.params.eta).count();
    let spar = if a.nnz() == 0 {
        0.0
    } else {
        m.nnz() as f64 / a.nnz() as f64
    };
    let mut log = BuildLog {
        drop_events: Vec::new(),
        capped_columns: Vec::new(),
        loop_traces: Vec::with_capacity(n),
    };
    for mut outcome in outcomes {
        if outcome.capped {
            log.capped_columns.push(outcome.k);
        }
        log.drop_events.append(&mut outcome.drops);
        log.loop_traces.push(outcome.loop_trace);
    }
    Ok((
        Preconditioner {
            m,
            col_residuals,
            n_c,
            spar,
            build_seconds: start.elapsed().as_secs_f64(),
        },
        log,
    ))
}
