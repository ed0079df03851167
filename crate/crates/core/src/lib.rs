//! Sparse approximate inverse preconditioning for irregular sparse systems.
//!
//! This crate builds adaptive sparse approximate inverse preconditioners
//! (SPAI, PSAI(tol), RSAI(tol)) and solves nonsymmetric systems whose
//! coefficient matrix has a few relatively dense columns and rows. Such
//! "double irregular" matrices make adaptive pattern searches expensive, so
//! the solver splits the matrix into a double regular part plus two low-rank
//! corrections, preconditions and solves the regular systems with BiCGStab,
//! and recovers the original solution through two Sherman-Morrison-Woodbury
//! capacitance systems with stopping tolerances chosen so the recovered
//! solution meets the requested accuracy.

pub mod cli;
pub mod csc;
pub mod dense;
pub mod error;
pub mod generate;
pub mod krylov;
pub mod matching;
pub mod matrix_market;
pub mod profile;
pub mod qr;
pub mod report;
pub mod sai;
pub mod transform;

pub use csc::CscMatrix;
pub use dense::{small_dense_solve, DenseMatrix};
pub use error::{Error, Result};
// pub use krylov::{bicgstab, KrylovStats};
pub use matching::{zero_free_diagonal_permutation, Permutation};
pub use matrix_market::{read_matrix_market, write_matrix_market};
pub use profile::{density_profile, DensityProfile};
pub use qr::QrFactor;
// pub use sai::{build_preconditioner, Preconditioner, SaiParams, Strategy};
// pub use transform::{derive_tolerances, solve_irregular, split, IrregularSplit, ToleranceSet};
