//! Sparse multiple right-hand-sides nonnegative least squares.
//!
//! Given a data matrix `M` (m × n) and a nonnegative dictionary `W` (m × r),
//! this crate approximates `M ≈ WH` with `H ≥ 0` sparse:
//!
//! 1. for every column `M(:, j)`, [`homotopy`] traces the full ℓ1
//!    regularization path of the NNLS subproblem, yielding one unbiased
//!    solution per support along the path;
//! 2. [`selector`] tabulates the best error per sparsity level and column,
//!    then spends a global nonzero budget greedily where it buys the largest
//!    error decrease per nonzero.
//!
//! [`mnnls::solve`] ties both together and also serves the per-column
//! k-sparse and unconstrained variants from the same paths.
//!
//! ```
//! use shamans::{solve, DenseMatrix, SolveConfig};
//!
//! let w = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
//! let m = DenseMatrix::from_rows(&[[1.0, 0.0], [2.0, 1.0], [3.0, 1.0]]).unwrap();
//! let (h, report) = solve(&m, &w, &SolveConfig::shamans(3)).unwrap();
//! assert_eq!(h.shape(), (2, 2));
//! assert!(report.rel_error < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod densela;
mod error;
pub mod homotopy;
pub mod mnnls;
pub mod nnls;
pub mod selector;

pub use densela::{frob_norm, gram, solve_spd, submatrix, DenseMatrix, IndexSet};
pub use error::{Error, Result};
pub use homotopy::{
    lambda_max, next_breakpoint, path_coefficients, regularization_path, unbias, Change,
    PathCoefficients, PathEntry, PathEvent, PathOptions, RegularizationPath,
};
pub use mnnls::{metrics, solve, solve_detailed, Mode, Solution, SolveConfig, UnmixReport};
pub use nnls::{nnls_active_set, NnlsSolution};
pub use selector::{
    assemble, build_cost_tables, delta_cost, init_gain, select, CostTables, Pick, SelectionOutcome,
    SelectionState,
};
