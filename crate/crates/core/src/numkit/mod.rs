//! Complex dense linear algebra kernels shared by every detector.

mod cholesky;
mod matrix;
mod qr;

pub use cholesky::{
    back_substitute, cholesky, cholesky_solve, cholesky_solve_matrix, forward_substitute, inv_sqrt,
    inverse_hermitian, invert_lower, invert_upper, solve_hermitian, HERMITIAN_TOLERANCE,
};
pub use matrix::{ComplexMatrix, ComplexVector, Permutation};
pub use qr::{qrd, sorted_qrd, SortedQrd, RANK_TOLERANCE, SORT_TIE_TOLERANCE};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix must have at least one row and one column")]
    EmptyShape,
    #[error("non-finite entry")]
    NonFinite,
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("rank deficient: pivot {pivot:e} at elimination step {step}")]
    RankDeficient { step: usize, pivot: f64 },
    #[error("matrix is not positive definite (pivot {index})")]
    NotPositiveDefinite { index: usize },
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("order is not a permutation")]
    InvalidPermutation,
}
