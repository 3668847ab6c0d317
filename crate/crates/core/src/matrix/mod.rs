//! Dense storage and the direct kernels every other module builds on.

mod dense;
mod lu;
mod svd;

pub use dense::DenseMatrix;
pub use lu::{
    lu_full, lu_partial, solve_unit_lower_left, solve_upper_right, FullPivLU, PartialPivLU,
    SINGULAR_PIVOT,
};
pub use svd::{svd, truncate_svd, SvdResult};

pub(crate) use dense::{dot, norm2};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("singular matrix: pivot {pivot:e} at elimination step {step}")]
    Singular { step: usize, pivot: f64 },
    #[error("non-finite entry in input")]
    NonFinite,
    #[error("SVD did not converge")]
    NoConvergence,
}
