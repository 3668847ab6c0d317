//! Off-diagonal block compression behind one interface: truncated SVD,
//! partially pivoted adaptive cross approximation, and the graph-driven
//! boundary-distance pseudo-skeleton (BDLR).

mod aca;
mod accessor;
mod bdlr;
mod monitor;

pub use aca::{aca_detailed, compress_aca, AcaResult, AcaTermination};
pub use accessor::{BlockAccessor, SubBlock};
pub use bdlr::{
    bdlr_detailed, compress_bdlr, compress_bdlr_adaptive, held_out_samples, pseudo_skeleton,
    AdaptiveBdlr, BdlrResult, SkeletonFactor,
};
pub use monitor::{error_curve, monitor_error, MonitorError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::GraphError;
use crate::matrix::{svd, truncate_svd, DenseMatrix, MatrixError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LowRankError {
    #[error("invalid compression config: {0}")]
    InvalidConfig(String),
    #[error("BDLR needs a block graph view and none was attached")]
    MissingGraph,
    #[error("skeleton intersection is zero but the block has entries up to {max_entry:e}; depth is too small")]
    DegenerateSkeleton { max_entry: f64 },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `A ≈ U·Vᵀ` with `U` of size `m×r` and `V` of size `n×r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactor {
    u: DenseMatrix,
    v: DenseMatrix,
}

impl LowRankFactor {
    /// Panics when `u` and `v` disagree on the rank.
    pub fn new(u: DenseMatrix, v: DenseMatrix) -> Self {
        assert_eq!(u.cols(), v.cols(), "U and V must have the same column count");
        Self { u, v }
    }

    pub fn zero(m: usize, n: usize) -> Self {
        Self {
            u: DenseMatrix::zeros(m, 0),
            v: DenseMatrix::zeros(n, 0),
        }
    }

    pub fn rank(&self) -> usize {
        self.u.cols()
    }

    pub fn rows(&self) -> usize {
        self.u.rows()
    }

    pub fn cols(&self) -> usize {
        self.v.rows()
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn into_parts(self) -> (DenseMatrix, DenseMatrix) {
        (self.u, self.v)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.u.matmul_t(&self.v)
    }

    /// First `k` rank-one terms.
    pub fn leading(&self, k: usize) -> LowRankFactor {
        let k = k.min(self.rank());
        Self {
            u: self.u.leading_cols(k),
            v: self.v.leading_cols(k),
        }
    }

    /// `U·(Vᵀ·X)` without forming the product.
    pub fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        self.u.matmul(&self.v.t_matmul(x))
    }

    /// Entry `(i, j)` of `U·Vᵀ`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        (0..self.rank()).map(|k| self.u[(i, k)] * self.v[(j, k)]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Svd,
    Aca,
    Bdlr,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Svd => "svd",
            Scheme::Aca => "aca",
            Scheme::Bdlr => "bdlr",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = LowRankError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "svd" => Ok(Scheme::Svd),
            "aca" => Ok(Scheme::Aca),
            "bdlr" => Ok(Scheme::Bdlr),
            other => Err(LowRankError::InvalidConfig(format!("unknown scheme `{other}`"))),
        }
    }
}

pub const DEFAULT_MONITOR_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionConfig {
    pub scheme: Scheme,
    /// Relative tolerance ε, in (0, 1).
    pub tol: f64,
    /// BFS depth for BDLR skeleton selection.
    pub depth: usize,
    /// Rank cap; `None` means `min(m, n)` of each block.
    pub max_rank: Option<usize>,
    /// Held-out rows (and as many columns) used for BDLR error monitoring.
    pub monitor_samples: usize,
}

impl CompressionConfig {
    pub fn new(scheme: Scheme, tol: f64) -> Self {
        Self {
            scheme,
            tol,
            depth: 0,
            max_rank: None,
            monitor_samples: DEFAULT_MONITOR_SAMPLES,
        }
    }

    pub fn svd(tol: f64) -> Self {
        Self::new(Scheme::Svd, tol)
    }

    pub fn aca(tol: f64) -> Self {
        Self::new(Scheme::Aca, tol)
    }

    pub fn bdlr(tol: f64, depth: usize) -> Self {
        Self {
            depth,
            ..Self::new(Scheme::Bdlr, tol)
        }
    }

    pub fn with_max_rank(mut self, max_rank: usize) -> Self {
        self.max_rank = Some(max_rank);
        self
    }

    pub fn validate(&self) -> Result<(), LowRankError> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(LowRankError::InvalidConfig(format!(
                "tolerance must lie in (0, 1), got {}",
                self.tol
            )));
        }
        if self.max_rank == Some(0) {
            return Err(LowRankError::InvalidConfig("max rank must be at least 1".into()));
        }
        Ok(())
    }

    /// Effective rank cap for an `m×n` block.
    pub fn rank_cap(&self, m: usize, n: usize) -> usize {
        let full = m.min(n);
        self.max_rank.map_or(full, |r| r.min(full))
    }
}

/// Truncated SVD of the materialized block, the accuracy reference.
pub fn compress_svd(
    block: &(impl BlockAccessor + ?Sized),
    cfg: &CompressionConfig,
) -> Result<LowRankFactor, LowRankError> {
    cfg.validate()?;
    let (m, n) = (block.nrows(), block.ncols());
    let s = svd(&block.to_dense())?;
    let f = truncate_svd(&s, cfg.tol);
    Ok(f.leading(cfg.rank_cap(m, n)))
}

/// Dispatches on `cfg.scheme`.
pub fn compress(
    block: &(impl BlockAccessor + ?Sized),
    cfg: &CompressionConfig,
) -> Result<LowRankFactor, LowRankError> {
    match cfg.scheme {
        Scheme::Svd => compress_svd(block, cfg),
        Scheme::Aca => compress_aca(block, cfg),
        Scheme::Bdlr => compress_bdlr(block, cfg),
    }
}

/// `‖A − U·Vᵀ‖_F / ‖A‖_F` against a materialized block (`0` for a zero
/// block approximated by zero).
pub fn relative_error(a: &DenseMatrix, f: &LowRankFactor) -> f64 {
    let reference = a.frobenius_norm();
    let err = a.sub(&f.to_dense()).frobenius_norm();
    if reference == 0.0 {
        err
    } else {
        err / reference
    }
}
