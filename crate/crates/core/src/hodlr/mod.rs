//! HODLR tree construction and the recursive direct factorization.
//!
//! For a node with children `L` and `R`,
//!
//! ```text
//! K = | K_L          U_L·V_LRᵀ |
//!     | U_R·V_RLᵀ    K_R       |
//! ```
//!
//! Writing `y₁ = V_LRᵀ·x_R` and `y₂ = V_RLᵀ·x_L` turns `K·x = z` into two
//! independent child solves plus a small coupled system:
//!
//! ```text
//! x_L = c_L − d_L·y₁,   c_L = K_L⁻¹ z_L,   d_L = K_L⁻¹ U_L
//! x_R = c_R − d_R·y₂,   c_R = K_R⁻¹ z_R,   d_R = K_R⁻¹ U_R
//!
//! | I            V_LRᵀ·d_R | |y₁|   |V_LRᵀ·c_R|
//! | V_RLᵀ·d_L    I         | |y₂| = |V_RLᵀ·c_L|
//! ```
//!
//! During factorization each child receives its sibling-coupling basis `U`
//! appended to the right-hand sides passed down from above, so `d` and `c`
//! come out of a single recursive solve.

mod factor;
mod tree;

pub use factor::{
    apply, factorize, relative_residual, ChildSchedule, FactorizeOptions, HodlrFactorization,
    LevelStats, NodeSummary, PhaseTimings, SolveReport,
};
pub use tree::{build_tree, HodlrNode, HodlrTree, DEFAULT_LEAF_SIZE};

use thiserror::Error;

use crate::graph::GraphError;
use crate::lowrank::LowRankError;
use crate::matrix::MatrixError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HodlrError {
    #[error("cannot build a tree with n = {n} and leaf threshold {leaf_threshold}")]
    InvalidTree { n: usize, leaf_threshold: usize },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("leaf block [{lo}, {hi}) is singular ({source})")]
    SingularLeaf {
        lo: usize,
        hi: usize,
        source: MatrixError,
    },
    #[error("coupling system at level {level}, node [{lo}, {hi}) is singular; compression is likely too aggressive ({source})")]
    SingularSchur {
        level: usize,
        lo: usize,
        hi: usize,
        source: MatrixError,
    },
    #[error("BDLR compression needs the front's sparse graph")]
    MissingGraph,
    #[error("right-hand side contains non-finite values")]
    NonFinite,
    #[error(transparent)]
    Compression(#[from] LowRankError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
