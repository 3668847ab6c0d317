//! Command-line experiments on HODLR fronts: generate test problems,
//! factor, solve, precondition GMRES, and study off-diagonal ranks and
//! pivot locations. Every command emits a JSON [`report::Report`].

pub mod args;
pub mod commands;
pub mod input;
pub mod mmio;
pub mod report;

pub use args::Cli;
pub use commands::{execute, Outcome};

use hodlrkit::frontgen::FrontgenError;
use hodlrkit::graph::GraphError;
use hodlrkit::hodlr::HodlrError;
use hodlrkit::krylov::KrylovError;
use hodlrkit::lowrank::LowRankError;
use hodlrkit::matrix::MatrixError;
use thiserror::Error;

/// Process exit code for a run that finished but did not converge.
pub const EXIT_NON_CONVERGENCE: i32 = 2;
/// Process exit code for any failure.
pub const EXIT_ERROR: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    MatrixMarket(#[from] mmio::MmError),
    #[error("block ({level}, {index}) does not exist: level {level} has {available} split node(s)")]
    BlockOutOfRange {
        level: usize,
        index: usize,
        available: usize,
    },
    #[error("{0} needs a graph (--graph, or a generated grid front)")]
    MissingGraph(&'static str),
    #[error(transparent)]
    Frontgen(#[from] FrontgenError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Hodlr(#[from] HodlrError),
    #[error(transparent)]
    Krylov(#[from] KrylovError),
    #[error(transparent)]
    LowRank(#[from] LowRankError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}
