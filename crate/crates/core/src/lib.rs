//! Hierarchically off-diagonal low-rank (HODLR) direct solver with
//! pluggable off-diagonal compression, a GMRES driver that can use the
//! solver as a preconditioner, and generators for test fronts.

pub mod matrix;
pub mod graph;
pub mod lowrank;
pub mod hodlr;
pub mod frontgen;
pub mod krylov;
