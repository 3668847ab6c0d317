//! Adaptive cross approximation with partial pivoting.

use serde::Serialize;

use super::{BlockAccessor, CompressionConfig, LowRankError, LowRankFactor};
use crate::matrix::{dot, norm2, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AcaTermination {
    /// The newest cross fell below `ε` times the approximant estimate.
    Converged,
    MaxRank,
    /// Every row was visited; the block is represented exactly up to the
    /// rows it could see.
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct AcaResult {
    pub factor: LowRankFactor,
    pub termination: AcaTermination,
    /// Times a zero residual row forced a jump to an untouched row.
    pub restarts: usize,
    /// Running estimate of `‖U·Vᵀ‖_F`.
    pub norm_estimate: f64,
}

pub fn compress_aca(
    block: &(impl BlockAccessor + ?Sized),
    cfg: &CompressionConfig,
) -> Result<LowRankFactor, LowRankError> {
    Ok(aca_detailed(block, cfg)?.factor)
}

/// Partially pivoted ACA starting from row 0.
///
/// Each step takes the residual row at the current pivot row, pivots on its
/// largest unused entry, forms the residual column there, and moves to the
/// largest unused entry of that column. A cross with
/// `‖u‖·‖v‖ ≤ ε·‖Σ u_l v_lᵀ‖_F` ends the iteration and is not appended.
/// Only the visited rows and columns of the block are ever read.
pub fn aca_detailed(
    block: &(impl BlockAccessor + ?Sized),
    cfg: &CompressionConfig,
) -> Result<AcaResult, LowRankError> {
    cfg.validate()?;
    let (m, n) = (block.nrows(), block.ncols());
    let cap = cfg.rank_cap(m, n);
    let mut us: Vec<Vec<f64>> = Vec::new();
    let mut vs: Vec<Vec<f64>> = Vec::new();
    let mut row_used = vec![false; m];
    let mut col_used = vec![false; n];
    let mut norm_sq = 0.0f64;
    let mut restarts = 0usize;
    let mut next_row = if m > 0 && n > 0 { Some(0) } else { None };
    let mut termination = AcaTermination::Exhausted;

    while let Some(i) = next_row {
        if us.len() >= cap {
            termination = AcaTermination::MaxRank;
            break;
        }
        row_used[i] = true;
        let mut row = block.row(i);
        for (u, v) in us.iter().zip(&vs) {
            let ui = u[i];
            if ui != 0.0 {
                for (r, vj) in row.iter_mut().zip(v) {
                    *r -= ui * vj;
                }
            }
        }
        let pivot_col = argmax_unused(&row, &col_used);
        let Some(j) = pivot_col.filter(|&j| row[j] != 0.0) else {
            // Zero residual row: nothing to learn here, jump to a fresh row.
            restarts += 1;
            next_row = row_used.iter().position(|used| !used);
            continue;
        };
        let pivot = row[j];
        for r in &mut row {
            *r /= pivot;
        }
        let v = row;
        let mut u = block.col(j);
        for (ul, vl) in us.iter().zip(&vs) {
            let vj = vl[j];
            if vj != 0.0 {
                for (x, y) in u.iter_mut().zip(ul) {
                    *x -= vj * y;
                }
            }
        }

        let (nu, nv) = (norm2(&u), norm2(&v));
        let step = nu * nv;
        if !us.is_empty() && step <= cfg.tol * norm_sq.sqrt() {
            termination = AcaTermination::Converged;
            break;
        }
        let cross: f64 = us
            .iter()
            .zip(&vs)
            .map(|(ul, vl)| dot(ul, &u) * dot(vl, &v))
            .sum();
        norm_sq = (norm_sq + 2.0 * cross + step * step).max(0.0);
        col_used[j] = true;
        next_row = argmax_unused(&u, &row_used).or_else(|| row_used.iter().position(|used| !used));
        us.push(u);
        vs.push(v);
    }

    let r = us.len();
    let u = DenseMatrix::from_col_major(m, r, us.concat())?;
    let v = DenseMatrix::from_col_major(n, r, vs.concat())?;
    Ok(AcaResult {
        factor: LowRankFactor::new(u, v),
        termination,
        restarts,
        norm_estimate: norm_sq.sqrt(),
    })
}

/// Index of the largest `|x_k|` among entries not yet used, ties to the
/// lowest index; `None` if every entry is used.
fn argmax_unused(x: &[f64], used: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, (&v, &u)) in x.iter().zip(used).enumerate() {
        if u {
            continue;
        }
        let a = v.abs();
        if best.is_none_or(|(_, b)| a > b) {
            best = Some((k, a));
        }
    }
    best.map(|(k, _)| k)
}
