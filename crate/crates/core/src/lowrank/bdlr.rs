//! Boundary-distance pseudo-skeleton compression.
//!
//! Rows and columns near the graph interface between the two index sets are
//! taken as the skeleton `R = A(I', :)`, `C = A(:, J')`, and the block is
//! approximated by `C·Â⁻¹·R` with `Â = A(I', J')`. The pseudo-inverse is
//! applied through a complete-pivoting LU truncated at relative pivot size ε.

use log::debug;

use super::{
    monitor_error, BlockAccessor, CompressionConfig, LowRankError, LowRankFactor, MonitorError,
};
use crate::graph::{distance_index, select_by_depth, BlockGraphView, GraphError, Side};
use crate::matrix::{lu_full, solve_unit_lower_left, solve_upper_right};

/// Entries at or below this magnitude count as structural zeros.
const NEGLIGIBLE_ENTRY: f64 = 1e-300;

#[derive(Debug, Clone)]
pub struct SkeletonFactor {
    pub factor: LowRankFactor,
    /// Signed pivots of `Â` in elimination order.
    pub pivots: Vec<f64>,
    /// Block row of each pivot, in elimination order.
    pub pivot_rows: Vec<usize>,
    /// Block column of each pivot, in elimination order.
    pub pivot_cols: Vec<usize>,
}

/// `C̃·R̃` with `C̃ = (C·Q)(:, :r)·U₁₁⁻¹` and `R̃ = L₁₁⁻¹·(P·R)(:r, :)`, where
/// `P·Â·Q = L·U` and `r` is the leading run of pivots with `|p_k| ≥ tol·|p_0|`,
/// capped at `max_rank`.
///
/// Because both triangular solves act on leading corners, the first `k`
/// columns of the result are exactly the rank-`k` truncation.
pub fn pseudo_skeleton(
    block: &(impl BlockAccessor + ?Sized),
    rows: &[usize],
    cols: &[usize],
    tol: f64,
    max_rank: usize,
) -> Result<SkeletonFactor, LowRankError> {
    let (m, n) = (block.nrows(), block.ncols());
    let r_mat = block.select_rows(rows);
    let c_mat = block.select_cols(cols);
    let a_hat = r_mat.select_cols(cols);
    let lu = lu_full(&a_hat);
    let r = lu.numerical_rank(tol).min(max_rank);
    let pivot_rows: Vec<usize> = lu.row_perm()[..lu.steps()].iter().map(|&k| rows[k]).collect();
    let pivot_cols: Vec<usize> = lu.col_perm()[..lu.steps()].iter().map(|&k| cols[k]).collect();

    if r == 0 {
        let max_entry = r_mat.max_abs().max(c_mat.max_abs());
        if max_entry > NEGLIGIBLE_ENTRY {
            return Err(LowRankError::DegenerateSkeleton { max_entry });
        }
        return Ok(SkeletonFactor {
            factor: LowRankFactor::zero(m, n),
            pivots: lu.pivots().to_vec(),
            pivot_rows,
            pivot_cols,
        });
    }

    let cq = c_mat.select_cols(&lu.col_perm()[..r]);
    let c_tilde = solve_upper_right(&cq, &lu.leading_upper(r));
    let pr = r_mat.select_rows(&lu.row_perm()[..r]);
    let r_tilde = solve_unit_lower_left(&lu.leading_lower(r), &pr);
    Ok(SkeletonFactor {
        factor: LowRankFactor::new(c_tilde, r_tilde.transpose()),
        pivots: lu.pivots().to_vec(),
        pivot_rows,
        pivot_cols,
    })
}

#[derive(Debug, Clone)]
pub struct BdlrResult {
    pub factor: LowRankFactor,
    pub skeleton_rows: Vec<usize>,
    pub skeleton_cols: Vec<usize>,
    pub pivots: Vec<f64>,
    pub held_out_rows: Vec<usize>,
    pub held_out_cols: Vec<usize>,
    /// Error on the held-out rows and columns; `None` when the skeleton
    /// already covers the whole reachable block.
    pub monitor: Option<MonitorError>,
}

pub fn compress_bdlr(
    block: &(impl BlockAccessor + ?Sized),
    cfg: &CompressionConfig,
) -> Result<LowRankFactor, LowRankError> {
    Ok(bdlr_detailed(block, cfg)?.factor)
}

/// BDLR at the fixed `(cfg.tol, cfg.depth)` pair. The held-out error is
/// measured and reported but never used to change the depth.
pub fn bdlr_detailed(
    block: &(impl BlockAccessor + ?Sized),
    cfg: &CompressionConfig,
) -> Result<BdlrResult, LowRankError> {
    cfg.validate()?;
    let view = block.graph_view().ok_or(LowRankError::MissingGraph)?;
    let (m, n) = (block.nrows(), block.ncols());
    let skeleton = match select_by_depth(view, cfg.depth) {
        Ok(s) => s,
        Err(GraphError::EmptySelection { .. }) => {
            return Ok(BdlrResult {
                factor: LowRankFactor::zero(m, n),
                skeleton_rows: Vec::new(),
                skeleton_cols: Vec::new(),
                pivots: Vec::new(),
                held_out_rows: Vec::new(),
                held_out_cols: Vec::new(),
                monitor: None,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let sk = pseudo_skeleton(
        block,
        &skeleton.rows,
        &skeleton.cols,
        cfg.tol,
        cfg.rank_cap(m, n),
    )?;
    let (held_rows, held_cols) = held_out_samples(view, cfg.depth, cfg.monitor_samples);
    if sk.factor.rank() == 0 {
        let max_entry = held_rows
            .iter()
            .flat_map(|&i| block.row(i))
            .chain(held_cols.iter().flat_map(|&j| block.col(j)))
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        if max_entry > NEGLIGIBLE_ENTRY {
            return Err(LowRankError::DegenerateSkeleton { max_entry });
        }
    }
    let monitor = if held_rows.is_empty() && held_cols.is_empty() {
        None
    } else {
        Some(monitor_error(block, &sk.factor, &held_rows, &held_cols))
    };
    if let Some(mon) = &monitor {
        debug!(
            "bdlr {}x{} depth {} skeleton {}x{} rank {} held-out error {:.3e}",
            m,
            n,
            cfg.depth,
            skeleton.rows.len(),
            skeleton.cols.len(),
            sk.factor.rank(),
            mon.value
        );
    }
    Ok(BdlrResult {
        factor: sk.factor,
        skeleton_rows: skeleton.rows,
        skeleton_cols: skeleton.cols,
        pivots: sk.pivots,
        held_out_rows: held_rows,
        held_out_cols: held_cols,
        monitor,
    })
}

/// Up to `samples` rows and `samples` columns just outside the depth-`depth`
/// skeleton, taken layer by layer from `depth + 1` outward.
pub fn held_out_samples(
    view: &BlockGraphView<'_>,
    depth: usize,
    samples: usize,
) -> (Vec<usize>, Vec<usize>) {
    let pick = |side| {
        let index = distance_index(view, side);
        let max = index.max_finite().unwrap_or(0);
        let mut out = Vec::new();
        for d in depth + 1..=max {
            for k in index.layer(d) {
                if out.len() == samples {
                    return out;
                }
                out.push(k);
            }
        }
        out
    };
    (pick(Side::Row), pick(Side::Col))
}

#[derive(Debug, Clone)]
pub struct AdaptiveBdlr {
    pub result: BdlrResult,
    pub depth: usize,
}

/// Grows the depth one BFS layer at a time, starting at `cfg.depth`, until
/// the held-out error drops to `target`, the skeleton leaves nothing to hold
/// out, or `max_depth` is reached.
pub fn compress_bdlr_adaptive(
    block: &(impl BlockAccessor + ?Sized),
    cfg: &CompressionConfig,
    target: f64,
    max_depth: usize,
) -> Result<AdaptiveBdlr, LowRankError> {
    let mut depth = cfg.depth;
    loop {
        let step = CompressionConfig { depth, ..*cfg };
        let result = bdlr_detailed(block, &step)?;
        let done = match &result.monitor {
            None => true,
            Some(mon) => mon.value <= target,
        };
        if done || depth >= max_depth {
            return Ok(AdaptiveBdlr { result, depth });
        }
        depth += 1;
    }
}
