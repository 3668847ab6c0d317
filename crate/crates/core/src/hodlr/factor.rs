use std::time::Instant;

use log::debug;
use serde::Serialize;

use super::{HodlrError, HodlrTree};
use crate::graph::{BlockGraphView, SparsePattern};
use crate::lowrank::{compress, BlockAccessor, CompressionConfig, LowRankFactor, Scheme, SubBlock};
use crate::matrix::{lu_partial, DenseMatrix, PartialPivLU};

/// Order in which the two children of a node are factorized. The children
/// share no data, so every schedule gives bit-identical factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChildSchedule {
    /// Both children through `rayon::join`.
    #[default]
    Parallel,
    LeftFirst,
    RightFirst,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FactorizeOptions {
    pub schedule: ChildSchedule,
}

#[derive(Debug, Clone, PartialEq)]
enum NodeFactor {
    Leaf {
        lu: PartialPivLU,
    },
    Internal {
        level: usize,
        left: Box<NodeFactor>,
        right: Box<NodeFactor>,
        /// `K(L, R) ≈ U_L·V_LRᵀ`.
        upper: LowRankFactor,
        /// `K(R, L) ≈ U_R·V_RLᵀ`.
        lower: LowRankFactor,
        /// `K_L⁻¹·U_L`, one column per rank of `upper`.
        d_left: DenseMatrix,
        /// `K_R⁻¹·U_R`, one column per rank of `lower`.
        d_right: DenseMatrix,
        /// LU of the coupling system; `None` when both ranks are zero.
        schur: Option<PartialPivLU>,
    },
}

/// Level-by-level off-diagonal rank and time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStats {
    pub level: usize,
    /// Off-diagonal blocks compressed at this level (two per internal node).
    pub blocks: usize,
    pub max_rank: usize,
    pub mean_rank: f64,
    /// Compression, coupling assembly and leaf LU time spent at this level.
    pub seconds: f64,
}

/// Wall-clock seconds per phase. Phases run inside parallel children are
/// summed over threads.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PhaseTimings {
    pub low_rank: f64,
    pub leaf_lu: f64,
    pub schur: f64,
    pub factor_total: f64,
    pub solve: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub n: usize,
    pub leaf_size: usize,
    pub levels: Vec<LevelStats>,
    pub timings: PhaseTimings,
    /// `‖K·x − F‖_F / ‖F‖_F` against the uncompressed front, once a solve
    /// has been checked.
    pub residual: Option<f64>,
}

impl SolveReport {
    /// Max rank per level, root first, restricted to levels that hold
    /// off-diagonal blocks.
    pub fn max_ranks(&self) -> Vec<usize> {
        self.levels
            .iter()
            .filter(|l| l.blocks > 0)
            .map(|l| l.max_rank)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSummary {
    pub level: usize,
    pub lo: usize,
    pub hi: usize,
    pub upper_rank: usize,
    pub lower_rank: usize,
    pub d_left_cols: usize,
    pub d_right_cols: usize,
    /// Largest deviation of the coupling system's diagonal blocks from the
    /// identity (exactly zero by construction).
    pub schur_diagonal_defect: f64,
}

/// Immutable product of [`factorize`]; solves are re-entrant.
#[derive(Debug, Clone, PartialEq)]
pub struct HodlrFactorization {
    n: usize,
    tree: HodlrTree,
    root: NodeFactor,
}

#[derive(Default)]
struct Telemetry {
    level_ranks: Vec<Vec<usize>>,
    level_seconds: Vec<f64>,
    low_rank: f64,
    leaf_lu: f64,
    schur: f64,
}

impl Telemetry {
    fn ensure(&mut self, level: usize) {
        if self.level_ranks.len() <= level {
            self.level_ranks.resize(level + 1, Vec::new());
            self.level_seconds.resize(level + 1, 0.0);
        }
    }

    fn merge(&mut self, other: Telemetry) {
        self.ensure(other.level_ranks.len().saturating_sub(1));
        for (l, ranks) in other.level_ranks.into_iter().enumerate() {
            self.level_ranks[l].extend(ranks);
        }
        for (l, s) in other.level_seconds.into_iter().enumerate() {
            self.level_seconds[l] += s;
        }
        self.low_rank += other.low_rank;
        self.leaf_lu += other.leaf_lu;
        self.schur += other.schur;
    }
}

struct Context<'a, A: BlockAccessor + ?Sized> {
    front: &'a A,
    graph: Option<&'a SparsePattern>,
    tree: &'a HodlrTree,
    cfg: &'a CompressionConfig,
    schedule: ChildSchedule,
}

/// Factorizes `front` over `tree`, compressing every off-diagonal block with
/// `cfg`.
///
/// `graph` is the front's sparse graph in front-local numbering (vertex `k`
/// is front row `k`); it is required for BDLR and ignored otherwise.
pub fn factorize<A: BlockAccessor + ?Sized>(
    front: &A,
    graph: Option<&SparsePattern>,
    tree: &HodlrTree,
    cfg: &CompressionConfig,
    options: &FactorizeOptions,
) -> Result<(HodlrFactorization, SolveReport), HodlrError> {
    let n = tree.n();
    if front.nrows() != n || front.ncols() != n {
        return Err(HodlrError::DimensionMismatch {
            expected: (n, n),
            found: (front.nrows(), front.ncols()),
        });
    }
    cfg.validate()?;
    if cfg.scheme == Scheme::Bdlr {
        match graph {
            None => return Err(HodlrError::MissingGraph),
            Some(g) if g.n() != n => {
                return Err(HodlrError::DimensionMismatch {
                    expected: (n, n),
                    found: (g.n(), g.n()),
                })
            }
            Some(_) => {}
        }
    }
    let ctx = Context {
        front,
        graph,
        tree,
        cfg,
        schedule: options.schedule,
    };
    let start = Instant::now();
    let (root, _, telemetry) = factor_node(&ctx, 0, DenseMatrix::zeros(n, 0))?;
    let total = start.elapsed().as_secs_f64();

    let levels = (0..=tree.depth())
        .map(|level| {
            let ranks = telemetry.level_ranks.get(level).cloned().unwrap_or_default();
            let blocks = ranks.len();
            LevelStats {
                level,
                blocks,
                max_rank: ranks.iter().copied().max().unwrap_or(0),
                mean_rank: if blocks == 0 {
                    0.0
                } else {
                    ranks.iter().sum::<usize>() as f64 / blocks as f64
                },
                seconds: telemetry.level_seconds.get(level).copied().unwrap_or(0.0),
            }
        })
        .collect();
    let report = SolveReport {
        n,
        leaf_size: tree.leaf_threshold(),
        levels,
        timings: PhaseTimings {
            low_rank: telemetry.low_rank,
            leaf_lu: telemetry.leaf_lu,
            schur: telemetry.schur,
            factor_total: total,
            solve: 0.0,
        },
        residual: None,
    };
    debug!("factorized n = {n} in {total:.3e} s, max ranks {:?}", report.max_ranks());
    Ok((
        HodlrFactorization {
            n,
            tree: tree.clone(),
            root,
        },
        report,
    ))
}

/// Returns the node factor and `K_node⁻¹·z`.
fn factor_node<A: BlockAccessor + ?Sized>(
    ctx: &Context<'_, A>,
    k: usize,
    z: DenseMatrix,
) -> Result<(NodeFactor, DenseMatrix, Telemetry), HodlrError> {
    let node = ctx.tree.node(k);
    let mut tel = Telemetry::default();
    tel.ensure(node.level);

    let Some((left_k, right_k)) = node.children else {
        let t = Instant::now();
        let block = ctx.front.block(node.range(), node.range());
        let lu = lu_partial(&block).map_err(|source| HodlrError::SingularLeaf {
            lo: node.lo,
            hi: node.hi,
            source,
        })?;
        let x = lu.solve(&z).expect("right-hand side sized to the leaf");
        let dt = t.elapsed().as_secs_f64();
        tel.leaf_lu += dt;
        tel.level_seconds[node.level] += dt;
        return Ok((NodeFactor::Leaf { lu }, x, tel));
    };

    let (lo, mid, hi) = (node.lo, node.mid(), node.hi);
    let t = Instant::now();
    let compress_block = |rows: std::ops::Range<usize>, cols: std::ops::Range<usize>| {
        let sub = SubBlock::new(ctx.front, rows.clone(), cols.clone());
        match (ctx.cfg.scheme, ctx.graph) {
            (Scheme::Bdlr, Some(g)) => {
                let view = BlockGraphView::from_ranges(g, rows, cols)?;
                Ok::<_, HodlrError>(compress(&sub.with_graph(view), ctx.cfg)?)
            }
            _ => Ok(compress(&sub, ctx.cfg)?),
        }
    };
    let (upper, lower) = match ctx.schedule {
        ChildSchedule::Parallel => rayon::join(
            || compress_block(lo..mid, mid..hi),
            || compress_block(mid..hi, lo..mid),
        ),
        _ => (compress_block(lo..mid, mid..hi), compress_block(mid..hi, lo..mid)),
    };
    let (upper, lower) = (upper?, lower?);
    let compress_time = t.elapsed().as_secs_f64();
    tel.low_rank += compress_time;
    let (ru, rl) = (upper.rank(), lower.rank());
    tel.level_ranks[node.level].extend([ru, rl]);

    let s = z.cols();
    let (nl, nr) = (mid - lo, hi - mid);
    let z_left = upper.u().hcat(&z.submatrix(0, 0, nl, s));
    let z_right = lower.u().hcat(&z.submatrix(nl, 0, nr, s));
    let (left, right) = match ctx.schedule {
        ChildSchedule::Parallel => rayon::join(
            || factor_node(ctx, left_k, z_left),
            || factor_node(ctx, right_k, z_right),
        ),
        ChildSchedule::LeftFirst => {
            let l = factor_node(ctx, left_k, z_left);
            (l, factor_node(ctx, right_k, z_right))
        }
        ChildSchedule::RightFirst => {
            let r = factor_node(ctx, right_k, z_right);
            (factor_node(ctx, left_k, z_left), r)
        }
    };
    let (left_f, x_left, left_tel) = left?;
    let (right_f, x_right, right_tel) = right?;
    tel.merge(left_tel);
    tel.merge(right_tel);

    let t = Instant::now();
    let d_left = x_left.leading_cols(ru);
    let c_left = x_left.submatrix(0, ru, nl, s);
    let d_right = x_right.leading_cols(rl);
    let c_right = x_right.submatrix(0, rl, nr, s);

    let schur = if ru + rl == 0 {
        None
    } else {
        let mut sm = DenseMatrix::identity(ru + rl);
        sm.set_submatrix(0, ru, &upper.v().t_matmul(&d_right));
        sm.set_submatrix(ru, 0, &lower.v().t_matmul(&d_left));
        Some(lu_partial(&sm).map_err(|source| HodlrError::SingularSchur {
            level: node.level,
            lo,
            hi,
            source,
        })?)
    };
    let factor = NodeFactor::Internal {
        level: node.level,
        left: Box::new(left_f),
        right: Box::new(right_f),
        upper,
        lower,
        d_left,
        d_right,
        schur,
    };
    let x = factor.correct(c_left, c_right);
    let schur_time = t.elapsed().as_secs_f64();
    tel.schur += schur_time;
    tel.level_seconds[node.level] += compress_time + schur_time;
    Ok((factor, x, tel))
}

impl NodeFactor {
    /// Combines child solutions `c_L`, `c_R` into the node solution.
    fn correct(&self, c_left: DenseMatrix, c_right: DenseMatrix) -> DenseMatrix {
        let NodeFactor::Internal {
            upper,
            lower,
            d_left,
            d_right,
            schur,
            ..
        } = self
        else {
            unreachable!("correction only applies to internal nodes");
        };
        let Some(schur) = schur else {
            return c_left.vcat(&c_right);
        };
        let ru = upper.rank();
        let rhs = upper.v().t_matmul(&c_right).vcat(&lower.v().t_matmul(&c_left));
        let y = schur.solve(&rhs).expect("coupling right-hand side sized to the system");
        let s = c_left.cols();
        let mut x_left = c_left;
        let mut x_right = c_right;
        if ru > 0 {
            x_left.add_matmul(-1.0, d_left, &y.submatrix(0, 0, ru, s));
        }
        if lower.rank() > 0 {
            x_right.add_matmul(-1.0, d_right, &y.submatrix(ru, 0, lower.rank(), s));
        }
        x_left.vcat(&x_right)
    }

    fn solve(&self, f: DenseMatrix) -> DenseMatrix {
        match self {
            NodeFactor::Leaf { lu } => lu.solve(&f).expect("right-hand side sized to the leaf"),
            NodeFactor::Internal { left, right, d_left, .. } => {
                let nl = d_left.rows();
                let (s, nr) = (f.cols(), f.rows() - nl);
                let fl = f.submatrix(0, 0, nl, s);
                let fr = f.submatrix(nl, 0, nr, s);
                let (c_left, c_right) = rayon::join(|| left.solve(fl), || right.solve(fr));
                self.correct(c_left, c_right)
            }
        }
    }

    fn summarize(&self, tree: &HodlrTree, k: usize, out: &mut Vec<NodeSummary>) {
        if let NodeFactor::Internal {
            level,
            left,
            right,
            upper,
            lower,
            d_left,
            d_right,
            schur,
        } = self
        {
            let node = tree.node(k);
            let (ru, rl) = (upper.rank(), lower.rank());
            let defect = schur.as_ref().map_or(0.0, |_| {
                let mut sm = DenseMatrix::identity(ru + rl);
                sm.set_submatrix(0, ru, &upper.v().t_matmul(d_right));
                sm.set_submatrix(ru, 0, &lower.v().t_matmul(d_left));
                let top = sm.submatrix(0, 0, ru, ru).sub(&DenseMatrix::identity(ru)).max_abs();
                let bottom = sm.submatrix(ru, ru, rl, rl).sub(&DenseMatrix::identity(rl)).max_abs();
                top.max(bottom)
            });
            out.push(NodeSummary {
                level: *level,
                lo: node.lo,
                hi: node.hi,
                upper_rank: ru,
                lower_rank: rl,
                d_left_cols: d_left.cols(),
                d_right_cols: d_right.cols(),
                schur_diagonal_defect: defect,
            });
            let (lk, rk) = node.children.expect("internal node has children");
            left.summarize(tree, lk, out);
            right.summarize(tree, rk, out);
        }
    }
}

impl HodlrFactorization {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tree(&self) -> &HodlrTree {
        &self.tree
    }

    /// Solves `K·X = F` for all columns of `F`.
    pub fn solve(&self, f: &DenseMatrix) -> Result<DenseMatrix, HodlrError> {
        if f.rows() != self.n {
            return Err(HodlrError::DimensionMismatch {
                expected: (self.n, f.cols()),
                found: f.shape(),
            });
        }
        if !f.all_finite() {
            return Err(HodlrError::NonFinite);
        }
        Ok(self.root.solve(f.clone()))
    }

    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>, HodlrError> {
        Ok(self.solve(&DenseMatrix::column_vector(b))?.into_vec())
    }

    /// Solves and records the solve time and the residual against the
    /// original `front` in `report`.
    pub fn solve_with_report<A: BlockAccessor + ?Sized>(
        &self,
        front: &A,
        f: &DenseMatrix,
        report: &mut SolveReport,
    ) -> Result<DenseMatrix, HodlrError> {
        let t = Instant::now();
        let x = self.solve(f)?;
        report.timings.solve += t.elapsed().as_secs_f64();
        report.residual = Some(relative_residual(front, &x, f)?);
        Ok(x)
    }

    /// One entry per internal node, in depth-first order.
    pub fn node_summaries(&self) -> Vec<NodeSummary> {
        let mut out = Vec::new();
        self.root.summarize(&self.tree, 0, &mut out);
        out
    }
}

/// `front·X` with the exact front.
pub fn apply<A: BlockAccessor + ?Sized>(front: &A, x: &DenseMatrix) -> Result<DenseMatrix, HodlrError> {
    let (m, n) = (front.nrows(), front.ncols());
    if x.rows() != n {
        return Err(HodlrError::DimensionMismatch {
            expected: (n, x.cols()),
            found: x.shape(),
        });
    }
    let mut out = DenseMatrix::zeros(m, x.cols());
    for j in 0..n {
        let col = front.col(j);
        for c in 0..x.cols() {
            let xj = x[(j, c)];
            if xj != 0.0 {
                for (o, a) in out.col_mut(c).iter_mut().zip(&col) {
                    *o += xj * a;
                }
            }
        }
    }
    Ok(out)
}

/// `‖front·X − F‖_F / ‖F‖_F` (absolute when `F = 0`).
pub fn relative_residual<A: BlockAccessor + ?Sized>(
    front: &A,
    x: &DenseMatrix,
    f: &DenseMatrix,
) -> Result<f64, HodlrError> {
    let r = apply(front, x)?.sub(f).frobenius_norm();
    let scale = f.frobenius_norm();
    Ok(if scale > 0.0 { r / scale } else { r })
}
