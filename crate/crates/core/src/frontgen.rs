//! Test matrix generators: smooth kernel matrices and frontal matrices
//! obtained as exact Schur complements of grid Laplacians on a planar
//! separator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, SparsePattern};
use crate::lowrank::BlockAccessor;
use crate::matrix::{lu_partial, DenseMatrix, MatrixError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrontgenError {
    #[error("invalid grid: {0}")]
    InvalidSpec(String),
    #[error("plane {plane} is not strictly inside axis {axis} of extent {extent}")]
    InvalidPlane {
        axis: usize,
        plane: usize,
        extent: usize,
    },
    #[error("separator, left and right do not partition the vertices: {0}")]
    InvalidPartition(String),
    #[error("vertices {left} and {right} are coupled across the separator")]
    NotASeparator { left: usize, right: usize },
    #[error("interior block is singular ({0})")]
    SingularInterior(MatrixError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stencil {
    /// 5-point (2D) or 7-point (3D) Laplacian.
    Laplacian,
    /// Three decoupled Laplacian components per node.
    VectorLaplacian,
}

impl Stencil {
    pub fn dofs_per_node(self) -> usize {
        match self {
            Stencil::Laplacian => 1,
            Stencil::VectorLaplacian => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Two or three extents. An extent of 1 collapses that dimension.
    pub dims: Vec<usize>,
    pub stencil: Stencil,
}

impl GridSpec {
    pub fn new(dims: &[usize], stencil: Stencil) -> Result<Self, FrontgenError> {
        let spec = Self {
            dims: dims.to_vec(),
            stencil,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn laplacian(dims: &[usize]) -> Result<Self, FrontgenError> {
        Self::new(dims, Stencil::Laplacian)
    }

    pub fn validate(&self) -> Result<(), FrontgenError> {
        if !(2..=3).contains(&self.dims.len()) {
            return Err(FrontgenError::InvalidSpec(format!(
                "expected 2 or 3 extents, got {}",
                self.dims.len()
            )));
        }
        if self.dims.contains(&0) {
            return Err(FrontgenError::InvalidSpec("extents must be positive".into()));
        }
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn dofs(&self) -> usize {
        self.nodes() * self.stencil.dofs_per_node()
    }

    /// `x + nx·(y + ny·z)`.
    pub fn node_id(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.dims)
            .rev()
            .fold(0, |acc, (&c, &d)| acc * d + c)
    }

    pub fn coords(&self, mut node: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&d| {
                let c = node % d;
                node /= d;
                c
            })
            .collect()
    }

    /// Middle plane of the longest axis; `None` when no axis admits an
    /// interior plane.
    pub fn default_separator(&self) -> Option<(usize, usize)> {
        let (axis, &extent) = self
            .dims
            .iter()
            .enumerate()
            .max_by_key(|&(i, &d)| (d, std::cmp::Reverse(i)))?;
        (extent >= 3).then_some((axis, (extent - 1) / 2))
    }
}

/// Grid Laplacian with the Dirichlet boundary already eliminated: diagonal
/// `2·(number of non-degenerate dimensions)`, `−1` per grid neighbor.
/// Vector stencils number dof `c` of node `v` as `3·v + c`.
pub fn grid_operator(spec: &GridSpec) -> Result<SparsePattern, FrontgenError> {
    spec.validate()?;
    let active = spec.dims.iter().filter(|&&d| d > 1).count();
    let diag = 2.0 * active as f64;
    let comps = spec.stencil.dofs_per_node();
    let mut triplets = Vec::new();
    for node in 0..spec.nodes() {
        let coords = spec.coords(node);
        for c in 0..comps {
            triplets.push((node * comps + c, node * comps + c, diag));
        }
        for axis in 0..spec.dims.len() {
            if coords[axis] + 1 < spec.dims[axis] {
                let mut nb = coords.clone();
                nb[axis] += 1;
                let other = spec.node_id(&nb);
                for c in 0..comps {
                    triplets.push((other * comps + c, node * comps + c, -1.0));
                }
            }
        }
    }
    Ok(SparsePattern::from_triplets(spec.dofs(), &triplets, true)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Separator {
    /// Ordered lexicographically by the remaining grid coordinates, the first
    /// remaining axis most significant; dofs of a node stay adjacent.
    pub sep: Vec<usize>,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

/// Splits the grid at `plane` along `axis`.
pub fn planar_separator(spec: &GridSpec, axis: usize, plane: usize) -> Result<Separator, FrontgenError> {
    spec.validate()?;
    let extent = *spec.dims.get(axis).ok_or(FrontgenError::InvalidPlane {
        axis,
        plane,
        extent: 0,
    })?;
    if plane == 0 || plane + 1 >= extent {
        return Err(FrontgenError::InvalidPlane { axis, plane, extent });
    }
    let comps = spec.stencil.dofs_per_node();
    let mut sep_nodes = Vec::new();
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for node in 0..spec.nodes() {
        let coords = spec.coords(node);
        let dofs = (0..comps).map(|c| node * comps + c);
        match coords[axis].cmp(&plane) {
            std::cmp::Ordering::Less => left.extend(dofs),
            std::cmp::Ordering::Greater => right.extend(dofs),
            std::cmp::Ordering::Equal => {
                let key: Vec<usize> = coords
                    .iter()
                    .enumerate()
                    .filter(|&(a, _)| a != axis)
                    .map(|(_, &c)| c)
                    .collect();
                sep_nodes.push((key, node));
            }
        }
    }
    sep_nodes.sort();
    let sep = sep_nodes
        .into_iter()
        .flat_map(|(_, node)| (0..comps).map(move |c| node * comps + c))
        .collect();
    Ok(Separator { sep, left, right })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontProblem {
    pub front: DenseMatrix,
    /// Sparse graph on the separator; vertex `k` is front row `k`.
    pub graph: SparsePattern,
    /// Operator vertex id of each front row.
    pub ordering: Vec<usize>,
    /// `front · 1`.
    pub rhs: DenseMatrix,
}

/// `A(sep,sep) − Σ_{X∈{left,right}} A(sep,X)·A(X,X)⁻¹·A(X,sep)`, by dense
/// elimination. Checks that the three sets partition the vertices and that
/// nothing couples `left` to `right`.
pub fn schur_front(
    op: &SparsePattern,
    sep: &[usize],
    left: &[usize],
    right: &[usize],
) -> Result<FrontProblem, FrontgenError> {
    let n = op.n();
    let mut side = vec![u8::MAX; n];
    for (tag, set) in [(0u8, sep), (1, left), (2, right)] {
        for &v in set {
            if v >= n {
                return Err(FrontgenError::InvalidPartition(format!("vertex {v} out of range")));
            }
            if side[v] != u8::MAX {
                return Err(FrontgenError::InvalidPartition(format!("vertex {v} listed twice")));
            }
            side[v] = tag;
        }
    }
    if let Some(v) = side.iter().position(|&s| s == u8::MAX) {
        return Err(FrontgenError::InvalidPartition(format!("vertex {v} not assigned")));
    }
    for &l in left {
        if let Some(&r) = op.neighbors(l).iter().find(|&&w| side[w] == 2) {
            if op.value(l, r) != 0.0 || !op.has_values() {
                return Err(FrontgenError::NotASeparator { left: l, right: r });
            }
        }
    }

    let mut front = sparse_block(op, sep, sep);
    for interior in [left, right] {
        if interior.is_empty() {
            continue;
        }
        let a_ii = sparse_block(op, interior, interior);
        let a_is = sparse_block(op, interior, sep);
        let lu = lu_partial(&a_ii).map_err(FrontgenError::SingularInterior)?;
        let solved = lu.solve(&a_is).map_err(FrontgenError::SingularInterior)?;
        front.axpy(-1.0, &a_is.t_matmul(&solved));
    }
    symmetrize(&mut front);
    let graph = op.induced(sep)?;
    let ones = DenseMatrix::from_fn(sep.len(), 1, |_, _| 1.0);
    let rhs = front.matmul(&ones);
    Ok(FrontProblem {
        front,
        graph,
        ordering: sep.to_vec(),
        rhs,
    })
}

/// Grid operator, planar separator and Schur front in one call.
pub fn grid_front(
    spec: &GridSpec,
    axis: usize,
    plane: usize,
) -> Result<(SparsePattern, Separator, FrontProblem), FrontgenError> {
    let op = grid_operator(spec)?;
    let s = planar_separator(spec, axis, plane)?;
    let front = schur_front(&op, &s.sep, &s.left, &s.right)?;
    Ok((op, s, front))
}

/// Dense Schur complement `A(keep,keep) − A(keep,elim)·A(elim,elim)⁻¹·A(elim,keep)`.
pub fn dense_schur_complement(
    a: &DenseMatrix,
    keep: &[usize],
    elim: &[usize],
) -> Result<DenseMatrix, FrontgenError> {
    let pick = |rows: &[usize], cols: &[usize]| DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])]);
    let mut out = pick(keep, keep);
    if elim.is_empty() {
        return Ok(out);
    }
    let lu = lu_partial(&pick(elim, elim)).map_err(FrontgenError::SingularInterior)?;
    let solved = lu.solve(&pick(elim, keep)).map_err(FrontgenError::SingularInterior)?;
    out.axpy(-1.0, &pick(keep, elim).matmul(&solved));
    Ok(out)
}

/// Dense `A(rows, cols)` from a valued sparse matrix.
pub fn sparse_block(op: &SparsePattern, rows: &[usize], cols: &[usize]) -> DenseMatrix {
    let mut col_pos = vec![usize::MAX; op.n()];
    for (k, &c) in cols.iter().enumerate() {
        col_pos[c] = k;
    }
    let mut out = DenseMatrix::zeros(rows.len(), cols.len());
    for (i, &r) in rows.iter().enumerate() {
        if col_pos[r] != usize::MAX {
            out[(i, col_pos[r])] = op.value(r, r);
        }
        for (c, v) in op.row_entries(r) {
            if col_pos[c] != usize::MAX {
                out[(i, col_pos[c])] = v;
            }
        }
    }
    out
}

/// Averages `A` with `Aᵀ` to remove rounding asymmetry.
fn symmetrize(a: &mut DenseMatrix) {
    let n = a.rows();
    for j in 0..n {
        for i in j + 1..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// `1/(1+r)`.
    InvDistance,
    /// `exp(−r/8)`.
    ExpDecay,
}

impl KernelKind {
    pub fn eval(self, r: f64) -> f64 {
        match self {
            KernelKind::InvDistance => 1.0 / (1.0 + r),
            KernelKind::ExpDecay => (-r / 8.0).exp(),
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inv-distance" => Ok(KernelKind::InvDistance),
            "exp-decay" => Ok(KernelKind::ExpDecay),
            other => Err(format!("unknown kernel `{other}`")),
        }
    }
}

/// Kernel matrix `k(|x_i − x_j|) + shift·[i = j]` evaluated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    points: Vec<f64>,
    kind: KernelKind,
    shift: f64,
}

impl KernelMatrix {
    /// Points `0, 1, …, n−1`.
    pub fn regular(n: usize, kind: KernelKind, shift: f64) -> Self {
        Self::at((0..n).map(|i| i as f64).collect(), kind, shift)
    }

    pub fn at(points: Vec<f64>, kind: KernelKind, shift: f64) -> Self {
        Self { points, kind, shift }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

impl BlockAccessor for KernelMatrix {
    fn nrows(&self) -> usize {
        self.points.len()
    }

    fn ncols(&self) -> usize {
        self.points.len()
    }

    #[inline]
    fn entry(&self, i: usize, j: usize) -> f64 {
        let k = self.kind.eval((self.points[i] - self.points[j]).abs());
        if i == j {
            k + self.shift
        } else {
            k
        }
    }
}

/// Dense kernel matrix on the points `0..n`.
pub fn kernel_matrix(n: usize, kind: KernelKind, shift: f64) -> DenseMatrix {
    KernelMatrix::regular(n, kind, shift).to_dense()
}

/// `n` sorted points `i + δ_i` with `δ_i` uniform in `[−jitter, jitter]`.
pub fn jittered_points(n: usize, jitter: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<f64> = (0..n)
        .map(|i| i as f64 + if jitter > 0.0 { rng.gen_range(-jitter..=jitter) } else { 0.0 })
        .collect();
    pts.sort_by(f64::total_cmp);
    pts
}

/// Seeded `n × s` right-hand side with entries uniform in `[−1, 1]`.
pub fn random_rhs(n: usize, s: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * s).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    DenseMatrix::from_col_major(n, s, data).expect("sized buffer")
}
