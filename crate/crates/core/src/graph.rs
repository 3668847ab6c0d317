//! Sparse symmetric adjacency and the boundary-distance indexing that picks
//! skeleton rows and columns for off-diagonal blocks.
//!
//! A block of a front couples a row vertex set `I` to a column vertex set `J`
//! of the same sparse graph. Vertices of `I` with an edge into `J` form the
//! row boundary (distance 0); every other row vertex gets its BFS distance to
//! that boundary, walking only through `I`. Columns are handled the same way.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("vertex {0} appears more than once in a block view")]
    DuplicateVertex(usize),
    #[error("vertex {0} is in both the row and the column set")]
    OverlappingSides(usize),
    #[error("no vertex within depth {depth} on the {side:?} side")]
    EmptySelection { side: Side, depth: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Row,
    Col,
}

/// Compressed symmetric adjacency, optionally carrying matrix values.
///
/// Self-loops never enter the adjacency; the diagonal is held separately.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePattern {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    values: Option<Vec<f64>>,
    diagonal: Option<Vec<f64>>,
}

impl SparsePattern {
    /// Pattern-only graph; the edge list is symmetrized, deduplicated and
    /// stripped of self-loops.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, j) in edges {
            check_vertex(i, n)?;
            check_vertex(j, n)?;
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        Ok(Self {
            n,
            offsets,
            neighbors,
            values: None,
            diagonal: None,
        })
    }

    /// Matrix from `(row, col, value)` entries, duplicates summed.
    ///
    /// With `symmetric` set, each off-diagonal entry is mirrored (the usual
    /// lower-triangle storage). Otherwise entries are taken as given and the
    /// pattern is symmetrized by union, with absent mirror entries valued 0.
    pub fn from_triplets(
        n: usize,
        triplets: &[(usize, usize, f64)],
        symmetric: bool,
    ) -> Result<Self, GraphError> {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut diagonal = vec![0.0; n];
        for &(i, j, v) in triplets {
            check_vertex(i, n)?;
            check_vertex(j, n)?;
            if i == j {
                diagonal[i] += v;
                continue;
            }
            adj[i].push((j, v));
            adj[j].push((i, if symmetric { v } else { 0.0 }));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for list in &mut adj {
            list.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for &(j, v) in list.iter() {
                if last == Some(j) {
                    *values.last_mut().expect("previous entry") += v;
                } else {
                    neighbors.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            offsets.push(neighbors.len());
        }
        Ok(Self {
            n,
            offsets,
            neighbors,
            values: Some(values),
            diagonal: Some(diagonal),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored directed adjacency entries (twice the edge count).
    pub fn adjacency_len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn has_values(&self) -> bool {
        self.values.is_some()
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    /// Value stored for off-diagonal entry `(i, j)`, or the diagonal when
    /// `i == j`. Zero when absent or when the pattern carries no values.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diagonal.as_ref().map_or(0.0, |d| d[i]);
        }
        match (&self.values, self.neighbors(i).binary_search(&j)) {
            (Some(vals), Ok(pos)) => vals[self.offsets[i] + pos],
            _ => 0.0,
        }
    }

    pub fn diagonal(&self) -> Option<&[f64]> {
        self.diagonal.as_deref()
    }

    /// Neighbors of `v` paired with their values (zeros for a bare pattern).
    pub fn row_entries(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        let vals = self.values.as_ref().map(|vs| &vs[range.clone()]);
        self.neighbors[range]
            .iter()
            .enumerate()
            .map(move |(k, &j)| (j, vals.map_or(0.0, |vs| vs[k])))
    }

    /// Undirected edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .filter(move |&&j| j > i)
                .map(move |&j| (i, j))
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            m[(i, i)] = self.value(i, i);
            for (j, v) in self.row_entries(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Subgraph induced on `vertices`; vertex `k` of the result is
    /// `vertices[k]` of `self`. Values are carried along when present.
    pub fn induced(&self, vertices: &[usize]) -> Result<SparsePattern, GraphError> {
        let local = position_map(self.n, vertices)?;
        let mut triplets = Vec::new();
        let mut edges = Vec::new();
        for (a, &v) in vertices.iter().enumerate() {
            if self.has_values() {
                triplets.push((a, a, self.value(v, v)));
            }
            for (w, val) in self.row_entries(v) {
                let b = local[w];
                if b != usize::MAX {
                    if self.has_values() {
                        triplets.push((a, b, val));
                    } else if a < b {
                        edges.push((a, b));
                    }
                }
            }
        }
        if self.has_values() {
            SparsePattern::from_triplets(vertices.len(), &triplets, false)
        } else {
            SparsePattern::from_edges(vertices.len(), edges)
        }
    }

    /// Adjacency list form; handy for tests and brute-force oracles.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|v| self.neighbors(v).to_vec()).collect()
    }
}

fn check_vertex(v: usize, n: usize) -> Result<(), GraphError> {
    if v >= n {
        Err(GraphError::VertexOutOfRange { vertex: v, n })
    } else {
        Ok(())
    }
}

/// `map[v]` = position of `v` in `vertices`, `usize::MAX` when absent.
fn position_map(n: usize, vertices: &[usize]) -> Result<Vec<usize>, GraphError> {
    let mut map = vec![usize::MAX; n];
    for (k, &v) in vertices.iter().enumerate() {
        check_vertex(v, n)?;
        if map[v] != usize::MAX {
            return Err(GraphError::DuplicateVertex(v));
        }
        map[v] = k;
    }
    Ok(map)
}

/// An off-diagonal block seen through the graph: block row `i` is vertex
/// `row_verts[i]`, block column `j` is vertex `col_verts[j]`.
#[derive(Debug, Clone)]
pub struct BlockGraphView<'a> {
    pattern: &'a SparsePattern,
    row_verts: Vec<usize>,
    col_verts: Vec<usize>,
}

impl<'a> BlockGraphView<'a> {
    pub fn new(
        pattern: &'a SparsePattern,
        row_verts: Vec<usize>,
        col_verts: Vec<usize>,
    ) -> Result<Self, GraphError> {
        let rows = position_map(pattern.n(), &row_verts)?;
        for &c in &col_verts {
            check_vertex(c, pattern.n())?;
            if rows[c] != usize::MAX {
                return Err(GraphError::OverlappingSides(c));
            }
        }
        position_map(pattern.n(), &col_verts)?;
        Ok(Self {
            pattern,
            row_verts,
            col_verts,
        })
    }

    /// View over contiguous vertex ranges, the shape HODLR bisection produces.
    pub fn from_ranges(
        pattern: &'a SparsePattern,
        rows: std::ops::Range<usize>,
        cols: std::ops::Range<usize>,
    ) -> Result<Self, GraphError> {
        Self::new(pattern, rows.collect(), cols.collect())
    }

    pub fn pattern(&self) -> &SparsePattern {
        self.pattern
    }

    pub fn row_verts(&self) -> &[usize] {
        &self.row_verts
    }

    pub fn col_verts(&self) -> &[usize] {
        &self.col_verts
    }

    pub fn side(&self, side: Side) -> &[usize] {
        match side {
            Side::Row => &self.row_verts,
            Side::Col => &self.col_verts,
        }
    }

    fn other(&self, side: Side) -> &[usize] {
        match side {
            Side::Row => &self.col_verts,
            Side::Col => &self.row_verts,
        }
    }

    /// The transposed view (rows and columns swapped).
    pub fn transposed(&self) -> BlockGraphView<'a> {
        BlockGraphView {
            pattern: self.pattern,
            row_verts: self.col_verts.clone(),
            col_verts: self.row_verts.clone(),
        }
    }

    fn membership(&self, verts: &[usize]) -> Vec<bool> {
        let mut mark = vec![false; self.pattern.n()];
        for &v in verts {
            mark[v] = true;
        }
        mark
    }
}

/// Vertices of `side` with at least one edge into the opposite set,
/// in ascending vertex order.
pub fn boundary_vertices(view: &BlockGraphView<'_>, side: Side) -> Vec<usize> {
    let other = view.membership(view.other(side));
    let mut out: Vec<usize> = view
        .side(side)
        .iter()
        .copied()
        .filter(|&v| view.pattern.neighbors(v).iter().any(|&w| other[w]))
        .collect();
    out.sort_unstable();
    out
}

/// BFS distance of every vertex of one side to that side's boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceIndex {
    vertices: Vec<usize>,
    distances: Vec<Option<usize>>,
}

impl DistanceIndex {
    /// Vertices in the order of the view's side list.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// `distances()[k]` belongs to `vertices()[k]`; `None` means unreachable.
    pub fn distances(&self) -> &[Option<usize>] {
        &self.distances
    }

    /// Distance of block position `k` on this side.
    pub fn at(&self, k: usize) -> Option<usize> {
        self.distances[k]
    }

    pub fn of_vertex(&self, v: usize) -> Option<usize> {
        self.vertices
            .iter()
            .position(|&w| w == v)
            .and_then(|k| self.distances[k])
    }

    pub fn max_finite(&self) -> Option<usize> {
        self.distances.iter().flatten().copied().max()
    }

    /// Block positions with distance exactly `d`, ascending by vertex id.
    pub fn layer(&self, d: usize) -> Vec<usize> {
        let mut pos: Vec<usize> = (0..self.vertices.len())
            .filter(|&k| self.distances[k] == Some(d))
            .collect();
        pos.sort_by_key(|&k| self.vertices[k]);
        pos
    }
}

/// Multi-source BFS from the boundary, confined to the side's own vertices.
pub fn distance_index(view: &BlockGraphView<'_>, side: Side) -> DistanceIndex {
    let verts = view.side(side);
    let local = position_map(view.pattern.n(), verts).expect("view validated at construction");
    let mut dist: Vec<Option<usize>> = vec![None; verts.len()];
    let mut queue = VecDeque::new();
    for b in boundary_vertices(view, side) {
        let k = local[b];
        dist[k] = Some(0);
        queue.push_back(k);
    }
    while let Some(k) = queue.pop_front() {
        let next = dist[k].expect("queued vertices are labelled") + 1;
        for &w in view.pattern.neighbors(verts[k]) {
            let kw = local[w];
            if kw != usize::MAX && dist[kw].is_none() {
                dist[kw] = Some(next);
                queue.push_back(kw);
            }
        }
    }
    DistanceIndex {
        vertices: verts.to_vec(),
        distances: dist,
    }
}

/// Skeleton rows and columns chosen by distance to the block boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    /// Block row positions, layer by layer (d = 0 first), ascending vertex id
    /// within a layer.
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub row_vertices: Vec<usize>,
    pub col_vertices: Vec<usize>,
}

fn layered_positions(index: &DistanceIndex, depth: usize) -> Vec<usize> {
    (0..=depth).flat_map(|d| index.layer(d)).collect()
}

/// Rows and columns within graph distance `depth` of the block boundary.
///
/// An empty side means the block has no crossing edge at all, which callers
/// treat as a structurally zero block.
pub fn select_by_depth(view: &BlockGraphView<'_>, depth: usize) -> Result<Skeleton, GraphError> {
    let ri = distance_index(view, Side::Row);
    let ci = distance_index(view, Side::Col);
    let rows = layered_positions(&ri, depth);
    if rows.is_empty() {
        return Err(GraphError::EmptySelection {
            side: Side::Row,
            depth,
        });
    }
    let cols = layered_positions(&ci, depth);
    if cols.is_empty() {
        return Err(GraphError::EmptySelection {
            side: Side::Col,
            depth,
        });
    }
    Ok(Skeleton {
        row_vertices: rows.iter().map(|&k| view.row_verts[k]).collect(),
        col_vertices: cols.iter().map(|&k| view.col_verts[k]).collect(),
        rows,
        cols,
    })
}
