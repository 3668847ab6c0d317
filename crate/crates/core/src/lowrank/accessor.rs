use std::ops::Range;

use crate::graph::BlockGraphView;
use crate::matrix::DenseMatrix;

/// Read-only entry oracle for a (possibly never materialized) matrix block.
///
/// Only `nrows`, `ncols` and `entry` are required; the segment methods exist
/// so that dense-backed blocks can hand out contiguous data cheaply.
pub trait BlockAccessor: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn entry(&self, i: usize, j: usize) -> f64;

    /// Entries `(i, j)` for `j` in `cols`.
    fn row_segment(&self, i: usize, cols: Range<usize>) -> Vec<f64> {
        cols.map(|j| self.entry(i, j)).collect()
    }

    /// Entries `(i, j)` for `i` in `rows`.
    fn col_segment(&self, j: usize, rows: Range<usize>) -> Vec<f64> {
        rows.map(|i| self.entry(i, j)).collect()
    }

    fn row(&self, i: usize) -> Vec<f64> {
        self.row_segment(i, 0..self.ncols())
    }

    fn col(&self, j: usize) -> Vec<f64> {
        self.col_segment(j, 0..self.nrows())
    }

    /// Graph view tying block rows and columns to sparse-graph vertices.
    fn graph_view(&self) -> Option<&BlockGraphView<'_>> {
        None
    }

    fn block(&self, rows: Range<usize>, cols: Range<usize>) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(rows.len(), cols.len());
        for (jj, j) in cols.enumerate() {
            out.col_mut(jj).copy_from_slice(&self.col_segment(j, rows.clone()));
        }
        out
    }

    fn to_dense(&self) -> DenseMatrix {
        self.block(0..self.nrows(), 0..self.ncols())
    }

    /// Rows `rows`, all columns.
    fn select_rows(&self, rows: &[usize]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(rows.len(), self.ncols());
        for (ii, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i).into_iter().enumerate() {
                out[(ii, j)] = v;
            }
        }
        out
    }

    /// All rows, columns `cols`.
    fn select_cols(&self, cols: &[usize]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.nrows(), cols.len());
        for (jj, &j) in cols.iter().enumerate() {
            out.col_mut(jj).copy_from_slice(&self.col(j));
        }
        out
    }
}

impl BlockAccessor for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    #[inline]
    fn entry(&self, i: usize, j: usize) -> f64 {
        self[(i, j)]
    }

    fn col_segment(&self, j: usize, rows: Range<usize>) -> Vec<f64> {
        self.col(j)[rows].to_vec()
    }

    fn block(&self, rows: Range<usize>, cols: Range<usize>) -> DenseMatrix {
        self.submatrix(rows.start, cols.start, rows.len(), cols.len())
    }
}

/// Rectangular window into another accessor, optionally carrying the graph
/// view of its rows and columns.
pub struct SubBlock<'a, A: BlockAccessor + ?Sized> {
    parent: &'a A,
    rows: Range<usize>,
    cols: Range<usize>,
    view: Option<BlockGraphView<'a>>,
}

impl<'a, A: BlockAccessor + ?Sized> SubBlock<'a, A> {
    pub fn new(parent: &'a A, rows: Range<usize>, cols: Range<usize>) -> Self {
        assert!(
            rows.end <= parent.nrows() && cols.end <= parent.ncols(),
            "sub-block out of range"
        );
        Self {
            parent,
            rows,
            cols,
            view: None,
        }
    }

    /// Attaches a graph view; its side lengths must match the window.
    pub fn with_graph(mut self, view: BlockGraphView<'a>) -> Self {
        assert_eq!(view.row_verts().len(), self.rows.len(), "row view length");
        assert_eq!(view.col_verts().len(), self.cols.len(), "column view length");
        self.view = Some(view);
        self
    }

    pub fn row_range(&self) -> Range<usize> {
        self.rows.clone()
    }

    pub fn col_range(&self) -> Range<usize> {
        self.cols.clone()
    }
}

impl<A: BlockAccessor + ?Sized> BlockAccessor for SubBlock<'_, A> {
    fn nrows(&self) -> usize {
        self.rows.len()
    }

    fn ncols(&self) -> usize {
        self.cols.len()
    }

    #[inline]
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.parent.entry(self.rows.start + i, self.cols.start + j)
    }

    fn row_segment(&self, i: usize, cols: Range<usize>) -> Vec<f64> {
        let c0 = self.cols.start;
        self.parent
            .row_segment(self.rows.start + i, c0 + cols.start..c0 + cols.end)
    }

    fn col_segment(&self, j: usize, rows: Range<usize>) -> Vec<f64> {
        let r0 = self.rows.start;
        self.parent
            .col_segment(self.cols.start + j, r0 + rows.start..r0 + rows.end)
    }

    fn graph_view(&self) -> Option<&BlockGraphView<'_>> {
        self.view.as_ref()
    }

    fn block(&self, rows: Range<usize>, cols: Range<usize>) -> DenseMatrix {
        let (r0, c0) = (self.rows.start, self.cols.start);
        self.parent
            .block(r0 + rows.start..r0 + rows.end, c0 + cols.start..c0 + cols.end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SparsePattern;

    #[test]
    fn oracles_agree() {
        let a = DenseMatrix::from_fn(6, 5, |i, j| (i * 10 + j) as f64);
        let s = SubBlock::new(&a, 1..4, 2..5);
        assert_eq!((s.nrows(), s.ncols()), (3, 3));
        assert_eq!(s.entry(0, 0), 12.0);
        assert_eq!(s.row(2), vec![32.0, 33.0, 34.0]);
        assert_eq!(s.col(1), vec![13.0, 23.0, 33.0]);
        assert_eq!(s.to_dense(), a.submatrix(1, 2, 3, 3));
        let nested = SubBlock::new(&s, 1..3, 0..2);
        assert_eq!(nested.to_dense(), a.submatrix(2, 2, 2, 2));
        assert_eq!(s.select_rows(&[2, 0]).row(0), s.row(2));
        assert_eq!(s.select_cols(&[1]).col(0), s.col(1).as_slice());
    }

    #[test]
    fn graph_attached() {
        let a = DenseMatrix::identity(4);
        let g = SparsePattern::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let view = BlockGraphView::from_ranges(&g, 0..2, 2..4).unwrap();
        let s = SubBlock::new(&a, 0..2, 2..4).with_graph(view);
        assert_eq!(s.graph_view().unwrap().col_verts(), &[2, 3]);
        assert!(a.graph_view().is_none());
    }
}
