//! LU factorizations: partial pivoting for the dense solves, full pivoting for
//! rank-revealing skeleton construction.

use super::dense::{axpy, DenseMatrix};
use super::MatrixError;

/// Pivot magnitudes below this are treated as an exact breakdown.
pub const SINGULAR_PIVOT: f64 = 1e-300;

/// `P·A = L·U` with unit lower `L` and upper `U` packed in one matrix.
///
/// Besides the packed factors we keep, per column, the extent of the nonzero
/// part of `L` and `U`. Banded inputs (grid operators) keep their band through
/// the elimination, and the triangular solves skip the zero tails.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialPivLU {
    lu: DenseMatrix,
    /// Row `i` of `P·A` is row `perm[i]` of `A`.
    perm: Vec<usize>,
    /// One past the last nonzero row of `L(:, k)`.
    lower_end: Vec<usize>,
    /// First nonzero row of `U(:, k)`.
    upper_start: Vec<usize>,
}

/// Factorizes a square matrix with row pivoting.
pub fn lu_partial(a: &DenseMatrix) -> Result<PartialPivLU, MatrixError> {
    if !a.is_square() {
        return Err(MatrixError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !a.all_finite() {
        return Err(MatrixError::NonFinite);
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let col = lu.col(k);
        let (p, pmax) = col[k..]
            .iter()
            .enumerate()
            .fold((k, -1.0f64), |(bi, bv), (off, v)| {
                if v.abs() > bv {
                    (k + off, v.abs())
                } else {
                    (bi, bv)
                }
            });
        if pmax < SINGULAR_PIVOT {
            return Err(MatrixError::Singular { step: k, pivot: pmax });
        }
        if p != k {
            lu.swap_rows(p, k);
            perm.swap(p, k);
        }
        let pivot = lu[(k, k)];
        let colk = lu.col_mut(k);
        let mut end = k + 1;
        for i in k + 1..n {
            if colk[i] != 0.0 {
                colk[i] /= pivot;
                end = i + 1;
            }
        }
        if end == k + 1 {
            continue;
        }
        let mult: Vec<f64> = lu.col(k)[k + 1..end].to_vec();
        for j in k + 1..n {
            let akj = lu[(k, j)];
            if akj != 0.0 {
                axpy(-akj, &mult, &mut lu.col_mut(j)[k + 1..end]);
            }
        }
    }

    // Later row swaps move entries of earlier L columns, so the extents are
    // taken from the final packed factors.
    let lower_end = (0..n)
        .map(|k| {
            lu.col(k)[k + 1..]
                .iter()
                .rposition(|&v| v != 0.0)
                .map_or(k + 1, |off| k + 2 + off)
        })
        .collect();
    let upper_start = (0..n)
        .map(|k| lu.col(k)[..k].iter().position(|&v| v != 0.0).unwrap_or(k))
        .collect();

    Ok(PartialPivLU {
        lu,
        perm,
        lower_end,
        upper_start,
    })
}

impl PartialPivLU {
    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn packed(&self) -> &DenseMatrix {
        &self.lu
    }

    pub fn row_perm(&self) -> &[usize] {
        &self.perm
    }

    /// Solves `A·X = B` for every column of `B`.
    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        let mut x = b.clone();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>, MatrixError> {
        let mut x = DenseMatrix::column_vector(b);
        self.solve_in_place(&mut x)?;
        Ok(x.into_vec())
    }

    pub fn solve_in_place(&self, b: &mut DenseMatrix) -> Result<(), MatrixError> {
        let n = self.dim();
        if b.rows() != n {
            return Err(MatrixError::DimensionMismatch {
                expected: (n, b.cols()),
                found: b.shape(),
            });
        }
        let mut work = vec![0.0; n];
        for j in 0..b.cols() {
            let col = b.col_mut(j);
            for (w, &p) in work.iter_mut().zip(&self.perm) {
                *w = col[p];
            }
            self.forward(&mut work);
            self.backward(&mut work);
            col.copy_from_slice(&work);
        }
        Ok(())
    }

    fn forward(&self, x: &mut [f64]) {
        for k in 0..self.dim() {
            let xk = x[k];
            let end = self.lower_end[k];
            if xk != 0.0 && end > k + 1 {
                axpy(-xk, &self.lu.col(k)[k + 1..end], &mut x[k + 1..end]);
            }
        }
    }

    fn backward(&self, x: &mut [f64]) {
        for k in (0..self.dim()).rev() {
            let xk = x[k] / self.lu[(k, k)];
            x[k] = xk;
            let start = self.upper_start[k];
            if xk != 0.0 && start < k {
                axpy(-xk, &self.lu.col(k)[start..k], &mut x[start..k]);
            }
        }
    }

    /// Pivot magnitudes `|U(k,k)|`, useful as a cheap conditioning readout.
    pub fn pivots(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.lu[(k, k)]).collect()
    }
}

/// `P·A·Q = L·U` with complete pivoting on a possibly rectangular matrix.
///
/// Elimination stops early once the remaining Schur complement is exactly
/// zero, so `steps()` may be smaller than `min(m, n)`.
#[derive(Debug, Clone)]
pub struct FullPivLU {
    lu: DenseMatrix,
    /// Row `i` of `P·A` is row `row_perm[i]` of `A`.
    row_perm: Vec<usize>,
    /// Column `j` of `A·Q` is column `col_perm[j]` of `A`.
    col_perm: Vec<usize>,
    pivots: Vec<f64>,
}

/// Rank-revealing LU with complete pivoting. Never fails: rank deficiency is
/// reported through the pivot list.
pub fn lu_full(a: &DenseMatrix) -> FullPivLU {
    let (m, n) = a.shape();
    let mut lu = a.clone();
    let mut row_perm: Vec<usize> = (0..m).collect();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();

    for k in 0..m.min(n) {
        let (mut pi, mut pj, mut best) = (k, k, 0.0f64);
        for j in k..n {
            for (off, v) in lu.col(j)[k..].iter().enumerate() {
                if v.abs() > best {
                    best = v.abs();
                    pi = k + off;
                    pj = j;
                }
            }
        }
        if best < f64::MIN_POSITIVE {
            break;
        }
        lu.swap_rows(k, pi);
        row_perm.swap(k, pi);
        lu.swap_cols(k, pj);
        col_perm.swap(k, pj);

        let pivot = lu[(k, k)];
        pivots.push(pivot);
        for v in &mut lu.col_mut(k)[k + 1..] {
            *v /= pivot;
        }
        let mult: Vec<f64> = lu.col(k)[k + 1..].to_vec();
        for j in k + 1..n {
            let akj = lu[(k, j)];
            if akj != 0.0 {
                axpy(-akj, &mult, &mut lu.col_mut(j)[k + 1..]);
            }
        }
    }

    FullPivLU {
        lu,
        row_perm,
        col_perm,
        pivots,
    }
}

impl FullPivLU {
    pub fn shape(&self) -> (usize, usize) {
        self.lu.shape()
    }

    /// Number of elimination steps actually performed.
    pub fn steps(&self) -> usize {
        self.pivots.len()
    }

    pub fn row_perm(&self) -> &[usize] {
        &self.row_perm
    }

    pub fn col_perm(&self) -> &[usize] {
        &self.col_perm
    }

    /// Signed pivots in elimination order.
    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    pub fn pivot_magnitudes(&self) -> Vec<f64> {
        self.pivots.iter().map(|p| p.abs()).collect()
    }

    /// Length of the leading run of pivots with `|p_k| ≥ tau·|p_0|`.
    ///
    /// The count is taken as a prefix so that the leading `r×r` corner of the
    /// factors is always a valid truncation.
    pub fn numerical_rank(&self, tau: f64) -> usize {
        let Some(first) = self.pivots.first() else {
            return 0;
        };
        let threshold = tau * first.abs();
        self.pivots
            .iter()
            .take_while(|p| p.abs() >= threshold)
            .count()
    }

    /// Unit lower factor, `m × steps`.
    pub fn l_factor(&self) -> DenseMatrix {
        let k = self.steps();
        DenseMatrix::from_fn(self.lu.rows(), k, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Greater => self.lu[(i, j)],
        })
    }

    /// Upper factor, `steps × n`.
    pub fn u_factor(&self) -> DenseMatrix {
        let k = self.steps();
        DenseMatrix::from_fn(k, self.lu.cols(), |i, j| if i <= j { self.lu[(i, j)] } else { 0.0 })
    }

    /// `P⁻¹·L·U·Q⁻¹`, i.e. the input matrix up to rounding (and up to the
    /// zero remainder when elimination stopped early).
    pub fn reconstruct(&self) -> DenseMatrix {
        let (m, n) = self.shape();
        let plu = self.l_factor().matmul(&self.u_factor());
        let mut out = DenseMatrix::zeros(m, n);
        for j in 0..n {
            for i in 0..m {
                out[(self.row_perm[i], self.col_perm[j])] = plu[(i, j)];
            }
        }
        out
    }

    /// `U(0..r, 0..r)` as a dense upper-triangular matrix.
    pub fn leading_upper(&self, r: usize) -> DenseMatrix {
        DenseMatrix::from_fn(r, r, |i, j| if i <= j { self.lu[(i, j)] } else { 0.0 })
    }

    /// `L(0..r, 0..r)` as a dense unit lower-triangular matrix.
    pub fn leading_lower(&self, r: usize) -> DenseMatrix {
        DenseMatrix::from_fn(r, r, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Greater => self.lu[(i, j)],
        })
    }
}

/// Solves `X·U = B` for upper-triangular `U` (right division).
pub fn solve_upper_right(b: &DenseMatrix, u: &DenseMatrix) -> DenseMatrix {
    let r = u.rows();
    assert!(u.is_square() && b.cols() == r, "solve_upper_right shape mismatch");
    let mut x = b.clone();
    for j in 0..r {
        for k in 0..j {
            let ukj = u[(k, j)];
            if ukj != 0.0 {
                let (head, tail) = x.as_mut_slice().split_at_mut(j * b.rows());
                axpy(-ukj, &head[k * b.rows()..(k + 1) * b.rows()], &mut tail[..b.rows()]);
            }
        }
        let d = u[(j, j)];
        for v in x.col_mut(j) {
            *v /= d;
        }
    }
    x
}

/// Solves `L·X = B` for unit lower-triangular `L` (left division).
pub fn solve_unit_lower_left(l: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let r = l.rows();
    assert!(l.is_square() && b.rows() == r, "solve_unit_lower_left shape mismatch");
    let mut x = b.clone();
    for c in 0..x.cols() {
        let col = x.col_mut(c);
        for k in 0..r {
            let xk = col[k];
            if xk != 0.0 {
                axpy(-xk, &l.col(k)[k + 1..], &mut col[k + 1..]);
            }
        }
    }
    x
}
