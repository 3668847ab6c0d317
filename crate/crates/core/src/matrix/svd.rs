//! Thin singular value decomposition, used as the optimal-compression
//! reference. The decomposition itself comes from `faer`.

use super::{DenseMatrix, MatrixError};
use crate::lowrank::LowRankFactor;

/// `A = U·diag(σ)·Vᵀ` with `k = min(m, n)` columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: DenseMatrix,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

pub fn svd(a: &DenseMatrix) -> Result<SvdResult, MatrixError> {
    let (m, n) = a.shape();
    if !a.all_finite() {
        return Err(MatrixError::NonFinite);
    }
    let k = m.min(n);
    if k == 0 {
        return Ok(SvdResult {
            u: DenseMatrix::zeros(m, 0),
            singular_values: Vec::new(),
            v: DenseMatrix::zeros(n, 0),
        });
    }
    let fa = faer::MatRef::from_column_major_slice(a.as_slice(), m, n);
    let decomposition = fa.thin_svd().map_err(|_| MatrixError::NoConvergence)?;
    let (u, s, v) = (decomposition.U(), decomposition.S(), decomposition.V());
    Ok(SvdResult {
        u: DenseMatrix::from_fn(m, k, |i, j| u[(i, j)]),
        singular_values: (0..k).map(|i| s[i]).collect(),
        v: DenseMatrix::from_fn(n, k, |i, j| v[(i, j)]),
    })
}

impl SvdResult {
    pub fn reconstruct(&self) -> DenseMatrix {
        let us = DenseMatrix::from_fn(self.u.rows(), self.u.cols(), |i, j| {
            self.u[(i, j)] * self.singular_values[j]
        });
        us.matmul_t(&self.v)
    }

    /// Number of singular values strictly above `tol·σ₁`.
    pub fn rank_at(&self, tol: f64) -> usize {
        let Some(&s1) = self.singular_values.first() else {
            return 0;
        };
        if s1 <= 0.0 {
            return 0;
        }
        self.singular_values.iter().take_while(|&&s| s > tol * s1).count()
    }

    /// Best rank-`k` approximation as `(U·diag(σ))(:, :k)` and `V(:, :k)`.
    pub fn leading(&self, k: usize) -> LowRankFactor {
        let k = k.min(self.singular_values.len());
        let u = DenseMatrix::from_fn(self.u.rows(), k, |i, j| self.u[(i, j)] * self.singular_values[j]);
        LowRankFactor::new(u, self.v.leading_cols(k))
    }

    /// Frobenius error of the best rank-`k` approximation, from the tail of
    /// the spectrum.
    pub fn tail_norm(&self, k: usize) -> f64 {
        self.singular_values
            .iter()
            .skip(k)
            .map(|s| s * s)
            .sum::<f64>()
            .sqrt()
    }
}

/// Keeps the singular triplets with `σ_k > tol·σ₁`.
pub fn truncate_svd(s: &SvdResult, tol: f64) -> LowRankFactor {
    s.leading(s.rank_at(tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthogonality_defect(q: &DenseMatrix) -> f64 {
        let g = q.t_matmul(q);
        let mut worst = 0.0f64;
        for j in 0..g.cols() {
            for i in 0..g.rows() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }

    #[test]
    fn diagonal_values() {
        let s = svd(&DenseMatrix::diagonal(&[1.0, 3.0, 2.0])).unwrap();
        for (got, want) in s.singular_values.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!(orthogonality_defect(&s.u) <= 1e-12);
    }

    #[test]
    fn exactly_rank_one_block() {
        // Separated exponential-kernel block: e^{-(y-x)/8} factors exactly.
        let a = DenseMatrix::from_fn(32, 32, |i, j| (-((32 + j) as f64 - i as f64) / 8.0).exp());
        let s = svd(&a).unwrap();
        assert!(s.reconstruct().sub(&a).frobenius_norm() <= 1e-13 * a.frobenius_norm());
        assert_eq!(s.rank_at(1e-12), 1);
    }

    #[test]
    fn zero_wide_matrix() {
        let s = svd(&DenseMatrix::zeros(2, 5)).unwrap();
        assert_eq!(s.singular_values, vec![0.0, 0.0]);
        assert_eq!(s.u.shape(), (2, 2));
        assert_eq!(s.v.shape(), (5, 2));
        assert_eq!(truncate_svd(&s, 0.5).rank(), 0);
    }

    #[test]
    fn rectangular_reconstruction() {
        let a = DenseMatrix::from_fn(7, 4, |i, j| ((i * 5 + j * 3) % 7) as f64 - 3.0 + 0.1 * i as f64);
        let s = svd(&a).unwrap();
        let err = s.reconstruct().sub(&a).frobenius_norm() / a.frobenius_norm();
        assert!(err <= 1e-12);
        assert!(orthogonality_defect(&s.u) <= 1e-12);
        assert!(orthogonality_defect(&s.v) <= 1e-12);
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let wide = svd(&a.transpose()).unwrap();
        for (x, y) in wide.singular_values.iter().zip(&s.singular_values) {
            assert!((x - y).abs() <= 1e-12 * s.singular_values[0]);
        }
    }

    #[test]
    fn truncation_threshold() {
        let s = SvdResult {
            u: DenseMatrix::identity(3),
            singular_values: vec![1.0, 1e-3, 1e-9],
            v: DenseMatrix::identity(3),
        };
        assert_eq!(truncate_svd(&s, 1e-6).rank(), 2);
        let single = SvdResult {
            u: DenseMatrix::identity(1),
            singular_values: vec![5.0],
            v: DenseMatrix::identity(1),
        };
        assert_eq!(truncate_svd(&single, 1e-1).rank(), 1);
    }

    #[test]
    fn rejects_nan() {
        let mut a = DenseMatrix::identity(2);
        a[(1, 1)] = f64::INFINITY;
        assert!(matches!(svd(&a), Err(MatrixError::NonFinite)));
    }
}
