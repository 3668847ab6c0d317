//! Sampled and exhaustive error measurement for low-rank factors.

use super::{BlockAccessor, LowRankFactor};
use crate::matrix::DenseMatrix;

/// Reference norms below this are treated as zero.
const ZERO_REFERENCE: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorError {
    /// Relative error, or the absolute error when `zero_reference` is set.
    pub value: f64,
    pub reference_norm: f64,
    pub zero_reference: bool,
}

/// Frobenius error of `U·Vᵀ` on the held-out rows and columns, relative to
/// the block restricted to the same entries. Entries lying in both a
/// held-out row and a held-out column are counted once.
pub fn monitor_error(
    block: &(impl BlockAccessor + ?Sized),
    factor: &LowRankFactor,
    rows: &[usize],
    cols: &[usize],
) -> MonitorError {
    let mut in_rows = vec![false; block.nrows()];
    for &i in rows {
        in_rows[i] = true;
    }
    let (mut err_sq, mut ref_sq) = (0.0f64, 0.0f64);
    let (u, v) = (factor.u(), factor.v());
    for &i in rows {
        let ui = u.row(i);
        let approx = v.matvec(&ui);
        for (a, b) in block.row(i).into_iter().zip(approx) {
            err_sq += (a - b) * (a - b);
            ref_sq += a * a;
        }
    }
    for &j in cols {
        let vj = v.row(j);
        let approx = u.matvec(&vj);
        for (i, (a, b)) in block.col(j).into_iter().zip(approx).enumerate() {
            if !in_rows[i] {
                err_sq += (a - b) * (a - b);
                ref_sq += a * a;
            }
        }
    }
    let (err, reference) = (err_sq.sqrt(), ref_sq.sqrt());
    if reference < ZERO_REFERENCE {
        MonitorError {
            value: err,
            reference_norm: reference,
            zero_reference: true,
        }
    } else {
        MonitorError {
            value: err / reference,
            reference_norm: reference,
            zero_reference: false,
        }
    }
}

/// Relative Frobenius error of every prefix `U(:, :k)·V(:, :k)ᵀ`,
/// `k = 0..=rank`, against the materialized block. A zero block yields
/// absolute errors.
pub fn error_curve(a: &DenseMatrix, factor: &LowRankFactor) -> Vec<f64> {
    let reference = a.frobenius_norm();
    let scale = if reference > 0.0 { reference } else { 1.0 };
    let mut residual = a.clone();
    let mut out = Vec::with_capacity(factor.rank() + 1);
    out.push(residual.frobenius_norm() / scale);
    for k in 0..factor.rank() {
        let uk = factor.u().col(k);
        for (j, &vj) in factor.v().col(k).iter().enumerate() {
            if vj != 0.0 {
                for (r, &ui) in residual.col_mut(j).iter_mut().zip(uk) {
                    *r -= ui * vj;
                }
            }
        }
        out.push(residual.frobenius_norm() / scale);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::svd;

    fn rank_two_block() -> DenseMatrix {
        // Orthonormal factors with singular values 1 and 0.1.
        let u1 = [0.5, 0.5, 0.5, 0.5];
        let u2 = [0.5, -0.5, 0.5, -0.5];
        let s = 1.0 / 3f64.sqrt();
        let v1 = [s, s, s];
        let v2 = [1.0 / 2f64.sqrt(), 0.0, -1.0 / 2f64.sqrt()];
        DenseMatrix::from_fn(4, 3, |i, j| u1[i] * v1[j] + 0.1 * u2[i] * v2[j])
    }

    #[test]
    fn exact_factor_is_zero() {
        let a = rank_two_block();
        let f = svd(&a).unwrap().leading(2);
        let e = monitor_error(&a, &f, &[0, 2], &[1]);
        assert!(e.value <= 1e-13);
        assert!(!e.zero_reference);
    }

    #[test]
    fn rank_zero_is_one() {
        let a = rank_two_block();
        let e = monitor_error(&a, &LowRankFactor::zero(4, 3), &[1, 3], &[0, 2]);
        assert!((e.value - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn rank_one_truncation_full_holdout() {
        let a = rank_two_block();
        let f = svd(&a).unwrap().leading(1);
        let e = monitor_error(&a, &f, &[0, 1, 2, 3], &[0, 1, 2]);
        let expected = 0.1 / (1.0f64 + 0.01).sqrt();
        assert!((e.value - expected).abs() <= 1e-12);
        let sampled = monitor_error(&a, &f, &[2], &[0]);
        assert!((0.0..=1.0).contains(&sampled.value));
    }

    #[test]
    fn zero_reference_flagged() {
        let a = DenseMatrix::zeros(3, 3);
        let f = LowRankFactor::new(DenseMatrix::column_vector(&[1.0, 0.0, 0.0]), DenseMatrix::column_vector(&[0.0, 2.0, 0.0]));
        let e = monitor_error(&a, &f, &[0], &[]);
        assert!(e.zero_reference);
        assert_eq!(e.value, 2.0);
    }

    #[test]
    fn curve_matches_svd_tail() {
        let a = rank_two_block();
        let s = svd(&a).unwrap();
        let curve = error_curve(&a, &s.leading(2));
        let norm = a.frobenius_norm();
        for (k, e) in curve.iter().enumerate() {
            assert!((e - s.tail_norm(k) / norm).abs() <= 1e-13);
        }
    }
}
