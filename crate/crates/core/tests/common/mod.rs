#![allow(dead_code)]

use hodlrkit::graph::SparsePattern;
use hodlrkit::matrix::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries uniform in `[-1, 1]`.
pub fn random_dense(m: usize, n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..=1.0))
}

/// Random matrix shifted by `n·I`, comfortably conditioned.
pub fn well_conditioned(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let mut a = random_dense(n, n, rng);
    for i in 0..n {
        a[(i, i)] += n as f64;
    }
    a
}

/// `X·Yᵀ` with Gaussian-like factors, rank exactly `r` with probability one.
pub fn random_rank(m: usize, n: usize, r: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let x = random_dense(m, r, rng);
    let y = random_dense(n, r, rng);
    x.matmul_t(&y)
}

/// Erdős–Rényi graph with edge probability `p`.
pub fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> SparsePattern {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    SparsePattern::from_edges(n, edges).expect("valid edges")
}

/// Splits `0..n` into disjoint row and column sets, leaving some vertices
/// out of both.
pub fn random_sides(n: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let (mut rows, mut cols) = (Vec::new(), Vec::new());
    for v in 0..n {
        match rng.gen_range(0..10) {
            0..=4 => rows.push(v),
            5..=8 => cols.push(v),
            _ => {}
        }
    }
    (rows, cols)
}

pub fn rel_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let scale = b.frobenius_norm();
    let d = a.sub(b).frobenius_norm();
    if scale > 0.0 {
        d / scale
    } else {
        d
    }
}
