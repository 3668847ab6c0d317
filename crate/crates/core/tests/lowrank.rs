mod common;

use common::{random_dense, random_rank, rng};
use hodlrkit::frontgen::{grid_front, FrontProblem, GridSpec, Stencil};
use hodlrkit::graph::BlockGraphView;
use hodlrkit::lowrank::{
    aca_detailed, bdlr_detailed, compress, held_out_samples, monitor_error, pseudo_skeleton,
    relative_error, BlockAccessor, CompressionConfig, Scheme, SubBlock,
};
use hodlrkit::matrix::{lu_full, svd, DenseMatrix};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn front(dims: &[usize], stencil: Stencil) -> FrontProblem {
    let spec = GridSpec::new(dims, stencil).unwrap();
    let axis = (0..dims.len()).max_by_key(|&a| (dims[a], std::cmp::Reverse(a))).unwrap();
    grid_front(&spec, axis, (dims[axis] - 1) / 2).unwrap().2
}

fn top_block(p: &FrontProblem) -> SubBlock<'_, DenseMatrix> {
    let n = p.front.rows();
    let mid = n.div_ceil(2);
    SubBlock::new(&p.front, 0..mid, mid..n)
        .with_graph(BlockGraphView::from_ranges(&p.graph, 0..mid, mid..n).unwrap())
}

fn fronts() -> Vec<FrontProblem> {
    vec![
        front(&[9, 40], Stencil::Laplacian),
        front(&[33, 70], Stencil::Laplacian),
        front(&[9, 9, 9], Stencil::Laplacian),
        front(&[9, 12, 12], Stencil::Laplacian),
        front(&[7, 7, 7], Stencil::VectorLaplacian),
    ]
}

#[test]
fn every_scheme_respects_the_rank_cap() {
    for p in fronts() {
        let block = top_block(&p);
        let a = block.to_dense();
        for scheme in [Scheme::Svd, Scheme::Aca, Scheme::Bdlr] {
            for (tol, depth) in [(1e-1, 1), (1e-5, 5), (1e-10, 2)] {
                for cap in [1, 3, 10, usize::MAX] {
                    let mut cfg = CompressionConfig {
                        depth,
                        ..CompressionConfig::new(scheme, tol)
                    };
                    if cap != usize::MAX {
                        cfg = cfg.with_max_rank(cap);
                    }
                    let f = compress(&block, &cfg).unwrap();
                    assert!(f.rank() <= cfg.rank_cap(a.rows(), a.cols()), "{scheme} cap {cap}");
                    assert_eq!(f.u().cols(), f.v().cols());
                    assert!(relative_error(&a, &f).is_finite());
                }
            }
        }
    }
}

#[test]
fn bdlr_never_beats_truncated_svd() {
    for p in fronts() {
        let block = top_block(&p);
        let a = block.to_dense();
        let s = svd(&a).unwrap();
        for (tol, depth) in [(1e-1, 1), (1e-3, 3), (1e-5, 5), (1e-8, 2)] {
            let f = compress(&block, &CompressionConfig::bdlr(tol, depth)).unwrap();
            let err = a.sub(&f.to_dense()).frobenius_norm();
            assert!(err >= s.tail_norm(f.rank()) - 1e-12);
        }
    }
}

/// With `S₁ ⊆ S₂` and both skeleton LUs at full rank, the error on rows and
/// columns outside the larger skeleton is compared on one common sample set.
#[test]
fn deeper_full_rank_skeleton_does_not_raise_held_out_error() {
    let mut compared = 0;
    for p in fronts() {
        let block = top_block(&p);
        let view = block.graph_view().unwrap().clone();
        for d1 in 0..4 {
            for d2 in d1 + 1..5 {
                let tol = 1e-14;
                let r1 = bdlr_detailed(&block, &CompressionConfig::bdlr(tol, d1)).unwrap();
                let r2 = bdlr_detailed(&block, &CompressionConfig::bdlr(tol, d2)).unwrap();
                let full = |r: &hodlrkit::lowrank::BdlrResult| {
                    r.factor.rank() == r.skeleton_rows.len().min(r.skeleton_cols.len())
                };
                if !(full(&r1) && full(&r2)) {
                    continue;
                }
                let (rows, cols) = held_out_samples(&view, d2, usize::MAX);
                if rows.is_empty() && cols.is_empty() {
                    continue;
                }
                let e1 = monitor_error(&block, &r1.factor, &rows, &cols).value;
                let e2 = monitor_error(&block, &r2.factor, &rows, &cols).value;
                assert!(e2 <= e1 + 1e-12, "depth {d1} -> {d2}: {e1} -> {e2}");
                compared += 1;
            }
        }
    }
    assert!(compared > 0, "no depth pair met the full-rank precondition");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn skeleton_of_exact_rank_block_is_exact(
        m in 8usize..=128,
        n in 8usize..=128,
        r in 1usize..=8,
        extra in 0usize..4,
        clustered in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut g = rng(seed);
        let a = random_rank(m, n, r, &mut g);
        let k_rows = (r + extra).min(m);
        let k_cols = (r + g.gen_range(0..4)).min(n);
        // Clustered picks take a contiguous run, the least informative choice
        // for smooth data; otherwise a random subset.
        let pick = |len: usize, k: usize, g: &mut rand_chacha::ChaCha8Rng| -> Vec<usize> {
            if clustered {
                let start = g.gen_range(0..=len - k);
                (start..start + k).collect()
            } else {
                let mut all: Vec<usize> = (0..len).collect();
                all.shuffle(g);
                all.truncate(k);
                all
            }
        };
        let rows = pick(m, k_rows, &mut g);
        let cols = pick(n, k_cols, &mut g);
        let a_hat = a.select_rows(&rows).select_cols(&cols);
        let lu = lu_full(&a_hat);
        prop_assume!(lu.numerical_rank(1e-8) == r);
        let sk = pseudo_skeleton(&a, &rows, &cols, 1e-10, usize::MAX).unwrap();
        prop_assert_eq!(sk.factor.rank(), r);
        prop_assert!(relative_error(&a, &sk.factor) <= 1e-10);
    }

    #[test]
    fn aca_on_exact_rank_block(m in 1usize..=128, n in 1usize..=128, r in 1usize..=8, seed in any::<u64>()) {
        let mut g = rng(seed);
        let r = r.min(m).min(n);
        let a = random_rank(m, n, r, &mut g);
        let res = aca_detailed(&a, &CompressionConfig::aca(1e-12)).unwrap();
        prop_assert!(res.factor.rank() <= r + 1);
        prop_assert!(relative_error(&a, &res.factor) <= 1e-10);
    }

    #[test]
    fn schemes_on_random_blocks(m in 1usize..=40, n in 1usize..=40, cap in 1usize..=12, seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = random_dense(m, n, &mut g);
        for scheme in [Scheme::Svd, Scheme::Aca] {
            let cfg = CompressionConfig::new(scheme, 1e-6).with_max_rank(cap);
            let f = compress(&a, &cfg).unwrap();
            prop_assert!(f.rank() <= cap.min(m).min(n));
            prop_assert!(relative_error(&a, &f).is_finite());
        }
    }
}
