mod common;

use common::{random_graph, random_sides, rng};
use hodlrkit::graph::{
    boundary_vertices, distance_index, select_by_depth, BlockGraphView, GraphError, Side,
    SparsePattern,
};
use proptest::prelude::*;

const INF: usize = usize::MAX / 4;

/// All-pairs shortest paths on the subgraph induced by `verts`, then the
/// minimum over boundary vertices.
fn floyd_warshall_to_boundary(g: &SparsePattern, verts: &[usize], boundary: &[usize]) -> Vec<Option<usize>> {
    let k = verts.len();
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in verts.iter().enumerate() {
        local[v] = i;
    }
    let mut d = vec![INF; k * k];
    for i in 0..k {
        d[i * k + i] = 0;
        for &w in g.neighbors(verts[i]) {
            if local[w] != usize::MAX {
                d[i * k + local[w]] = 1;
            }
        }
    }
    for m in 0..k {
        for i in 0..k {
            let dim = d[i * k + m];
            if dim == INF {
                continue;
            }
            for j in 0..k {
                let alt = dim + d[m * k + j];
                if alt < d[i * k + j] {
                    d[i * k + j] = alt;
                }
            }
        }
    }
    (0..k)
        .map(|i| {
            let best = boundary.iter().map(|&b| d[i * k + local[b]]).min().unwrap_or(INF);
            (best < INF).then_some(best)
        })
        .collect()
}

fn brute_boundary(g: &SparsePattern, own: &[usize], other: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = own
        .iter()
        .copied()
        .filter(|&v| other.iter().any(|&w| g.has_edge(v, w)))
        .collect();
    out.sort_unstable();
    out
}

fn check_against_brute_force(n: usize, p: f64, seed: u64) {
    let mut r = rng(seed);
    let g = random_graph(n, p, &mut r);
    let (rows, cols) = random_sides(n, &mut r);
    let view = BlockGraphView::new(&g, rows.clone(), cols.clone()).unwrap();
    for (side, own, other) in [(Side::Row, &rows, &cols), (Side::Col, &cols, &rows)] {
        let boundary = boundary_vertices(&view, side);
        assert_eq!(boundary, brute_boundary(&g, own, other));
        let expected = floyd_warshall_to_boundary(&g, own, &boundary);
        let index = distance_index(&view, side);
        assert_eq!(index.vertices(), own.as_slice());
        assert_eq!(index.distances(), expected.as_slice(), "n={n} p={p} seed={seed} side={side:?}");
    }
}

#[test]
fn bfs_matches_floyd_warshall_on_two_hundred_vertices() {
    for seed in 0..4 {
        check_against_brute_force(200, 0.015, seed);
    }
}

#[test]
fn five_by_five_grid_layers() {
    let id = |x: usize, y: usize| y * 5 + x;
    let mut edges = Vec::new();
    for y in 0..5 {
        for x in 0..5 {
            if x + 1 < 5 {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < 5 {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    let g = SparsePattern::from_edges(25, edges).unwrap();
    let rows: Vec<usize> = (0..25).filter(|v| v % 5 < 2).collect();
    let cols: Vec<usize> = (0..25).filter(|v| v % 5 >= 2).collect();
    let view = BlockGraphView::new(&g, rows, cols).unwrap();
    let index = distance_index(&view, Side::Row);
    for (&v, &d) in index.vertices().iter().zip(index.distances()) {
        assert_eq!(d, Some(1 - v % 5));
    }
    let sk = select_by_depth(&view, 1).unwrap();
    assert_eq!(sk.row_vertices, vec![1, 6, 11, 16, 21, 0, 5, 10, 15, 20]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bfs_matches_floyd_warshall(n in 2usize..=120, p in 0.01f64..0.2, seed in any::<u64>()) {
        check_against_brute_force(n, p, seed);
    }

    #[test]
    fn adjacent_vertices_differ_by_at_most_one(n in 2usize..=150, p in 0.01f64..0.2, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_graph(n, p, &mut r);
        let (rows, cols) = random_sides(n, &mut r);
        let view = BlockGraphView::new(&g, rows.clone(), cols).unwrap();
        let index = distance_index(&view, Side::Row);
        let boundary = boundary_vertices(&view, Side::Row);
        for (&v, &d) in index.vertices().iter().zip(index.distances()) {
            prop_assert_eq!(d == Some(0), boundary.contains(&v));
            for &w in g.neighbors(v) {
                if rows.contains(&w) {
                    match (d, index.of_vertex(w)) {
                        (Some(a), Some(b)) => prop_assert!(a.abs_diff(b) <= 1),
                        (a, b) => prop_assert_eq!(a, b),
                    }
                }
            }
        }
    }

    #[test]
    fn selection_grows_with_depth(n in 2usize..=150, p in 0.01f64..0.2, seed in any::<u64>(), d1 in 0usize..6, extra in 0usize..6) {
        let mut r = rng(seed);
        let g = random_graph(n, p, &mut r);
        let (rows, cols) = random_sides(n, &mut r);
        let view = BlockGraphView::new(&g, rows, cols).unwrap();
        let d2 = d1 + extra;
        match (select_by_depth(&view, d1), select_by_depth(&view, d2)) {
            (Ok(small), Ok(large)) => {
                // Layer order makes the smaller selection a prefix of the larger.
                prop_assert_eq!(&large.rows[..small.rows.len()], small.rows.as_slice());
                prop_assert_eq!(&large.cols[..small.cols.len()], small.cols.as_slice());
                prop_assert_eq!(&large.row_vertices[..small.row_vertices.len()], small.row_vertices.as_slice());
            }
            (Err(GraphError::EmptySelection { side: a, .. }), Err(GraphError::EmptySelection { side: b, .. })) => {
                prop_assert_eq!(a, b);
            }
            (a, b) => prop_assert!(false, "depth {d1} gave {a:?}, depth {d2} gave {b:?}"),
        }
    }

    #[test]
    fn selection_is_deterministic(n in 2usize..=150, p in 0.01f64..0.2, seed in any::<u64>(), depth in 0usize..5) {
        let mut r = rng(seed);
        let g = random_graph(n, p, &mut r);
        let (rows, cols) = random_sides(n, &mut r);
        // Rebuilding the pattern from a reversed edge list must not matter.
        let mut edges: Vec<(usize, usize)> = g.edges().collect();
        edges.reverse();
        let g2 = SparsePattern::from_edges(n, edges).unwrap();
        let a = select_by_depth(&BlockGraphView::new(&g, rows.clone(), cols.clone()).unwrap(), depth);
        let b = select_by_depth(&BlockGraphView::new(&g2, rows, cols).unwrap(), depth);
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
