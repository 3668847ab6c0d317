mod common;

use std::fs;
use std::process::Command;

use common::*;
use hodlrkit::frontgen::{grid_front, kernel_matrix, GridSpec, KernelKind};
use hodlrkit::graph::SparsePattern;
use hodlrkit::matrix::DenseMatrix;
use hodlrkit_cli::mmio::{parse_matrix_market, read_matrix_market, MatrixMarket};
use hodlrkit_cli::{CliError, EXIT_ERROR, EXIT_NON_CONVERGENCE};
use serde_json::Value;
use tempfile::tempdir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hodlrkit"))
}

#[test]
fn gen_grid_writes_front_graph_and_operator() {
    let dir = tempdir().unwrap();
    let out = run(&["gen", "--grid", "9x9", "--sep-axis", "x", "--sep-plane", "4", "--out-dir", s(dir.path())]);
    let report = json(&out);
    assert_schema_valid(&report);
    assert_eq!(report["result"]["n"], 9);
    assert_eq!(report["result"]["operator_n"], 81);

    let front = read_matrix_market(&dir.path().join("front.mtx")).unwrap();
    assert!(matches!(front, MatrixMarket::Array(_)));
    assert_eq!(front.into_dense().shape(), (9, 9));
    let op = read_matrix_market(&dir.path().join("operator.mtx")).unwrap();
    assert!(matches!(op, MatrixMarket::Coordinate(_)));
    assert_eq!(op.into_pattern().unwrap().n(), 81);
    let graph = read_matrix_market(&dir.path().join("graph.mtx")).unwrap().into_pattern().unwrap();
    assert_eq!(graph.n(), 81);
    assert!(!graph.has_values());
    let ordering = fs::read_to_string(dir.path().join("ordering.txt")).unwrap();
    let ids: Vec<usize> = ordering.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(ids, (0..9).map(|y| 4 + 9 * y).collect::<Vec<_>>());
}

#[test]
fn gen_kernel_writes_dense_front() {
    let dir = tempdir().unwrap();
    let out = run(&["gen", "--kernel", "inv-distance", "--n", "256", "--shift", "2", "--out-dir", s(dir.path())]);
    assert_schema_valid(&json(&out));
    let front = read_matrix_market(&dir.path().join("front.mtx")).unwrap();
    let MatrixMarket::Array(front) = front else { panic!("expected array format") };
    assert_eq!(front, kernel_matrix(256, KernelKind::InvDistance, 2.0));
    assert!(!dir.path().join("graph.mtx").exists());
}

#[test]
fn regenerated_files_are_byte_identical() {
    for args in [
        vec!["gen", "--kernel", "exp-decay", "--n", "100", "--jitter", "0.3", "--seed", "7"],
        vec!["gen", "--grid", "5x7x6", "--stencil", "vector-laplacian", "--seed", "7"],
    ] {
        let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
        for d in [&a, &b] {
            let mut full = args.clone();
            full.extend(["--out-dir", s(d.path())]);
            run(&full);
        }
        let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.len() >= 2);
        for name in names {
            assert_eq!(
                fs::read(a.path().join(&name)).unwrap(),
                fs::read(b.path().join(&name)).unwrap(),
                "{name:?} differs for {args:?}"
            );
        }
    }
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    run(&["gen", "--kernel", "exp-decay", "--n", "50", "--jitter", "0.3", "--seed", "1", "--out-dir", s(a.path())]);
    run(&["gen", "--kernel", "exp-decay", "--n", "50", "--jitter", "0.3", "--seed", "2", "--out-dir", s(b.path())]);
    assert_ne!(fs::read(a.path().join("front.mtx")).unwrap(), fs::read(b.path().join("front.mtx")).unwrap());
}

#[test]
fn written_front_round_trips_exactly() {
    let dir = tempdir().unwrap();
    run(&["gen", "--grid", "7x11", "--out-dir", s(dir.path())]);
    let spec = GridSpec::laplacian(&[7, 11]).unwrap();
    let (axis, plane) = spec.default_separator().unwrap();
    let (op, _, problem) = grid_front(&spec, axis, plane).unwrap();
    let front = read_matrix_market(&dir.path().join("front.mtx")).unwrap().into_dense();
    assert_eq!(front, problem.front);
    let op_back = read_matrix_market(&dir.path().join("operator.mtx")).unwrap().into_pattern().unwrap();
    assert_eq!(op_back.to_dense(), op.to_dense());
}

#[test]
fn files_and_inline_generation_give_the_same_run() {
    let dir = tempdir().unwrap();
    run(&["gen", "--grid", "9x20", "--seed", "3", "--out-dir", s(dir.path())]);
    let d = dir.path();
    let flags = ["--scheme", "bdlr", "--tol", "1e-1", "--depth", "1", "--leaf-size", "4", "--seed", "3", "--baseline"];
    let [front, graph, ordering, rhs] =
        ["front.mtx", "graph.mtx", "ordering.txt", "rhs.mtx"].map(|f| d.join(f).to_str().unwrap().to_owned());
    let mut from_files = vec!["gmres", "--front", &front, "--graph", &graph, "--ordering", &ordering, "--rhs", &rhs];
    from_files.extend(flags);
    let mut inline = vec!["gmres", "--grid", "9x20"];
    inline.extend(flags);
    let a = json(&run(&from_files));
    let b = json(&run(&inline));
    assert_schema_valid(&a);
    assert_eq!(a["result"], b["result"]);
    assert_eq!(a["problem"], b["problem"]);
}

#[test]
fn identity_front_converges_in_one_iteration() {
    let dir = tempdir().unwrap();
    let front = write_dense(dir.path(), "eye.mtx", &DenseMatrix::identity(40));
    let out = run(&["gmres", "--front", s(&front), "--leaf-size", "8", "--baseline"]);
    let r = json(&out);
    assert_schema_valid(&r);
    assert_eq!(out.exit_code, 0);
    assert_eq!(r["result"]["hodlr"]["iterations"], 1);
    assert_eq!(r["result"]["hodlr"]["converged"], true);
    assert_eq!(r["result"]["baseline"]["iterations"], 1);
}

#[test]
fn bdlr_preconditioned_gmres_on_81_point_front() {
    let out = run(&[
        "gmres", "--grid", "9x81", "--sep-axis", "x", "--scheme", "bdlr", "--tol", "1e-1", "--depth", "1", "--baseline",
    ]);
    let r = json(&out);
    assert_schema_valid(&r);
    assert_eq!(r["problem"]["n"], 81);
    assert_eq!(r["result"]["hodlr"]["converged"], true);
    let its = r["result"]["hodlr"]["iterations"].as_u64().unwrap();
    assert!(its < 1000);
    assert!(r["result"]["hodlr"]["true_residual"].as_f64().unwrap() <= 1e-9);
    assert!(its < r["result"]["baseline"]["iterations"].as_u64().unwrap());
}

#[test]
fn table_tolerance_depth_pairs_all_run() {
    for (tol, depth) in [("1e-1", "1"), ("1e-3", "3"), ("1e-5", "5")] {
        let out = run(&["gmres", "--grid", "9x30", "--scheme", "bdlr", "--tol", tol, "--depth", depth, "--leaf-size", "8"]);
        let r = json(&out);
        assert_schema_valid(&r);
        assert_eq!(r["result"]["hodlr"]["converged"], true, "{tol} {depth}");
    }
}

#[test]
fn every_scheme_solves_a_kernel_front() {
    for scheme in ["svd", "aca"] {
        let out = run(&[
            "solve", "--kernel", "inv-distance", "--n", "200", "--jitter", "0.25", "--scheme", scheme, "--tol", "1e-12",
        ]);
        let r = json(&out);
        assert_schema_valid(&r);
        assert!(r["result"]["residual"].as_f64().unwrap() < 1e-9, "{scheme}: {r:#}");
    }
    let err = try_run(&["factor", "--kernel", "inv-distance", "--n", "200", "--scheme", "bdlr"]).unwrap_err();
    assert!(matches!(err, CliError::Hodlr(hodlrkit::hodlr::HodlrError::MissingGraph)), "{err}");
}

#[test]
fn solve_writes_solution() {
    let dir = tempdir().unwrap();
    let x = dir.path().join("x.mtx");
    let out = run(&["solve", "--grid", "9x9x9", "--leaf-size", "16", "--solution", s(&x)]);
    assert_schema_valid(&json(&out));
    let sol = read_matrix_market(&x).unwrap().into_dense();
    assert_eq!(sol.shape(), (81, 1));
}

#[test]
fn factor_reports_levels() {
    let out = run(&["factor", "--grid", "9x16x16", "--sep-axis", "x", "--leaf-size", "32", "--tol", "1e-6"]);
    let r = json(&out);
    assert_schema_valid(&r);
    assert_eq!(r["problem"]["n"], 256);
    assert_eq!(r["result"]["tree_depth"], 3);
    assert_eq!(r["result"]["max_ranks"].as_array().unwrap().len(), 3);
    assert_eq!(r["timings"]["levels"].as_array().unwrap().len(), r["result"]["levels"].as_array().unwrap().len());
}

/// Path graph 0-1-2-3 split as {0,1} | {2,3}: the only crossing edge is 1-2.
#[test]
fn single_crossing_edge_pivot_sits_on_the_boundary() {
    let dir = tempdir().unwrap();
    let mut a = DenseMatrix::identity(4).scaled(4.0);
    for (i, j, v) in [(0, 1, -1.0), (1, 2, -1.0), (2, 3, -1.0)] {
        a[(i, j)] = v;
        a[(j, i)] = v;
    }
    let g = SparsePattern::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
    let front = write_dense(dir.path(), "f.mtx", &a);
    let graph = write_pattern(dir.path(), "g.mtx", &g);
    let out = run(&["study-pivots", "--front", s(&front), "--graph", s(&graph), "--leaf-size", "2"]);
    let r = json(&out);
    assert_schema_valid(&r);
    let pivots = r["result"]["pivots"].as_array().unwrap();
    assert_eq!(pivots.len(), 1);
    // The materialized block is [[0, 0], [-1, 0]].
    assert_eq!(pivots[0]["row"], 1);
    assert_eq!(pivots[0]["col"], 0);
    assert_eq!(pivots[0]["magnitude"], 1.0);
    assert_eq!(pivots[0]["row_d"], 0);
    assert_eq!(pivots[0]["col_d"], 0);
}

#[test]
fn zero_block_has_no_pivots_and_zero_errors() {
    let dir = tempdir().unwrap();
    let a = DenseMatrix::identity(16).scaled(3.0);
    let g = SparsePattern::from_edges(16, (0..7).map(|i| (i, i + 1)).chain((8..15).map(|i| (i, i + 1)))).unwrap();
    let front = write_dense(dir.path(), "f.mtx", &a);
    let graph = write_pattern(dir.path(), "g.mtx", &g);
    let base = ["--front", s(&front), "--graph", s(&graph), "--leaf-size", "8"];

    let mut args = vec!["study-pivots"];
    args.extend(base);
    let r = json(&run(&args));
    assert_schema_valid(&r);
    assert!(r["result"]["pivots"].as_array().unwrap().is_empty());
    assert_eq!(r["result"]["top_quartile"]["mean_d"], Value::Null);

    let mut args = vec!["study-rank", "--tols", "1e-1,1e-5", "--depths", "1,5"];
    args.extend(base);
    let r = json(&run(&args));
    assert_schema_valid(&r);
    for p in r["result"]["svd"].as_array().unwrap() {
        assert_eq!(p["error"], 0.0);
    }
    let bdlr = r["result"]["bdlr"].as_array().unwrap();
    assert_eq!(bdlr.len(), 2);
    for c in bdlr {
        assert_eq!(c["rank"], 0);
        for p in c["curve"].as_array().unwrap() {
            assert_eq!(p["error"], 0.0);
        }
    }
}

#[test]
fn rank_three_block_svd_curve_drops_at_three() {
    let dir = tempdir().unwrap();
    let (m, n) = (10, 9);
    let b = DenseMatrix::from_fn(m, n, |i, j| {
        let (x, y) = (i as f64 / m as f64, j as f64 / n as f64);
        1.0 + x * y - 0.5 * (x + 2.0 * y).powi(2)
    });
    let a = two_by_two(20.0, &b);
    let front = write_dense(dir.path(), "f.mtx", &a);
    let out = run(&["study-rank", "--front", s(&front), "--leaf-size", "10"]);
    let r = json(&out);
    assert_schema_valid(&r);
    assert_eq!(r["result"]["block"]["rows"], serde_json::json!([0, 10]));
    let svd = r["result"]["svd"].as_array().unwrap();
    assert_eq!(svd.len(), 10);
    assert!(svd[2]["error"].as_f64().unwrap() > 1e-6);
    assert!(svd[3]["error"].as_f64().unwrap() <= 1e-12);
    assert!(r["result"]["bdlr"].as_array().unwrap().is_empty());
}

#[test]
fn svd_curve_is_below_every_bdlr_curve() {
    let out = run(&[
        "study-rank", "--grid", "17x33", "--sep-axis", "x", "--leaf-size", "8", "--tols", "1e-1,1e-3,1e-5", "--depths", "1,3,5", "--block", "1,1,lower",
    ]);
    let r = json(&out);
    assert_schema_valid(&r);
    let svd: Vec<f64> = r["result"]["svd"].as_array().unwrap().iter().map(|p| p["error"].as_f64().unwrap()).collect();
    for c in r["result"]["bdlr"].as_array().unwrap() {
        for p in c["curve"].as_array().unwrap() {
            let k = p["rank"].as_u64().unwrap() as usize;
            assert!(svd[k] <= p["error"].as_f64().unwrap() + 1e-12, "rank {k}: {c}");
        }
    }
}

#[test]
fn block_out_of_range_is_reported() {
    let err = try_run(&["study-pivots", "--grid", "9x9", "--leaf-size", "4", "--block", "2,0"]).unwrap_err();
    assert!(matches!(err, CliError::BlockOutOfRange { level: 2, index: 0, available: 0 }), "{err}");
    let err = try_run(&["study-rank", "--grid", "9x9", "--leaf-size", "4", "--block", "1,1"]).unwrap_err();
    assert!(matches!(err, CliError::BlockOutOfRange { available: 1, .. }), "{err}");
    let err = try_run(&["study-pivots", "--kernel", "exp-decay", "--n", "32"]).unwrap_err();
    assert!(matches!(err, CliError::MissingGraph(_)), "{err}");
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let cases: [&[&str]; 4] = [
        &["gmres", "--kernel", "exp-decay", "--n", "300", "--jitter", "0.4", "--seed", "5", "--scheme", "aca", "--tol", "1e-4", "--baseline"],
        &["gmres", "--grid", "9x12x12", "--scheme", "bdlr", "--tol", "1e-1", "--depth", "1", "--threads", "2"],
        &["study-pivots", "--grid", "9x40", "--sep-axis", "x", "--leaf-size", "16"],
        &["study-rank", "--grid", "9x40", "--sep-axis", "x", "--leaf-size", "16", "--tols", "1e-2", "--depths", "2"],
    ];
    for args in cases {
        let a = run(args).report;
        let b = run(args).report;
        assert_eq!(a.without_timings(), b.without_timings(), "{args:?}");
        assert_schema_valid(&serde_json::to_value(&a).unwrap());
    }
}

#[test]
fn schema_rejects_malformed_reports() {
    let good = json(&run(&["factor", "--grid", "9x9"]));
    assert_schema_valid(&good);
    let mut missing = good.clone();
    missing.as_object_mut().unwrap().remove("timings");
    assert!(!schema_errors(&missing).is_empty());
    let mut negative = good.clone();
    negative["timings"]["total"] = serde_json::json!(-1.0);
    assert!(!schema_errors(&negative).is_empty());
    let mut non_finite = good.clone();
    non_finite["result"]["levels"][0]["mean_rank"] = Value::Null;
    assert!(!schema_errors(&non_finite).is_empty());
    let mut version = good;
    version["schema_version"] = serde_json::json!("0.9");
    assert!(!schema_errors(&version).is_empty());
}

#[test]
fn malformed_matrix_market_names_the_line() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("bad.mtx");
    fs::write(&p, "%%MatrixMarket matrix coordinate real general\n% c\n3 3 2\n1 1 1.0\n").unwrap();
    let err = try_run(&["factor", "--front", s(&p)]).unwrap_err();
    assert!(err.to_string().contains("line 5"), "{err}");
    assert!(parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1 2 3\n").is_err());
}

#[test]
fn binary_exit_codes_and_output() {
    let dir = tempdir().unwrap();
    let eye = write_dense(dir.path(), "eye.mtx", &DenseMatrix::identity(10));
    let out = bin().args(["gmres", "--front", s(&eye)]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_schema_valid(&r);

    let report = dir.path().join("r.json");
    let out = bin()
        .args(["gmres", "--grid", "9x40", "--scheme", "svd", "--tol", "0.9", "--max-rank", "1", "--leaf-size", "4"])
        .args(["--gmres-maxit", "2", "--out", s(&report)])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_NON_CONVERGENCE));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_schema_valid(&r);
    assert_eq!(r["result"]["hodlr"]["converged"], false);
    assert_eq!(r["result"]["hodlr"]["stop"], "max_iterations");

    let out = bin().args(["factor", "--front", s(&dir.path().join("missing.mtx"))]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.mtx"));

    let out = bin()
        .args(["factor", "--grid", "9x9", "--threads", "0"])
        .env("HODLRKIT_LOG", "debug")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
    let out = bin().args(["factor", "--grid", "9x9"]).env("HODLRKIT_LOG", "info").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("factorized"));
}
