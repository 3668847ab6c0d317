//! Command implementations. Each returns a [`Report`]; only `main` touches
//! stdout and the process exit code.

use std::path::Path;
use std::time::Instant;

use hodlrkit::frontgen::random_rhs;
use hodlrkit::graph::{distance_index, BlockGraphView, Side};
use hodlrkit::hodlr::{
    build_tree, factorize, relative_residual, FactorizeOptions, HodlrFactorization, HodlrTree,
    SolveReport,
};
use hodlrkit::krylov::{diagonal_preconditioner, gmres, AccessorOperator, GmresConfig, Preconditioner};
use hodlrkit::lowrank::{bdlr_detailed, error_curve, BlockAccessor, CompressionConfig, SubBlock};
use hodlrkit::matrix::{lu_full, svd, DenseMatrix};
use log::info;

use crate::args::{BlockSpec, Cli, Command, CompressionArgs, GenArgs, StudyPivotsArgs, StudyRankArgs};
use crate::input::{generate_grid, kernel_front, load_problem, ordering_to_string, Problem};
use crate::mmio::{dense_to_string, pattern_to_string, write_string};
use crate::report::{
    BdlrCurve, BlockInfo, CommandResult, ConfigEcho, CurvePoint, FactorResult, GenResult, GmresReport,
    GmresRun, InputEcho, PivotRecord, QuartileStats, Report, SolveResult, StudyPivotsResult,
    StudyRankResult, Timings, SCHEMA_VERSION,
};
use crate::{CliError, EXIT_NON_CONVERGENCE};

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    /// `0`, or [`EXIT_NON_CONVERGENCE`] when GMRES stopped short of the tolerance.
    pub exit_code: i32,
}

/// Runs one command inside a pool of `--threads` workers.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let threads = cli.command.common().threads;
    if threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::ThreadPool(e.to_string()))?;
    pool.install(|| run(&cli.command))
}

fn run(cmd: &Command) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let mut outcome = match cmd {
        Command::Gen(a) => cmd_gen(a),
        Command::Factor(a) => cmd_factor(cmd, &a.input, &a.compression),
        Command::Solve(a) => cmd_solve(cmd, a),
        Command::Gmres(a) => cmd_gmres(cmd, a),
        Command::StudyRank(a) => cmd_study_rank(cmd, a),
        Command::StudyPivots(a) => cmd_study_pivots(cmd, a),
    }?;
    outcome.report.timings.total = start.elapsed().as_secs_f64();
    Ok(outcome)
}

fn echo(cmd: &Command, compression: &CompressionArgs, input: InputEcho) -> ConfigEcho {
    let common = cmd.common();
    let mut e = ConfigEcho {
        scheme: compression.scheme,
        tol: compression.tol,
        depth: compression.depth,
        max_rank: compression.max_rank,
        leaf_size: compression.leaf_size,
        gmres_tol: hodlrkit::krylov::DEFAULT_GMRES_TOL,
        gmres_maxit: hodlrkit::krylov::DEFAULT_GMRES_MAX_ITER,
        baseline: false,
        threads: common.threads,
        seed: common.seed,
        block: None,
        tols: Vec::new(),
        depths: Vec::new(),
        input,
    };
    if let Command::Gmres(g) = cmd {
        e.gmres_tol = g.gmres_tol;
        e.gmres_maxit = g.gmres_maxit;
        e.baseline = g.baseline;
    }
    e
}

fn report(cmd: &Command, config: ConfigEcho, problem: &Problem, result: CommandResult, timings: Timings) -> Report {
    Report {
        schema_version: SCHEMA_VERSION,
        command: cmd.name(),
        config,
        problem: Some(problem.info()),
        result,
        timings,
    }
}

fn ok(report: Report) -> Outcome {
    Outcome { report, exit_code: 0 }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

fn load(cmd: &Command, input: &crate::args::InputArgs, timings: &mut Timings) -> Result<Problem, CliError> {
    let (problem, secs) = timed(|| load_problem(input, cmd.common().seed));
    timings.load = Some(secs);
    let problem = problem?;
    info!("loaded front of size {}", problem.front.n());
    Ok(problem)
}

fn build(
    problem: &Problem,
    compression: &CompressionArgs,
) -> Result<(HodlrFactorization, SolveReport, CompressionConfig), CliError> {
    let cfg = compression.config()?;
    let tree = build_tree(problem.front.n(), compression.leaf_size)?;
    let (fact, rep) = factorize(
        problem.front.accessor(),
        problem.graph.as_ref(),
        &tree,
        &cfg,
        &FactorizeOptions::default(),
    )?;
    info!("factorized: max ranks per level {:?}", rep.max_ranks());
    Ok((fact, rep, cfg))
}

fn cmd_gen(a: &GenArgs) -> Result<Outcome, CliError> {
    let dir = &a.out_dir;
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let seed = a.common.seed;
    let mut files = Vec::new();
    let mut write = |name: &str, contents: String| -> Result<(), CliError> {
        write_string(&dir.join(name), &contents)?;
        files.push(name.to_string());
        Ok(())
    };
    let (n, operator_n, input) = if let Some(dims) = &a.generate.grid {
        let g = generate_grid(&a.generate, &dims.0)?;
        let n = g.front.rows();
        write("operator.mtx", pattern_to_string(&g.operator))?;
        write("graph.mtx", pattern_to_string(&structure_only(&g.operator)))?;
        write("ordering.txt", ordering_to_string(&g.ordering))?;
        write("front.mtx", dense_to_string(&g.front))?;
        write("rhs.mtx", dense_to_string(&random_rhs(n, 1, seed)))?;
        let input = InputEcho::Grid {
            dims: g.spec.dims.clone(),
            stencil: g.spec.stencil,
            sep_axis: g.axis,
            sep_plane: g.plane,
        };
        (n, Some(g.operator.n()), input)
    } else {
        let k = kernel_front(&a.generate, seed)?;
        let n = k.nrows();
        write("front.mtx", dense_to_string(&k.to_dense()))?;
        write("rhs.mtx", dense_to_string(&random_rhs(n, 1, seed)))?;
        let input = InputEcho::Kernel {
            kernel: a.generate.kernel.expect("kernel source selected"),
            n,
            shift: a.generate.shift,
            jitter: a.generate.jitter,
        };
        (n, None, input)
    };
    let config = ConfigEcho {
        scheme: hodlrkit::lowrank::Scheme::Svd,
        tol: CompressionArgs::default().tol,
        depth: CompressionArgs::default().depth,
        max_rank: None,
        leaf_size: CompressionArgs::default().leaf_size,
        gmres_tol: hodlrkit::krylov::DEFAULT_GMRES_TOL,
        gmres_maxit: hodlrkit::krylov::DEFAULT_GMRES_MAX_ITER,
        baseline: false,
        threads: a.common.threads,
        seed,
        block: None,
        tols: Vec::new(),
        depths: Vec::new(),
        input,
    };
    Ok(ok(Report {
        schema_version: SCHEMA_VERSION,
        command: "gen",
        config,
        problem: None,
        result: CommandResult::Gen(GenResult { n, operator_n, files }),
        timings: Timings::default(),
    }))
}

/// The operator's adjacency without values, for `graph.mtx`.
fn structure_only(op: &hodlrkit::graph::SparsePattern) -> hodlrkit::graph::SparsePattern {
    hodlrkit::graph::SparsePattern::from_edges(op.n(), op.edges()).expect("edges of a valid pattern")
}

fn cmd_factor(cmd: &Command, input: &crate::args::InputArgs, compression: &CompressionArgs) -> Result<Outcome, CliError> {
    let mut timings = Timings::default();
    let problem = load(cmd, input, &mut timings)?;
    let (fact, rep, _) = build(&problem, compression)?;
    timings.record_factor(&rep);
    let result = CommandResult::Factor(FactorResult::from_report(&rep, fact.tree().depth()));
    let config = echo(cmd, compression, problem.echo.clone());
    Ok(ok(report(cmd, config, &problem, result, timings)))
}

fn cmd_solve(cmd: &Command, a: &crate::args::SolveArgs) -> Result<Outcome, CliError> {
    let mut timings = Timings::default();
    let problem = load(cmd, &a.input, &mut timings)?;
    let (fact, mut rep, _) = build(&problem, &a.compression)?;
    let n = problem.front.n();
    let b = DenseMatrix::from_col_major(n, 1, problem.rhs.clone())?;
    let x = fact.solve_with_report(problem.front.accessor(), &b, &mut rep)?;
    timings.record_factor(&rep);
    timings.solve = Some(rep.timings.solve);
    let residual = rep
        .residual
        .unwrap_or(relative_residual(problem.front.accessor(), &x, &b)?);
    if let Some(path) = &a.solution {
        write_string(path, &dense_to_string(&x))?;
    }
    let result = CommandResult::Solve(SolveResult {
        factor: FactorResult::from_report(&rep, fact.tree().depth()),
        residual,
        solution: a.solution.as_ref().map(|p| p.display().to_string()),
    });
    let config = echo(cmd, &a.compression, problem.echo.clone());
    Ok(ok(report(cmd, config, &problem, result, timings)))
}

fn cmd_gmres(cmd: &Command, a: &crate::args::GmresArgs) -> Result<Outcome, CliError> {
    if !(a.gmres_tol > 0.0 && a.gmres_tol < 1.0) || a.gmres_maxit == 0 {
        return Err(CliError::Usage("--gmres-tol must lie in (0, 1) and --gmres-maxit be at least 1".into()));
    }
    let mut timings = Timings::default();
    let problem = load(cmd, &a.input, &mut timings)?;
    let (fact, rep, _) = build(&problem, &a.compression)?;
    timings.record_factor(&rep);
    let op = AccessorOperator(problem.front.accessor());

    let (run, secs) = timed(|| {
        gmres(
            &op,
            &problem.rhs,
            &GmresConfig {
                tol: a.gmres_tol,
                max_iter: a.gmres_maxit,
                preconditioner: Preconditioner::Hodlr(&fact),
            },
        )
    });
    let run = run?;
    timings.iterate = Some(secs);
    info!("HODLR-preconditioned GMRES: {} iterations, converged = {}", run.iterations, run.converged);

    let baseline = if a.baseline {
        let diag = diagonal_preconditioner(problem.front.accessor());
        let (base, secs) = timed(|| {
            gmres(
                &op,
                &problem.rhs,
                &GmresConfig {
                    tol: a.gmres_tol,
                    max_iter: a.gmres_maxit,
                    preconditioner: Preconditioner::Diagonal(diag),
                },
            )
        });
        let base = base?;
        timings.baseline_iterate = Some(secs);
        info!("diagonal-preconditioned GMRES: {} iterations, converged = {}", base.iterations, base.converged);
        Some(GmresRun::new("diagonal", &base))
    } else {
        None
    };

    let exit_code = if run.converged { 0 } else { EXIT_NON_CONVERGENCE };
    let result = CommandResult::Gmres(GmresReport {
        factor: FactorResult::from_report(&rep, fact.tree().depth()),
        hodlr: GmresRun::new("hodlr", &run),
        baseline,
    });
    let config = echo(cmd, &a.compression, problem.echo.clone());
    Ok(Outcome {
        report: report(cmd, config, &problem, result, timings),
        exit_code,
    })
}

/// Row and column ranges of the requested off-diagonal block.
pub fn resolve_block(tree: &HodlrTree, spec: BlockSpec) -> Result<BlockInfo, CliError> {
    let split: Vec<_> = tree
        .nodes()
        .iter()
        .filter(|node| node.level == spec.level && !node.is_leaf())
        .collect();
    let node = split.get(spec.index).ok_or(CliError::BlockOutOfRange {
        level: spec.level,
        index: spec.index,
        available: split.len(),
    })?;
    let (top, bottom) = ([node.lo, node.mid()], [node.mid(), node.hi]);
    let (rows, cols) = if spec.lower { (bottom, top) } else { (top, bottom) };
    Ok(BlockInfo {
        level: spec.level,
        index: spec.index,
        lower: spec.lower,
        rows,
        cols,
    })
}

fn block_of(problem: &Problem, leaf_size: usize, spec: BlockSpec) -> Result<BlockInfo, CliError> {
    if leaf_size == 0 {
        return Err(CliError::Usage("--leaf-size must be at least 1".into()));
    }
    let tree = build_tree(problem.front.n(), leaf_size)?;
    resolve_block(&tree, spec)
}

fn cmd_study_rank(cmd: &Command, a: &StudyRankArgs) -> Result<Outcome, CliError> {
    a.compression.config()?;
    let mut timings = Timings::default();
    let problem = load(cmd, &a.input, &mut timings)?;
    let block = block_of(&problem, a.compression.leaf_size, a.block)?;
    let front = problem.front.accessor();
    let sub = SubBlock::new(front, block.rows[0]..block.rows[1], block.cols[0]..block.cols[1]);
    let dense = sub.to_dense();
    let norm = dense.frobenius_norm();

    let s = svd(&dense)?;
    let scale = if norm > 0.0 { norm } else { 1.0 };
    let svd_curve: Vec<CurvePoint> = (0..=s.singular_values.len())
        .map(|k| CurvePoint {
            rank: k,
            error: s.tail_norm(k) / scale,
        })
        .collect();

    let tols = if a.tols.is_empty() { vec![a.compression.tol] } else { a.tols.clone() };
    let depths = match a.depths.len() {
        0 => vec![a.compression.depth; tols.len()],
        1 => vec![a.depths[0]; tols.len()],
        k if k == tols.len() => a.depths.clone(),
        k => {
            return Err(CliError::Usage(format!(
                "--depths has {k} entries for {} tolerances",
                tols.len()
            )))
        }
    };
    for &tol in &tols {
        CompressionConfig::bdlr(tol, 0).validate()?;
    }
    let mut bdlr = Vec::new();
    if let Some(graph) = &problem.graph {
        for (&tol, &depth) in tols.iter().zip(&depths) {
            let mut cfg = CompressionConfig::bdlr(tol, depth);
            if let Some(r) = a.compression.max_rank {
                cfg = cfg.with_max_rank(r);
            }
            let view = BlockGraphView::from_ranges(graph, block.rows[0]..block.rows[1], block.cols[0]..block.cols[1])?;
            let sub = SubBlock::new(front, block.rows[0]..block.rows[1], block.cols[0]..block.cols[1]).with_graph(view);
            let res = bdlr_detailed(&sub, &cfg)?;
            let curve = error_curve(&dense, &res.factor)
                .into_iter()
                .enumerate()
                .map(|(rank, error)| CurvePoint { rank, error })
                .collect();
            bdlr.push(BdlrCurve {
                tol,
                depth,
                rank: res.factor.rank(),
                skeleton_rows: res.skeleton_rows.len(),
                skeleton_cols: res.skeleton_cols.len(),
                curve,
            });
        }
    } else if !a.tols.is_empty() || a.compression.scheme == hodlrkit::lowrank::Scheme::Bdlr {
        return Err(CliError::MissingGraph("study-rank with BDLR curves"));
    }

    let mut config = echo(cmd, &a.compression, problem.echo.clone());
    config.block = Some(block);
    config.tols = tols;
    config.depths = depths;
    let result = CommandResult::StudyRank(StudyRankResult {
        block,
        block_norm: norm,
        svd: svd_curve,
        bdlr,
    });
    Ok(ok(report(cmd, config, &problem, result, timings)))
}

fn cmd_study_pivots(cmd: &Command, a: &StudyPivotsArgs) -> Result<Outcome, CliError> {
    a.compression.config()?;
    let mut timings = Timings::default();
    let problem = load(cmd, &a.input, &mut timings)?;
    let graph = problem.graph.as_ref().ok_or(CliError::MissingGraph("study-pivots"))?;
    let block = block_of(&problem, a.compression.leaf_size, a.block)?;
    let (rows, cols) = (block.rows[0]..block.rows[1], block.cols[0]..block.cols[1]);
    let dense = SubBlock::new(problem.front.accessor(), rows.clone(), cols.clone()).to_dense();
    let view = BlockGraphView::from_ranges(graph, rows, cols)?;
    let pivots = pivot_records(&dense, &view);

    let mut config = echo(cmd, &a.compression, problem.echo.clone());
    config.block = Some(block);
    let (top, bottom) = quartiles(&pivots);
    let result = CommandResult::StudyPivots(StudyPivotsResult {
        block,
        pivots,
        top_quartile: top,
        bottom_quartile: bottom,
    });
    Ok(ok(report(cmd, config, &problem, result, timings)))
}

/// One record per nonzero pivot of the complete-pivoting LU of `block`.
pub fn pivot_records(block: &DenseMatrix, view: &BlockGraphView<'_>) -> Vec<PivotRecord> {
    let lu = lu_full(block);
    let row_d = distance_index(view, Side::Row);
    let col_d = distance_index(view, Side::Col);
    (0..lu.steps())
        .map(|k| {
            let (i, j) = (lu.row_perm()[k], lu.col_perm()[k]);
            PivotRecord {
                step: k,
                magnitude: lu.pivots()[k].abs(),
                row: i,
                col: j,
                row_d: row_d.at(i),
                col_d: col_d.at(j),
            }
        })
        .collect()
}

/// Statistics over the largest and the smallest `⌈len/4⌉` pivots by
/// magnitude (ties broken by elimination step).
pub fn quartiles(pivots: &[PivotRecord]) -> (QuartileStats, QuartileStats) {
    let mut order: Vec<&PivotRecord> = pivots.iter().collect();
    order.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude).then(a.step.cmp(&b.step)));
    let q = pivots.len().div_ceil(4);
    (quartile_stats(&order[..q]), quartile_stats(&order[order.len() - q..]))
}

fn quartile_stats(recs: &[&PivotRecord]) -> QuartileStats {
    let mean = |vals: Vec<f64>| (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
    let rows: Vec<f64> = recs.iter().filter_map(|r| r.row_d).map(|d| d as f64).collect();
    let cols: Vec<f64> = recs.iter().filter_map(|r| r.col_d).map(|d| d as f64).collect();
    let both: Vec<f64> = recs
        .iter()
        .filter_map(|r| Some((r.row_d? + r.col_d?) as f64 / 2.0))
        .collect();
    QuartileStats {
        count: recs.len(),
        mean_row_d: mean(rows),
        mean_col_d: mean(cols),
        mean_d: mean(both),
    }
}

/// Writes the report to `--out` or stdout.
pub fn emit(report: &Report, out: Option<&Path>) -> Result<(), CliError> {
    let json = report.to_json();
    match out {
        Some(path) => write_string(path, &(json + "\n")).map_err(Into::into),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}
