//! Turns input flags into a front, an optional front-local graph and a
//! right-hand side.

use std::fs;
use std::path::Path;

use hodlrkit::frontgen::{grid_front, jittered_points, random_rhs, GridSpec, KernelMatrix, Separator};
use hodlrkit::graph::SparsePattern;
use hodlrkit::lowrank::BlockAccessor;
use hodlrkit::matrix::DenseMatrix;

use crate::args::{GenerateArgs, InputArgs};
use crate::mmio::{read_matrix_market, MmError};
use crate::report::{InputEcho, ProblemInfo};
use crate::CliError;

pub enum Front {
    Dense(DenseMatrix),
    Kernel(KernelMatrix),
}

impl Front {
    pub fn accessor(&self) -> &(dyn BlockAccessor + '_) {
        match self {
            Front::Dense(m) => m,
            Front::Kernel(k) => k,
        }
    }

    pub fn n(&self) -> usize {
        self.accessor().nrows()
    }
}

pub struct Problem {
    pub front: Front,
    /// Front-local: vertex `k` is front row `k`.
    pub graph: Option<SparsePattern>,
    pub rhs: Vec<f64>,
    pub echo: InputEcho,
}

impl Problem {
    pub fn info(&self) -> ProblemInfo {
        ProblemInfo {
            n: self.front.n(),
            has_graph: self.graph.is_some(),
            graph_edges: self.graph.as_ref().map(|g| g.edges().count()),
        }
    }
}

/// A generated grid front with everything `gen` writes to disk.
pub struct GridProblem {
    pub spec: GridSpec,
    pub axis: usize,
    pub plane: usize,
    pub operator: SparsePattern,
    pub separator: Separator,
    pub front: DenseMatrix,
    pub graph: SparsePattern,
    pub ordering: Vec<usize>,
}

pub fn generate_grid(args: &GenerateArgs, dims: &[usize]) -> Result<GridProblem, CliError> {
    let spec = GridSpec::new(dims, args.stencil)?;
    let axis = match args.sep_axis {
        Some(a) => a,
        None => {
            spec.default_separator()
                .ok_or_else(|| CliError::Usage(format!("grid {dims:?} has no interior plane")))?
                .0
        }
    };
    let extent = *spec
        .dims
        .get(axis)
        .ok_or_else(|| CliError::Usage(format!("axis {axis} out of range for grid {dims:?}")))?;
    let plane = args.sep_plane.unwrap_or((extent.max(1) - 1) / 2);
    let (operator, separator, problem) = grid_front(&spec, axis, plane)?;
    Ok(GridProblem {
        spec,
        axis,
        plane,
        operator,
        separator,
        front: problem.front,
        graph: problem.graph,
        ordering: problem.ordering,
    })
}

pub fn kernel_front(args: &GenerateArgs, seed: u64) -> Result<KernelMatrix, CliError> {
    let kind = args.kernel.expect("kernel source selected");
    let n = args
        .n
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage("--kernel needs --n ≥ 1".into()))?;
    if !args.shift.is_finite() || !args.jitter.is_finite() || args.jitter < 0.0 {
        return Err(CliError::Usage("--shift and --jitter must be finite, --jitter ≥ 0".into()));
    }
    let points = if args.jitter > 0.0 {
        jittered_points(n, args.jitter, seed)
    } else {
        (0..n).map(|i| i as f64).collect()
    };
    Ok(KernelMatrix::at(points, kind, args.shift))
}

pub fn load_problem(args: &InputArgs, seed: u64) -> Result<Problem, CliError> {
    let (front, graph, echo) = if let Some(path) = &args.front {
        let front = read_matrix_market(path)?.into_dense();
        if !front.is_square() {
            return Err(MmError::NotSquare {
                rows: front.rows(),
                cols: front.cols(),
            }
            .into());
        }
        let graph = match &args.graph {
            None => None,
            Some(g) => {
                let pattern = read_matrix_market(g)?.into_pattern()?;
                let local = match &args.ordering {
                    Some(o) => pattern.induced(&read_ordering(o, front.rows())?)?,
                    None => pattern,
                };
                if local.n() != front.rows() {
                    return Err(CliError::Usage(format!(
                        "graph has {} vertices but the front has {} rows; pass --ordering",
                        local.n(),
                        front.rows()
                    )));
                }
                Some(local)
            }
        };
        let echo = InputEcho::Files {
            front: path.display().to_string(),
            graph: args.graph.as_ref().map(|p| p.display().to_string()),
            ordering: args.ordering.as_ref().map(|p| p.display().to_string()),
            rhs: args.rhs.as_ref().map(|p| p.display().to_string()),
        };
        (Front::Dense(front), graph, echo)
    } else if let Some(dims) = &args.generate.grid {
        let g = generate_grid(&args.generate, &dims.0)?;
        let echo = InputEcho::Grid {
            dims: g.spec.dims.clone(),
            stencil: g.spec.stencil,
            sep_axis: g.axis,
            sep_plane: g.plane,
        };
        (Front::Dense(g.front), Some(g.graph), echo)
    } else {
        let k = kernel_front(&args.generate, seed)?;
        let echo = InputEcho::Kernel {
            kernel: args.generate.kernel.expect("kernel source selected"),
            n: k.points().len(),
            shift: args.generate.shift,
            jitter: args.generate.jitter,
        };
        (Front::Kernel(k), None, echo)
    };

    let n = front.n();
    let rhs = match &args.rhs {
        Some(path) => {
            let b = read_matrix_market(path)?.into_dense();
            if b.shape() != (n, 1) {
                return Err(CliError::Usage(format!(
                    "right-hand side is {}x{}, expected {n}x1",
                    b.rows(),
                    b.cols()
                )));
            }
            b.into_vec()
        }
        None => random_rhs(n, 1, seed).into_vec(),
    };
    Ok(Problem {
        front,
        graph,
        rhs,
        echo,
    })
}

/// One vertex id per non-comment line.
pub fn read_ordering(path: &Path, expected: usize) -> Result<Vec<usize>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let ids = parse_ordering(&text)?;
    if ids.len() != expected {
        return Err(CliError::Usage(format!(
            "{}: {} vertex ids for a front with {expected} rows",
            path.display(),
            ids.len()
        )));
    }
    Ok(ids)
}

pub fn parse_ordering(text: &str) -> Result<Vec<usize>, MmError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('%') && !t.starts_with('#')
        })
        .map(|(k, l)| {
            l.trim().parse().map_err(|_| MmError::Parse {
                line: k + 1,
                message: format!("`{}` is not a vertex id", l.trim()),
            })
        })
        .collect()
}

pub fn ordering_to_string(ids: &[usize]) -> String {
    ids.iter().map(|v| format!("{v}\n")).collect()
}
