//! Command-line flags.

use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use hodlrkit::frontgen::{KernelKind, Stencil};
use hodlrkit::hodlr::DEFAULT_LEAF_SIZE;
use hodlrkit::krylov::{DEFAULT_GMRES_MAX_ITER, DEFAULT_GMRES_TOL};
use hodlrkit::lowrank::{CompressionConfig, Scheme};

use crate::CliError;

#[derive(Debug, Clone, Parser)]
#[command(name = "hodlrkit", version, about = "HODLR solver experiments with JSON reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate a grid or kernel front and write it as Matrix Market files.
    Gen(GenArgs),
    /// Build the HODLR factorization and report ranks per level.
    Factor(FactorArgs),
    /// Factor and solve one right-hand side.
    Solve(SolveArgs),
    /// GMRES with the HODLR factorization as left preconditioner.
    Gmres(GmresArgs),
    /// SVD and BDLR error-versus-rank curves for one off-diagonal block.
    StudyRank(StudyRankArgs),
    /// Full-pivot LU of one off-diagonal block with the d-index of every pivot.
    StudyPivots(StudyPivotsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Factor(_) => "factor",
            Command::Solve(_) => "solve",
            Command::Gmres(_) => "gmres",
            Command::StudyRank(_) => "study-rank",
            Command::StudyPivots(_) => "study-pivots",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Gen(a) => &a.common,
            Command::Factor(a) => &a.common,
            Command::Solve(a) => &a.common,
            Command::Gmres(a) => &a.common,
            Command::StudyRank(a) => &a.common,
            Command::StudyPivots(a) => &a.common,
        }
    }
}

/// Generated problems: a grid Laplacian front or a 1D kernel matrix.
#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Grid extents, e.g. `9x9` or `9x12x12`.
    #[arg(long, value_parser = parse_dims)]
    pub grid: Option<GridDims>,
    /// `laplacian` or `vector-laplacian`.
    #[arg(long, value_parser = parse_stencil, default_value = "laplacian")]
    pub stencil: Stencil,
    /// Separator axis (`x`, `y`, `z` or 0-2); defaults to the longest axis.
    #[arg(long, value_parser = parse_axis)]
    pub sep_axis: Option<usize>,
    /// Separator plane index along the axis; defaults to the middle plane.
    #[arg(long)]
    pub sep_plane: Option<usize>,
    /// Kernel family: `inv-distance` or `exp-decay`.
    #[arg(long)]
    pub kernel: Option<KernelKind>,
    /// Kernel matrix size.
    #[arg(long, requires = "kernel")]
    pub n: Option<usize>,
    /// Diagonal shift added to the kernel matrix.
    #[arg(long, default_value_t = 2.0)]
    pub shift: f64,
    /// Kernel points are `i + U(-jitter, jitter)`, drawn from `--seed`.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["front", "grid", "kernel"])))]
pub struct InputArgs {
    /// Front matrix (Matrix Market array or coordinate).
    #[arg(long)]
    pub front: Option<PathBuf>,
    /// Sparse graph (Matrix Market coordinate). Front-local unless `--ordering` is given.
    #[arg(long, requires = "front")]
    pub graph: Option<PathBuf>,
    /// Graph vertex id of each front row, one per line.
    #[arg(long, requires = "graph")]
    pub ordering: Option<PathBuf>,
    /// Right-hand side (Matrix Market array, n×1); defaults to a seeded random vector.
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    #[command(flatten)]
    pub generate: GenerateArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompressionArgs {
    /// Off-diagonal compression: `svd`, `aca` or `bdlr`.
    #[arg(long, default_value = "svd")]
    pub scheme: Scheme,
    /// Relative compression tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// BDLR selection depth.
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    /// Cap on every off-diagonal rank.
    #[arg(long)]
    pub max_rank: Option<usize>,
    /// HODLR leaf threshold.
    #[arg(long, default_value_t = DEFAULT_LEAF_SIZE)]
    pub leaf_size: usize,
}

impl Default for CompressionArgs {
    fn default() -> Self {
        Self {
            scheme: Scheme::Svd,
            tol: 1e-8,
            depth: 1,
            max_rank: None,
            leaf_size: DEFAULT_LEAF_SIZE,
        }
    }
}

impl CompressionArgs {
    pub fn config(&self) -> Result<CompressionConfig, CliError> {
        let mut cfg = CompressionConfig::new(self.scheme, self.tol);
        cfg.depth = self.depth;
        if let Some(r) = self.max_rank {
            cfg = cfg.with_max_rank(r);
        }
        cfg.validate()?;
        if self.leaf_size == 0 {
            return Err(CliError::Usage("--leaf-size must be at least 1".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Worker threads for the factorization.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Seed for generated right-hand sides and jittered points.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Default for CommonArgs {
    fn default() -> Self {
        Self {
            threads: 1,
            seed: 0,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["grid", "kernel"])))]
pub struct GenArgs {
    #[command(flatten)]
    pub generate: GenerateArgs,
    /// Directory receiving the Matrix Market files.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FactorArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub compression: CompressionArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub compression: CompressionArgs,
    /// Write the solution as a Matrix Market array file.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GmresArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub compression: CompressionArgs,
    /// GMRES relative residual tolerance.
    #[arg(long, default_value_t = DEFAULT_GMRES_TOL)]
    pub gmres_tol: f64,
    /// GMRES iteration limit.
    #[arg(long = "gmres-maxit", default_value_t = DEFAULT_GMRES_MAX_ITER)]
    pub gmres_maxit: usize,
    /// Also run GMRES with the diagonal (Jacobi) preconditioner.
    #[arg(long)]
    pub baseline: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StudyRankArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub compression: CompressionArgs,
    /// Off-diagonal block as `level,index[,upper|lower]`.
    #[arg(long, value_parser = parse_block, default_value = "0,0")]
    pub block: BlockSpec,
    /// BDLR tolerances; defaults to `--tol`.
    #[arg(long, value_delimiter = ',')]
    pub tols: Vec<f64>,
    /// BDLR depths, one per tolerance or a single shared value; defaults to `--depth`.
    #[arg(long, value_delimiter = ',')]
    pub depths: Vec<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StudyPivotsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub compression: CompressionArgs,
    /// Off-diagonal block as `level,index[,upper|lower]`.
    #[arg(long, value_parser = parse_block, default_value = "0,0")]
    pub block: BlockSpec,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// `index` counts the split nodes of `level` from left to right. The upper
/// block of a node couples its left rows to its right columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSpec {
    pub level: usize,
    pub index: usize,
    pub lower: bool,
}

pub fn parse_block(s: &str) -> Result<BlockSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<usize>().map_err(|_| format!("`{t}` is not a non-negative integer"));
    let lower = match parts.as_slice() {
        [_, _] => false,
        [_, _, "upper"] => false,
        [_, _, "lower"] => true,
        _ => return Err(format!("expected `level,index[,upper|lower]`, got `{s}`")),
    };
    Ok(BlockSpec {
        level: num(parts[0])?,
        index: num(parts[1])?,
        lower,
    })
}

/// Grid extents given as `AxB` or `AxBxC`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridDims(pub Vec<usize>);

pub fn parse_dims(s: &str) -> Result<GridDims, String> {
    s.split(['x', 'X'])
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a grid extent")))
        .collect::<Result<_, _>>()
        .map(GridDims)
}

pub fn parse_axis(s: &str) -> Result<usize, String> {
    match s {
        "x" | "0" => Ok(0),
        "y" | "1" => Ok(1),
        "z" | "2" => Ok(2),
        other => Err(format!("unknown axis `{other}`")),
    }
}

pub fn parse_stencil(s: &str) -> Result<Stencil, String> {
    match s {
        "laplacian" => Ok(Stencil::Laplacian),
        "vector-laplacian" => Ok(Stencil::VectorLaplacian),
        other => Err(format!("unknown stencil `{other}`")),
    }
}
