//! JSON report types. Everything that depends on wall-clock time lives in
//! [`Timings`], so two runs with the same flags differ only there.

use hodlrkit::hodlr::{LevelStats, SolveReport};
use hodlrkit::krylov::{GmresResult, StopReason};
use hodlrkit::lowrank::Scheme;
use serde::Serialize;

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemInfo>,
    pub result: CommandResult,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub scheme: Scheme,
    pub tol: f64,
    pub depth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rank: Option<usize>,
    pub leaf_size: usize,
    pub gmres_tol: f64,
    pub gmres_maxit: usize,
    pub baseline: bool,
    pub threads: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<BlockInfo>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tols: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub depths: Vec<usize>,
    pub input: InputEcho,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum InputEcho {
    Files {
        front: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        graph: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        ordering: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        rhs: Option<String>,
    },
    Grid {
        dims: Vec<usize>,
        stencil: hodlrkit::frontgen::Stencil,
        sep_axis: usize,
        sep_plane: usize,
    },
    Kernel {
        kernel: hodlrkit::frontgen::KernelKind,
        n: usize,
        shift: f64,
        jitter: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemInfo {
    pub n: usize,
    pub has_graph: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph_edges: Option<usize>,
}

/// One off-diagonal block of the HODLR partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockInfo {
    pub level: usize,
    pub index: usize,
    pub lower: bool,
    pub rows: [usize; 2],
    pub cols: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CommandResult {
    Gen(GenResult),
    Factor(FactorResult),
    Solve(SolveResult),
    Gmres(GmresReport),
    StudyRank(StudyRankResult),
    StudyPivots(StudyPivotsResult),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenResult {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator_n: Option<usize>,
    pub files: Vec<String>,
}

/// Rank telemetry for one tree level; time goes to [`Timings::levels`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRanks {
    pub level: usize,
    pub blocks: usize,
    pub max_rank: usize,
    pub mean_rank: f64,
}

impl From<&LevelStats> for LevelRanks {
    fn from(l: &LevelStats) -> Self {
        Self {
            level: l.level,
            blocks: l.blocks,
            max_rank: l.max_rank,
            mean_rank: l.mean_rank,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorResult {
    pub n: usize,
    pub tree_depth: usize,
    pub levels: Vec<LevelRanks>,
    pub max_ranks: Vec<usize>,
}

impl FactorResult {
    pub fn from_report(report: &SolveReport, tree_depth: usize) -> Self {
        Self {
            n: report.n,
            tree_depth,
            levels: report.levels.iter().map(LevelRanks::from).collect(),
            max_ranks: report.max_ranks(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    #[serde(flatten)]
    pub factor: FactorResult,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmresRun {
    pub preconditioner: &'static str,
    pub converged: bool,
    pub iterations: usize,
    pub stop: StopReason,
    pub true_residual: f64,
    pub residual_history: Vec<f64>,
}

impl GmresRun {
    pub fn new(preconditioner: &'static str, r: &GmresResult) -> Self {
        Self {
            preconditioner,
            converged: r.converged,
            iterations: r.iterations,
            stop: r.stop,
            true_residual: r.true_residual,
            residual_history: r.residual_history.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmresReport {
    #[serde(flatten)]
    pub factor: FactorResult,
    pub hodlr: GmresRun,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<GmresRun>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub rank: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BdlrCurve {
    pub tol: f64,
    pub depth: usize,
    pub rank: usize,
    pub skeleton_rows: usize,
    pub skeleton_cols: usize,
    pub curve: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRankResult {
    pub block: BlockInfo,
    pub block_norm: f64,
    pub svd: Vec<CurvePoint>,
    pub bdlr: Vec<BdlrCurve>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PivotRecord {
    pub step: usize,
    pub magnitude: f64,
    pub row: usize,
    pub col: usize,
    pub row_d: Option<usize>,
    pub col_d: Option<usize>,
}

/// Mean d-indices over one quartile of the pivots ranked by magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuartileStats {
    pub count: usize,
    pub mean_row_d: Option<f64>,
    pub mean_col_d: Option<f64>,
    pub mean_d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyPivotsResult {
    pub block: BlockInfo,
    pub pivots: Vec<PivotRecord>,
    pub top_quartile: QuartileStats,
    pub bottom_quartile: QuartileStats,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LevelTime {
    pub level: usize,
    pub seconds: f64,
}

/// Wall-clock seconds. Phase entries absent from a command are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub load: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub low_rank: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaf_lu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schur: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_iterate: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<LevelTime>,
}

impl Timings {
    pub fn record_factor(&mut self, report: &SolveReport) {
        self.low_rank = Some(report.timings.low_rank);
        self.leaf_lu = Some(report.timings.leaf_lu);
        self.schur = Some(report.timings.schur);
        self.factor = Some(report.timings.factor_total);
        self.levels = report
            .levels
            .iter()
            .map(|l| LevelTime {
                level: l.level,
                seconds: l.seconds,
            })
            .collect();
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The report with the timings block dropped, for determinism checks.
    pub fn without_timings(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        v.as_object_mut().expect("object").remove("timings");
        v
    }
}
