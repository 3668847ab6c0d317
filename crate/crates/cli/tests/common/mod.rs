#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use clap::Parser;
use hodlrkit::graph::SparsePattern;
use hodlrkit::matrix::DenseMatrix;
use hodlrkit_cli::mmio::{dense_to_string, pattern_to_string, write_string};
use hodlrkit_cli::{execute, Cli, Outcome};
use serde_json::Value;

pub fn run(args: &[&str]) -> Outcome {
    try_run(args).unwrap_or_else(|e| panic!("{args:?} failed: {e}"))
}

pub fn try_run(args: &[&str]) -> Result<Outcome, hodlrkit_cli::CliError> {
    let cli = Cli::try_parse_from(std::iter::once("hodlrkit").chain(args.iter().copied()))
        .unwrap_or_else(|e| panic!("{args:?} rejected: {e}"));
    execute(&cli)
}

pub fn json(outcome: &Outcome) -> Value {
    serde_json::to_value(&outcome.report).unwrap()
}

fn validator() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
        let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        jsonschema::validator_for(&schema).expect("schema compiles")
    })
}

/// Validation errors of `report` against the shipped schema.
pub fn schema_errors(report: &Value) -> Vec<String> {
    validator()
        .iter_errors(report)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect()
}

pub fn assert_schema_valid(report: &Value) {
    let errors = schema_errors(report);
    assert!(errors.is_empty(), "schema violations: {errors:#?}\n{report:#}");
}

pub fn write_dense(dir: &Path, name: &str, m: &DenseMatrix) -> PathBuf {
    let p = dir.join(name);
    write_string(&p, &dense_to_string(m)).unwrap();
    p
}

pub fn write_pattern(dir: &Path, name: &str, g: &SparsePattern) -> PathBuf {
    let p = dir.join(name);
    write_string(&p, &pattern_to_string(g)).unwrap();
    p
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Symmetric matrix equal to `diag` on the diagonal and `block`/`blockᵀ` in
/// the off-diagonal corners of a `[0, m) × [m, m + n)` split.
pub fn two_by_two(diag: f64, block: &DenseMatrix) -> DenseMatrix {
    let (m, n) = block.shape();
    let mut a = DenseMatrix::identity(m + n).scaled(diag);
    for i in 0..m {
        for j in 0..n {
            a[(i, m + j)] = block[(i, j)];
            a[(m + j, i)] = block[(i, j)];
        }
    }
    a
}
