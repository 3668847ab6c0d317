//! Full (unrestarted) GMRES with left preconditioning.

use log::{debug, warn};
use serde::Serialize;
use thiserror::Error;

use crate::hodlr::{HodlrError, HodlrFactorization};
use crate::lowrank::BlockAccessor;
use crate::matrix::{dot, norm2};

pub const DEFAULT_GMRES_TOL: f64 = 1e-10;
pub const DEFAULT_GMRES_MAX_ITER: usize = 1000;

/// Multiplier on `tol` that the unpreconditioned residual must meet before a
/// run is declared converged.
pub const TRUE_RESIDUAL_SLACK: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KrylovError {
    #[error("operator has dimension {expected} but the right-hand side has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid GMRES config: {0}")]
    InvalidConfig(String),
    #[error("right-hand side contains non-finite values")]
    NonFinite,
    #[error("preconditioner failed: {0}")]
    Preconditioner(#[from] HodlrError),
}

/// Square linear map `x ↦ A·x`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
}

/// Exact product with a block accessor.
pub struct AccessorOperator<'a, A: BlockAccessor + ?Sized>(pub &'a A);

impl<A: BlockAccessor + ?Sized> LinearOperator for AccessorOperator<'_, A> {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.0.nrows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (o, a) in out.iter_mut().zip(self.0.col(j)) {
                    *o += xj * a;
                }
            }
        }
        out
    }
}

/// Elementwise division by the diagonal of a front.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalPreconditioner {
    diagonal: Vec<f64>,
    replaced: Vec<usize>,
}

impl DiagonalPreconditioner {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.diagonal).map(|(v, d)| v / d).collect()
    }

    /// Indices whose zero diagonal was replaced by 1.
    pub fn replaced_zeros(&self) -> &[usize] {
        &self.replaced
    }

    pub fn has_replacements(&self) -> bool {
        !self.replaced.is_empty()
    }
}

/// Jacobi preconditioner; zero diagonal entries act as the identity.
pub fn diagonal_preconditioner(front: &(impl BlockAccessor + ?Sized)) -> DiagonalPreconditioner {
    let n = front.nrows().min(front.ncols());
    let mut replaced = Vec::new();
    let diagonal = (0..n)
        .map(|i| {
            let d = front.entry(i, i);
            if d == 0.0 {
                replaced.push(i);
                1.0
            } else {
                d
            }
        })
        .collect();
    if !replaced.is_empty() {
        warn!("{} zero diagonal entries replaced by 1 in the diagonal preconditioner", replaced.len());
    }
    DiagonalPreconditioner { diagonal, replaced }
}

pub enum Preconditioner<'a> {
    None,
    Diagonal(DiagonalPreconditioner),
    Hodlr(&'a HodlrFactorization),
    Custom(Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + 'a>),
}

impl Preconditioner<'_> {
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>, KrylovError> {
        Ok(match self {
            Preconditioner::None => x.to_vec(),
            Preconditioner::Diagonal(d) => d.apply(x),
            Preconditioner::Hodlr(f) => f.solve_vec(x)?,
            Preconditioner::Custom(f) => f(x),
        })
    }
}

pub struct GmresConfig<'a> {
    pub tol: f64,
    pub max_iter: usize,
    pub preconditioner: Preconditioner<'a>,
}

impl Default for GmresConfig<'_> {
    fn default() -> Self {
        Self {
            tol: DEFAULT_GMRES_TOL,
            max_iter: DEFAULT_GMRES_MAX_ITER,
            preconditioner: Preconditioner::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    /// The Krylov space became invariant; the iterate is exact in it.
    HappyBreakdown,
    MaxIterations,
    /// The basis collapsed but the true residual is still above target.
    Breakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmresResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Relative preconditioned residual after each iteration.
    pub residual_history: Vec<f64>,
    /// `‖b − A·x‖ / ‖b‖` for the returned `x`.
    pub true_residual: f64,
    pub stop: StopReason,
}

/// Left-preconditioned GMRES from a zero initial guess.
///
/// The iteration targets `‖M⁻¹(b − A·x)‖ ≤ tol·‖M⁻¹b‖`. Once that holds, the
/// unpreconditioned residual is checked every iteration and the run only
/// counts as converged when `‖b − A·x‖ ≤ 10·tol·‖b‖`.
pub fn gmres(
    op: &(impl LinearOperator + ?Sized),
    b: &[f64],
    cfg: &GmresConfig<'_>,
) -> Result<GmresResult, KrylovError> {
    let n = op.dim();
    if b.len() != n {
        return Err(KrylovError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    if !(cfg.tol > 0.0 && cfg.tol < 1.0) {
        return Err(KrylovError::InvalidConfig(format!("tol must lie in (0, 1), got {}", cfg.tol)));
    }
    if cfg.max_iter == 0 {
        return Err(KrylovError::InvalidConfig("max_iter must be at least 1".into()));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(KrylovError::NonFinite);
    }
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(GmresResult {
            x: vec![0.0; n],
            iterations: 0,
            converged: true,
            residual_history: Vec::new(),
            true_residual: 0.0,
            stop: StopReason::Converged,
        });
    }

    let r0 = cfg.preconditioner.apply(b)?;
    let beta = norm2(&r0);
    let mut basis: Vec<Vec<f64>> = vec![r0.iter().map(|v| v / beta).collect()];
    // Column j of the Hessenberg matrix, rotated in place.
    let mut h_cols: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = vec![beta];
    let mut history = Vec::new();
    let true_residual = |x: &[f64]| {
        let ax = op.apply(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        norm2(&r) / b_norm
    };

    let mut stop = StopReason::MaxIterations;
    let mut x = vec![0.0; n];
    let mut true_res = 1.0;
    for j in 0..cfg.max_iter {
        let mut w = cfg.preconditioner.apply(&op.apply(&basis[j]))?;
        let w_norm0 = norm2(&w);
        let mut h = vec![0.0; j + 2];
        for (i, v) in basis.iter().enumerate() {
            let hij = dot(v, &w);
            h[i] = hij;
            for (wk, vk) in w.iter_mut().zip(v) {
                *wk -= hij * vk;
            }
        }
        let mut w_norm = norm2(&w);
        if w_norm < w_norm0 / std::f64::consts::SQRT_2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                h[i] += c;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= c * vk;
                }
            }
            w_norm = norm2(&w);
        }
        h[j + 1] = w_norm;

        for i in 0..j {
            let (a, bb) = (h[i], h[i + 1]);
            h[i] = cs[i] * a + sn[i] * bb;
            h[i + 1] = -sn[i] * a + cs[i] * bb;
        }
        let (c, s) = givens(h[j], h[j + 1]);
        h[j] = c * h[j] + s * h[j + 1];
        h[j + 1] = 0.0;
        cs.push(c);
        sn.push(s);
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s * gj);
        h_cols.push(h);

        let rel = g[j + 1].abs() / beta;
        history.push(rel);
        let collapsed = w_norm <= 1e-14 * w_norm0.max(f64::MIN_POSITIVE);

        if rel <= cfg.tol || collapsed {
            x = assemble(&basis, &h_cols, &g);
            true_res = true_residual(&x);
            if true_res <= TRUE_RESIDUAL_SLACK * cfg.tol {
                stop = if collapsed && rel > cfg.tol {
                    StopReason::HappyBreakdown
                } else {
                    StopReason::Converged
                };
                break;
            }
            if collapsed {
                stop = StopReason::Breakdown;
                break;
            }
        }
        if j + 1 == cfg.max_iter {
            x = assemble(&basis, &h_cols, &g);
            true_res = true_residual(&x);
            break;
        }
        basis.push(w.iter().map(|v| v / w_norm).collect());
    }

    let iterations = history.len();
    let converged = matches!(stop, StopReason::Converged | StopReason::HappyBreakdown);
    debug!("gmres: {iterations} iterations, stop {stop:?}, true residual {true_res:.3e}");
    Ok(GmresResult {
        x,
        iterations,
        converged,
        residual_history: history,
        true_residual: true_res,
        stop,
    })
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

/// `x = V·y` with `y` from the rotated upper-triangular system `R·y = g`.
fn assemble(basis: &[Vec<f64>], h_cols: &[Vec<f64>], g: &[f64]) -> Vec<f64> {
    let k = h_cols.len();
    let mut y = g[..k].to_vec();
    for i in (0..k).rev() {
        let mut acc = y[i];
        for (jj, yj) in y.iter().enumerate().take(k).skip(i + 1) {
            acc -= h_cols[jj][i] * yj;
        }
        let d = h_cols[i][i];
        y[i] = if d == 0.0 { 0.0 } else { acc / d };
    }
    let n = basis[0].len();
    let mut x = vec![0.0; n];
    for (v, yi) in basis.iter().zip(&y) {
        for (xk, vk) in x.iter_mut().zip(v) {
            *xk += yi * vk;
        }
    }
    x
}
