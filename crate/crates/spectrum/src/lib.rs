//! Dirichlet Witten Laplacian on a box grid and its smallest eigenvalues.
//!
//! The operator is assembled from its quadratic form
//! Q(ψ) = Σ_edges (h²/Δx²)·e^{−2f(mid)/h}·(u_b − u_a)², u = e^{f/h}ψ,
//! which keeps it exactly symmetric and positive semidefinite on the grid;
//! the node-sampled stencil is available as [`Stencil::Pointwise`].

mod bidiag;
pub mod dump;
mod factor;
mod lanczos;
mod operator;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wk_field::{evaluate_on_grid, FieldError, Grid, ScalarField};

pub use factor::BandedFactor;
pub use operator::{assemble_factorized, assemble_pointwise, edges, quadratic_form, Edge, SparseSymmetricOperator, Stencil};

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("h must be positive and finite, got {0}")]
    InvalidH(f64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("e^{{±f/h}} leaves the floating-point range at h = {h}")]
    Overflow { h: f64 },
    #[error("factorization failed at pivot {pivot} (value {value:e})")]
    Factorization { pivot: usize, value: f64 },
    #[error("the operator carries no positive defect vector (pointwise stencil); use the dense method")]
    NoPositiveVector,
    #[error("Lanczos did not converge after {restarts} extensions")]
    NoConvergence { restarts: usize },
    #[error("requested {k} eigenvalues of an operator of size {n}")]
    TooMany { k: usize, n: usize },
    #[error("dense solve refused for N = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },
    #[error("bisection requires a 1-D factorized operator")]
    Unsupported,
    #[error("{0}")]
    Internal(String),
    #[error("dump: {0}")]
    Dump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A discretized operator together with the edge form it came from.
#[derive(Debug, Clone)]
pub struct WittenOperator {
    pub op: SparseSymmetricOperator,
    pub edges: Vec<Edge>,
    pub dim: usize,
}

impl WittenOperator {
    pub fn quadratic_form(&self, psi: &[f64]) -> f64 {
        quadratic_form(&self.edges, self.op.h, psi)
    }
}

/// Assembles the Dirichlet operator on the interior nodes of `grid`.
pub fn assemble(field: &ScalarField, grid: &Grid, h: f64, stencil: Stencil) -> Result<WittenOperator, SpectrumError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(SpectrumError::InvalidH(h));
    }
    let values = evaluate_on_grid(field, grid)?;
    let edges = edges(field, grid, &values.f, h);
    let op = match stencil {
        Stencil::Factorized => assemble_factorized(grid, &edges, &values.f, h)?,
        Stencil::Pointwise => assemble_pointwise(grid, &values.grad_sq, &values.lap, h),
    };
    Ok(WittenOperator { op, edges, dim: grid.dim() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Full symmetric eigensolve; absolute accuracy ≈ ε‖A‖.
    Dense,
    /// Shift 0, banded factorization, Lanczos on A⁻¹, refined by inverse iteration.
    #[default]
    ShiftInvertLanczos,
    /// 1-D only: bidiagonal bisection, relative accuracy for every eigenvalue.
    Bisection,
}

pub const DENSE_LIMIT: usize = 6000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapReport {
    /// Largest λ_{i+1}/λ_i among the returned eigenvalues and its position (1-based i).
    pub ratio: f64,
    pub index: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub h: f64,
    pub method: Method,
    pub eigenvalues: Vec<f64>,
    /// ‖Av − λv‖/(‖A‖·‖v‖) per pair (NaN when no vector was computed).
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub norm: f64,
    /// Eigenvalues below this are not certified by the method.
    pub floor: f64,
    pub gap: Option<GapReport>,
    pub lanczos_steps: Option<usize>,
}

fn residual(op: &SparseSymmetricOperator, lambda: f64, v: &[f64]) -> f64 {
    let av = op.mul(v);
    let r: f64 = av.iter().zip(v).map(|(a, x)| (a - lambda * x).powi(2)).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    r / (op.norm * nv)
}

/// Scales v to unit norm with its largest-magnitude entry positive.
fn normalize(v: &mut [f64]) {
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let big = v.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    let s = if big < 0.0 { -1.0 / nv } else { 1.0 / nv };
    v.iter_mut().for_each(|x| *x *= s);
}

fn gap_report(values: &[f64]) -> Option<GapReport> {
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] > 0.0)
        .map(|(i, w)| GapReport { ratio: w[1] / w[0], index: i + 1 })
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
}

/// Beyond this ratio to an already refined eigenvalue, unshifted inverse
/// iteration cannot see λ_i: an ε-sized overlap with the small eigenvector
/// contributes ε²/λ_small to ⟨x, A⁻¹x⟩.
const SHIFT_TRIGGER: f64 = 1e12;
const SHIFT_FRACTION: f64 = 1e-3;

/// Lanczos on A⁻¹, then inverse iteration; pairs far above the ones already
/// refined are recomputed by Lanczos on (A + σI)⁻¹, σ = 10⁻³·λ_i, deflated
/// against those.
fn shift_invert(op: &SparseSymmetricOperator, k: usize, tol: f64) -> Result<(Vec<(f64, Vec<f64>)>, usize), SpectrumError> {
    let fac = BandedFactor::new(op)?;
    let pairs = lanczos::largest(&[], op.n, k, tol, 10 * k + 10, 0x5eed, |x| fac.solve(x))?;
    let mut refined = lanczos::refine(&[], pairs.vectors, 3, 0.0, |x| fac.solve(x));
    refined.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut steps = pairs.steps;
    let mut base = 0;
    while let Some(i) = (base + 1..k).find(|&i| refined[i].0 > SHIFT_TRIGGER * refined[base].0.max(0.0)) {
        let sigma = SHIFT_FRACTION * refined[i].0;
        let shifted = BandedFactor::shifted(op, sigma)?;
        let done: Vec<Vec<f64>> = refined[..i].iter().map(|p| p.1.clone()).collect();
        refined.truncate(i);
        let rest = lanczos::largest(&done, op.n, k - i, tol, 10 * k + 10, 0x5eed + i as u64, |x| shifted.solve(x))?;
        steps += rest.steps;
        let mut again = lanczos::refine(&done, rest.vectors, 3, sigma, |x| shifted.solve(x));
        again.sort_by(|a, b| a.0.total_cmp(&b.0));
        refined.extend(again);
        base = i;
    }
    Ok((refined, steps))
}

/// The `k` smallest eigenvalues (ascending) and, if asked, unit eigenvectors.
/// `tol` is the Lanczos convergence tolerance relative to each Ritz value.
pub fn smallest_eigenpairs(w: &WittenOperator, k: usize, tol: f64, method: Method, vectors: bool) -> Result<SpectrumResult, SpectrumError> {
    let op = &w.op;
    let n = op.n;
    if k == 0 || k >= n {
        return Err(SpectrumError::TooMany { k, n });
    }
    let eps = f64::EPSILON;
    let (values, vecs, steps, floor) = match method {
        Method::Dense => {
            if n > DENSE_LIMIT {
                return Err(SpectrumError::TooLarge { n, limit: DENSE_LIMIT });
            }
            let eig = nalgebra::SymmetricEigen::new(op.to_dense());
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let values: Vec<f64> = idx[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
            let vecs: Vec<Vec<f64>> = idx[..k].iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
            (values, Some(vecs), None, n as f64 * eps * op.norm)
        }
        Method::ShiftInvertLanczos => {
            let (refined, steps) = shift_invert(op, k, tol)?;
            let values = refined.iter().map(|p| p.0).collect();
            let vecs = refined.into_iter().map(|p| p.1).collect();
            (values, Some(vecs), Some(steps), f64::MIN_POSITIVE)
        }
        Method::Bisection => {
            if w.dim != 1 || op.stencil != Stencil::Factorized {
                return Err(SpectrumError::Unsupported);
            }
            let ldl = bidiag::ldl_from_edges(n, &w.edges, op.h);
            let values: Vec<f64> = (0..k).map(|j| bidiag::eigenvalue(&ldl, j, 2.0 * op.norm, 4.0 * eps)).collect();
            let vecs = if vectors {
                Some(shift_invert(op, k, tol)?.0.into_iter().map(|p| p.1).collect())
            } else {
                None
            };
            (values, vecs, None, f64::MIN_POSITIVE)
        }
    };
    let (residuals, eigenvectors) = match vecs {
        Some(mut vs) => {
            vs.iter_mut().for_each(|v| normalize(v));
            let r = values.iter().zip(&vs).map(|(&l, v)| residual(op, l, v)).collect();
            (r, if vectors { Some(vs) } else { None })
        }
        None => (vec![f64::NAN; values.len()], None),
    };
    Ok(SpectrumResult {
        h: op.h,
        method,
        gap: gap_report(&values),
        eigenvalues: values,
        residuals,
        eigenvectors,
        norm: op.norm,
        floor,
        lanczos_steps: steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterCount {
    /// Number of eigenvalues in the small cluster, None when no clear gap.
    pub count: Option<usize>,
    /// λ_{count+1}/λ_count for the reported count.
    pub gap_ratio: Option<f64>,
    /// Largest consecutive ratio among eigenvalues below h·scale.
    pub largest_ratio: Option<f64>,
    pub threshold: f64,
}

pub const CLUSTER_GAP: f64 = 1e3;

/// Counts the exponentially small eigenvalues: the largest n with
/// λ_n ≤ h·scale and λ_{n+1}/λ_n ≥ 10³.
pub fn count_small_cluster(eigenvalues: &[f64], h: f64, scale: f64) -> ClusterCount {
    let threshold = h * scale;
    let mut count = None;
    let mut gap_ratio = None;
    let mut largest: Option<f64> = None;
    for (i, w) in eigenvalues.windows(2).enumerate() {
        if !(w[0] > 0.0) || w[0] > threshold {
            continue;
        }
        let r = w[1] / w[0];
        largest = Some(largest.map_or(r, |m: f64| m.max(r)));
        if r >= CLUSTER_GAP {
            count = Some(i + 1);
            gap_ratio = Some(r);
        }
    }
    ClusterCount { count, gap_ratio, largest_ratio: largest, threshold }
}
