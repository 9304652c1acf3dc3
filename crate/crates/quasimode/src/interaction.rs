//! Interaction matrix of the quasi-modes and projections onto the numeric cluster.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use wk_spectrum::{Edge, SpectrumResult};

use crate::mode::{edge_derivative, QuasiMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrices {
    pub h: f64,
    /// Row/column order of every matrix below.
    pub minima: Vec<usize>,
    /// ⟨dψ_i, dψ_j⟩.
    pub energy_inner: Vec<Vec<f64>>,
    /// S_ij = ⟨dψ_j, dψ_i⟩/‖dψ_i‖.
    pub s: Vec<Vec<f64>>,
    /// D_jj = h^{p_j}·e^{−(f(j(x_j)) − f(x_j))/h}.
    pub d: Vec<f64>,
    pub p: Vec<f64>,
    /// T = S·D⁻¹.
    pub t: Vec<Vec<f64>>,
    pub gram_psi: Vec<Vec<f64>>,
    /// Gram matrix of Θ_i = dψ_i/‖dψ_i‖.
    pub gram_theta: Vec<Vec<f64>>,
    /// Singular values of S, ascending.
    pub singular_values: Vec<f64>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub(crate) fn interaction(qms: &[QuasiMode], edges: &[Edge]) -> InteractionMatrices {
    let m = qms.len();
    let h = qms[0].h;
    let cell = qms[0].cell;
    let mut inner = DMatrix::<f64>::zeros(m, m);
    let mut g = vec![0.0; m];
    for e in edges {
        let mut any = false;
        for (i, q) in qms.iter().enumerate() {
            g[i] = edge_derivative(q, e);
            any |= g[i] != 0.0;
        }
        if !any {
            continue;
        }
        for i in 0..m {
            if g[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                if g[j] != 0.0 {
                    inner[(i, j)] += g[i] * g[j] * cell;
                }
            }
        }
    }
    let norms: Vec<f64> = (0..m).map(|i| inner[(i, i)].sqrt()).collect();
    let s = DMatrix::from_fn(m, m, |i, j| inner[(i, j)] / norms[i]);
    let d: Vec<f64> = qms.iter().map(|q| h.powf(q.p) * (-q.depth / h).exp()).collect();
    let t = DMatrix::from_fn(m, m, |i, j| s[(i, j)] / d[j]);
    let gram_theta = DMatrix::from_fn(m, m, |i, j| inner[(i, j)] / (norms[i] * norms[j]));
    let mut gram_psi = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v: f64 = qms[i].psi.iter().zip(&qms[j].psi).map(|(a, b)| a * b).sum::<f64>() * cell;
            gram_psi[(i, j)] = v;
            gram_psi[(j, i)] = v;
        }
    }
    let mut singular_values: Vec<f64> = s.clone().svd(false, false).singular_values.iter().copied().collect();
    singular_values.sort_by(f64::total_cmp);
    InteractionMatrices {
        h,
        minima: qms.iter().map(|q| q.minimum).collect(),
        energy_inner: rows(&inner),
        s: rows(&s),
        d,
        p: qms.iter().map(|q| q.p).collect(),
        t: rows(&t),
        gram_psi: rows(&gram_psi),
        gram_theta: rows(&gram_theta),
        singular_values,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub minimum: usize,
    /// ‖(1 − π_h)ψ_x‖.
    pub residual: f64,
    /// ‖d_{f,h}ψ_x‖.
    pub energy_norm: f64,
    pub ratio: f64,
    /// 10·‖dψ_x‖/√λ_{m₀+1}, when that eigenvalue is available.
    pub crude_bound: Option<f64>,
    pub crude_bound_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularMatch {
    /// η_j(S)², ascending.
    pub sigma_sq: f64,
    pub lambda: f64,
    /// |η_j² − λ_j|/λ_j.
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ProjectorReport {
    Computed {
        rows: Vec<ProjectionRow>,
        /// Condition number of the Gram matrix of the projected quasi-modes.
        gram_condition: f64,
        singular_match: Vec<SingularMatch>,
    },
    Skipped {
        reason: String,
    },
}

pub(crate) fn projector(
    qms: &[QuasiMode],
    im: &InteractionMatrices,
    spectrum: &SpectrumResult,
    cluster: Option<usize>,
) -> ProjectorReport {
    let m0 = qms.len();
    let Some(vecs) = spectrum.eigenvectors.as_ref() else {
        return ProjectorReport::Skipped { reason: "no eigenvectors in the spectrum result".into() };
    };
    match cluster {
        Some(c) if c == m0 => {}
        Some(c) => {
            return ProjectorReport::Skipped { reason: format!("cluster holds {c} eigenvalues but there are {m0} quasi-modes") }
        }
        None => return ProjectorReport::Skipped { reason: "no spectral gap identifies the cluster".into() },
    }
    if vecs.len() < m0 || spectrum.eigenvalues.len() < m0 {
        return ProjectorReport::Skipped { reason: format!("{} eigenvectors for {m0} quasi-modes", vecs.len()) };
    }
    let root = qms[0].cell.sqrt();
    let next = spectrum.eigenvalues.get(m0).copied();
    let mut projected = Vec::with_capacity(m0);
    let mut rows = Vec::with_capacity(m0);
    for (i, q) in qms.iter().enumerate() {
        // Euclidean coordinates of the L²-normalized ψ
        let u: Vec<f64> = q.psi.iter().map(|v| v * root).collect();
        let mut pu = vec![0.0; u.len()];
        for v in &vecs[..m0] {
            let c: f64 = v.iter().zip(&u).map(|(a, b)| a * b).sum();
            for (p, a) in pu.iter_mut().zip(v) {
                *p += c * a;
            }
        }
        let residual = u.iter().zip(&pu).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let energy_norm = im.energy_inner[i][i].sqrt();
        let crude_bound = next.map(|l| 10.0 * energy_norm / l.sqrt());
        rows.push(ProjectionRow {
            minimum: q.minimum,
            residual,
            energy_norm,
            ratio: residual / energy_norm,
            crude_bound,
            crude_bound_holds: crude_bound.map(|b| residual <= b),
        });
        projected.push(pu);
    }
    let gram = DMatrix::from_fn(m0, m0, |i, j| projected[i].iter().zip(&projected[j]).map(|(a, b)| a * b).sum::<f64>());
    let ev = SymmetricEigen::new(gram).eigenvalues;
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let gram_condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let singular_match = im
        .singular_values
        .iter()
        .zip(&spectrum.eigenvalues)
        .map(|(s, &lambda)| SingularMatch { sigma_sq: s * s, lambda, relative_error: ((s * s - lambda) / lambda).abs() })
        .collect();
    ProjectorReport::Computed { rows, gram_condition, singular_match }
}
