//! Edge form of the discrete operator and its compressed-row assembly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wk_field::{Grid, ScalarField};

use crate::SpectrumError;

/// One grid edge touching at least one interior node. The operator's
/// quadratic form is Σ_e (g_b·ψ_b − g_a·ψ_a)², with ψ = 0 on boundary nodes
/// and g = √c·e^{(f_node − f_mid)/h}, c = h²/Δx².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub axis: usize,
    /// Interior numbering of a and b (None on the boundary).
    pub ia: Option<usize>,
    pub ib: Option<usize>,
    pub fa: f64,
    pub fb: f64,
    /// f at the edge midpoint.
    pub fm: f64,
    /// h²/Δx² along the edge's axis.
    pub c: f64,
}

impl Edge {
    pub fn ga(&self, h: f64) -> f64 {
        self.c.sqrt() * ((self.fa - self.fm) / h).exp()
    }

    pub fn gb(&self, h: f64) -> f64 {
        self.c.sqrt() * ((self.fb - self.fm) / h).exp()
    }
}

/// How the potential terms are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    /// A = BᵀB from the edge form; exactly symmetric and positive semidefinite.
    #[default]
    Factorized,
    /// h²·(3/5-point Laplacian) + diag(|∇f|² − h·Δf) sampled at nodes.
    Pointwise,
}

/// Every edge of the grid that touches an interior node, with f sampled at
/// its endpoints and midpoint.
pub fn edges(field: &ScalarField, grid: &Grid, f: &[f64], h: f64) -> Vec<Edge> {
    let d = grid.dim();
    let mut out = Vec::new();
    for a in 0..grid.node_count() {
        for (b, axis) in grid.neighbors(a) {
            if b < a {
                continue;
            }
            let (ia, ib) = (grid.interior_index(a), grid.interior_index(b));
            if ia.is_none() && ib.is_none() {
                continue;
            }
            let (pa, pb) = (grid.coords(a), grid.coords(b));
            let mid: Vec<f64> = (0..d).map(|k| 0.5 * (pa[k] + pb[k])).collect();
            let dx = grid.dx[axis];
            out.push(Edge { a, b, axis, ia, ib, fa: f[a], fb: f[b], fm: field.value(&mid), c: h * h / (dx * dx) });
        }
    }
    out
}

/// Symmetric operator on interior nodes in compressed-row storage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SparseSymmetricOperator {
    pub n: usize,
    pub h: f64,
    pub stencil: Stencil,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
    /// max |A_ij − A_ji| over stored pairs.
    pub symmetry_certificate: f64,
    /// max absolute row sum, an upper bound for the spectral norm.
    pub norm: f64,
    /// Interior node count along each axis; interior index is axis-0 fastest.
    pub shape: Vec<usize>,
    /// Positive vector u and the nonnegative defect t = A·u, each entry of t
    /// computed as a sum of positive terms (factorized stencil only).
    #[serde(skip)]
    pub(crate) positive: Option<(Vec<f64>, Vec<f64>)>,
}

impl SparseSymmetricOperator {
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.val[k] * x[self.col[k]];
            }
            *yi = s;
        });
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.apply(x, &mut y);
        y
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        (self.row_ptr[i]..self.row_ptr[i + 1]).find(|&k| self.col[k] == j).map_or(0.0, |k| self.val[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col[k])] = self.val[k];
            }
        }
        m
    }

    fn from_rows(n: usize, h: f64, stencil: Stencil, shape: Vec<usize>, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            for (j, v) in r {
                col.push(j);
                val.push(v);
            }
            row_ptr.push(col.len());
        }
        let mut op = SparseSymmetricOperator {
            n,
            h,
            stencil,
            row_ptr,
            col,
            val,
            symmetry_certificate: 0.0,
            norm: 0.0,
            shape,
            positive: None,
        };
        let mut cert: f64 = 0.0;
        let mut norm: f64 = 0.0;
        for i in 0..n {
            let mut rs = 0.0;
            for k in op.row_ptr[i]..op.row_ptr[i + 1] {
                cert = cert.max((op.val[k] - op.get(op.col[k], i)).abs());
                rs += op.val[k].abs();
            }
            norm = norm.max(rs);
        }
        op.symmetry_certificate = cert;
        op.norm = norm;
        op
    }
}

fn interior_shape(grid: &Grid) -> Vec<usize> {
    (0..grid.dim()).map(|a| grid.n(a) - 2).collect()
}

/// Assembles A = BᵀB from the edge form.
pub fn assemble_factorized(grid: &Grid, edges: &[Edge], f: &[f64], h: f64) -> Result<SparseSymmetricOperator, SpectrumError> {
    let n = grid.interior_count();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(5); n];
    let mut diag = vec![0.0; n];
    // reference level keeps e^{−(f−m)/h} ≤ 1
    let m = f.iter().cloned().fold(f64::INFINITY, f64::min);
    let u: Vec<f64> = (0..n).map(|i| (-(f[grid.interior_node(i)] - m) / h).exp()).collect();
    let mut t = vec![0.0; n];
    for e in edges {
        let (ga, gb) = (e.ga(h), e.gb(h));
        match (e.ia, e.ib) {
            (Some(i), Some(j)) => {
                diag[i] += ga * ga;
                diag[j] += gb * gb;
                let off = -e.c * ((e.fa + e.fb - 2.0 * e.fm) / h).exp();
                rows[i].push((j, off));
                rows[j].push((i, off));
            }
            (Some(i), None) => {
                diag[i] += ga * ga;
                t[i] += e.c * ((e.fa - 2.0 * e.fm + m) / h).exp();
            }
            (None, Some(j)) => {
                diag[j] += gb * gb;
                t[j] += e.c * ((e.fb - 2.0 * e.fm + m) / h).exp();
            }
            (None, None) => unreachable!(),
        }
    }
    if diag.iter().chain(&u).chain(&t).any(|v| !v.is_finite()) || u.iter().any(|&v| v < f64::MIN_POSITIVE) {
        return Err(SpectrumError::Overflow { h });
    }
    for (i, d) in diag.into_iter().enumerate() {
        rows[i].push((i, d));
    }
    let mut op = SparseSymmetricOperator::from_rows(n, h, Stencil::Factorized, interior_shape(grid), rows);
    op.positive = Some((u, t));
    Ok(op)
}

/// Pointwise stencil: h²·(−Δ_FD) + diag(|∇f|² − h·Δf).
pub fn assemble_pointwise(grid: &Grid, grad_sq: &[f64], lap: &[f64], h: f64) -> SparseSymmetricOperator {
    let n = grid.interior_count();
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let node = grid.interior_node(i);
            let mut r = Vec::with_capacity(5);
            let mut d = grad_sq[node] - h * lap[node];
            for (w, axis) in grid.neighbors(node) {
                let c = h * h / (grid.dx[axis] * grid.dx[axis]);
                d += c;
                if let Some(j) = grid.interior_index(w) {
                    r.push((j, -c));
                }
            }
            r.push((i, d));
            r
        })
        .collect();
    SparseSymmetricOperator::from_rows(n, h, Stencil::Pointwise, interior_shape(grid), rows)
}

/// Σ_e (g_b·ψ_b − g_a·ψ_a)² for ψ on interior nodes.
pub fn quadratic_form(edges: &[Edge], h: f64, psi: &[f64]) -> f64 {
    edges
        .iter()
        .map(|e| {
            let pa = e.ia.map_or(0.0, |i| e.ga(h) * psi[i]);
            let pb = e.ib.map_or(0.0, |j| e.gb(h) * psi[j]);
            (pb - pa) * (pb - pa)
        })
        .sum()
}
