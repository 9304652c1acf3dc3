//! Newton-refined critical points of f on the closed box, plus critical
//! points of f restricted to the faces and the box corners.

use serde::{Deserialize, Serialize};
use wk_field::{Face, Grid, GridValues, ScalarField};

use crate::{Tolerances, TopologyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    /// ∇f = 0 at an interior point.
    Interior,
    /// ∇f = 0 at a boundary point.
    BoundaryCritical,
    /// ∇f ≠ 0, but the tangential gradient vanishes (critical point of f|∂Ω).
    BoundaryNoncritical,
    /// Corner of the box (non-smooth boundary point).
    Corner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryInfo {
    pub faces: Vec<Face>,
    /// Outward unit normal (bisector at corners).
    pub normal: Vec<f64>,
    pub normal_derivative: f64,
    /// Eigenvalues of the tangential Hessian block (empty in 1-D or at corners).
    pub tangential_hessian: Vec<f64>,
    /// Angle between the normal and the most negative Hessian eigenvector
    /// (boundary critical points of positive index only).
    pub alignment_angle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub id: usize,
    pub location: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    /// Number of negative Hessian eigenvalues; for boundary non-critical
    /// points, the number of negative tangential eigenvalues.
    pub index: usize,
    pub kind: PointKind,
    pub on_boundary: bool,
    /// Ascending.
    pub hessian_eigenvalues: Vec<f64>,
    /// Unit eigenvectors, same order as the eigenvalues.
    pub hessian_eigenvectors: Vec<Vec<f64>>,
    pub boundary: Option<BoundaryInfo>,
    /// Only set for boundary non-critical points whose tangential Hessian is
    /// singular; genuine critical points with a singular Hessian are errors.
    pub degenerate: bool,
}

impl CriticalPoint {
    /// The most negative Hessian eigenvalue.
    pub fn mu_d(&self) -> f64 {
        self.hessian_eigenvalues[0]
    }

    pub fn det_hessian(&self) -> f64 {
        self.hessian_eigenvalues.iter().product()
    }

    pub fn det_tangential(&self) -> f64 {
        self.boundary.as_ref().map_or(1.0, |b| b.tangential_hessian.iter().product())
    }

    pub fn is_boundary_candidate(&self) -> bool {
        self.on_boundary
    }
}

/// Ascending eigenvalues and unit eigenvectors of a symmetric d×d matrix, d ≤ 2.
pub fn sym_eigen(h: &[[f64; 2]; 2], d: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    if d == 1 {
        return (vec![h[0][0]], vec![vec![1.0]]);
    }
    let (a, b, c) = (h[0][0], h[0][1], h[1][1]);
    if b == 0.0 {
        return if a <= c {
            (vec![a, c], vec![vec![1.0, 0.0], vec![0.0, 1.0]])
        } else {
            (vec![c, a], vec![vec![0.0, 1.0], vec![1.0, 0.0]])
        };
    }
    let m = 0.5 * (a + c);
    let r = (0.5 * (a - c)).hypot(b);
    let (mut lo, mut hi) = (m - r, m + r);
    // the smaller-magnitude eigenvalue from the determinant keeps relative accuracy
    let det = a * c - b * b;
    if hi.abs() >= lo.abs() && hi != 0.0 {
        lo = det / hi;
    } else if lo != 0.0 {
        hi = det / lo;
    }
    let vec_for = |mu: f64| -> Vec<f64> {
        let v1 = [b, mu - a];
        let v2 = [mu - c, b];
        let n1 = v1[0].hypot(v1[1]);
        let n2 = v2[0].hypot(v2[1]);
        if n1 >= n2 {
            vec![v1[0] / n1, v1[1] / n1]
        } else {
            vec![v2[0] / n2, v2[1] / n2]
        }
    };
    (vec![lo, hi], vec![vec_for(lo), vec_for(hi)])
}

pub(crate) struct Scales {
    pub tol_grad: f64,
    pub tol_degenerate: f64,
    pub snap: f64,
}

impl Scales {
    pub(crate) fn new(field: &ScalarField, grid: &Grid, values: &GridValues, tol: &Tolerances) -> Self {
        let d = grid.dim();
        let gscale = values.grad_sq.iter().cloned().fold(0.0, f64::max).sqrt().max(1e-300);
        let mut hscale: f64 = 0.0;
        // Hessian scale from a coarse subsample of nodes
        let stride = (grid.node_count() / 4096).max(1);
        for v in (0..grid.node_count()).step_by(stride) {
            let p = grid.coords(v);
            let j = field.jet(&p[..d]);
            for a in 0..d {
                for b in 0..d {
                    hscale = hscale.max(j.hess[a][b].abs());
                }
            }
        }
        Scales {
            tol_grad: tol.grad_rel * gscale,
            tol_degenerate: tol.degenerate_rel * hscale.max(1e-300),
            snap: 1e-10 * grid.domain.diameter(),
        }
    }
}

enum Newton {
    Converged(Vec<f64>),
    Left,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Newton iteration for ∇f = 0 (all axes) or for the tangential derivative on
/// a face (`fixed = Some(face)`).
fn newton(
    field: &ScalarField,
    grid: &Grid,
    x0: &[f64],
    radius: f64,
    fixed: Option<Face>,
    sc: &Scales,
) -> Result<Newton, TopologyError> {
    let d = grid.dim();
    let dom = &grid.domain;
    let mut x = x0.to_vec();
    for _ in 0..50 {
        let j = field.jet(&x);
        let step: Vec<f64> = match fixed {
            None => {
                let g = &j.grad[..d];
                if norm(g) <= sc.tol_grad {
                    return Ok(Newton::Converged(polish(field, x, d, None)));
                }
                if d == 1 {
                    vec![-g[0] / j.hess[0][0]]
                } else {
                    let h = j.hess;
                    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
                    vec![-(h[1][1] * g[0] - h[0][1] * g[1]) / det, -(h[0][0] * g[1] - h[1][0] * g[0]) / det]
                }
            }
            Some(face) => {
                let b = 1 - face.axis;
                if j.grad[b].abs() <= sc.tol_grad {
                    return Ok(Newton::Converged(polish(field, x, d, Some(b))));
                }
                let mut s = vec![0.0; d];
                s[b] = -j.grad[b] / j.hess[b][b];
                s
            }
        };
        if step.iter().any(|s| !s.is_finite()) {
            return Ok(Newton::Left);
        }
        for a in 0..d {
            x[a] += step[a];
        }
        if dist(&x, x0) > radius || !dom.contains(&x, sc.snap) {
            return Ok(Newton::Left);
        }
        if let Some(face) = fixed {
            let b = 1 - face.axis;
            if x[b] <= dom.lower[b] + sc.snap || x[b] >= dom.upper[b] - sc.snap {
                return Ok(Newton::Left);
            }
        }
    }
    Err(TopologyError::NewtonNonConvergence { seed: x0.to_vec() })
}

/// Up to three extra Newton steps, each kept only if it lowers the gradient.
fn polish(field: &ScalarField, mut x: Vec<f64>, d: usize, axis: Option<usize>) -> Vec<f64> {
    let gnorm = |j: &wk_field::Jet| match axis {
        None => norm(&j.grad[..d]),
        Some(b) => j.grad[b].abs(),
    };
    for _ in 0..3 {
        let j = field.jet(&x);
        let g0 = gnorm(&j);
        if g0 == 0.0 {
            break;
        }
        let mut y = x.clone();
        match axis {
            Some(b) => y[b] -= j.grad[b] / j.hess[b][b],
            None if d == 1 => y[0] -= j.grad[0] / j.hess[0][0],
            None => {
                let (g, h) = (j.grad, j.hess);
                let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
                y[0] -= (h[1][1] * g[0] - h[0][1] * g[1]) / det;
                y[1] -= (h[0][0] * g[1] - h[1][0] * g[0]) / det;
            }
        }
        if y.iter().all(|v| v.is_finite()) && gnorm(&field.jet(&y)) < g0 {
            x = y;
        } else {
            break;
        }
    }
    x
}

fn snap(grid: &Grid, x: &mut [f64], tol: f64) -> Vec<Face> {
    let faces = grid.domain.faces_containing(x, tol);
    for f in &faces {
        x[f.axis] = grid.domain.face_coord(*f);
    }
    faces
}

fn classify(
    field: &ScalarField,
    grid: &Grid,
    x: Vec<f64>,
    faces: Vec<Face>,
    face_restricted: bool,
    sc: &Scales,
    tol: &Tolerances,
) -> Result<CriticalPoint, TopologyError> {
    let d = grid.dim();
    let j = field.jet(&x);
    let g = &j.grad[..d];
    let gnorm = norm(g);
    let (eig, vecs) = sym_eigen(&j.hess, d);
    let mut kind = if faces.is_empty() {
        PointKind::Interior
    } else if faces.len() == d && d == 2 {
        PointKind::Corner
    } else if face_restricted && gnorm > sc.tol_grad {
        PointKind::BoundaryNoncritical
    } else if gnorm <= sc.tol_grad {
        PointKind::BoundaryCritical
    } else {
        PointKind::BoundaryNoncritical
    };
    if d == 1 && !faces.is_empty() {
        kind = if gnorm <= sc.tol_grad { PointKind::BoundaryCritical } else { PointKind::BoundaryNoncritical };
    }
    let mut index = eig.iter().filter(|&&m| m < 0.0).count();
    let mut degenerate = false;
    let boundary = if faces.is_empty() {
        None
    } else {
        let mut n = [0.0; 2];
        for f in &faces {
            let fn_ = f.normal();
            n[0] += fn_[0];
            n[1] += fn_[1];
        }
        let nn = n[0].hypot(n[1]);
        let normal: Vec<f64> = n[..d].iter().map(|c| c / nn).collect();
        let dn: f64 = (0..d).map(|a| g[a] * normal[a]).sum();
        let tangential: Vec<f64> = if d == 2 && faces.len() == 1 {
            let b = 1 - faces[0].axis;
            vec![j.hess[b][b]]
        } else {
            vec![]
        };
        let angle = if kind == PointKind::BoundaryCritical && index >= 1 {
            let v = &vecs[0];
            let c: f64 = (0..d).map(|a| v[a] * normal[a]).sum::<f64>().abs().min(1.0);
            Some(c.acos())
        } else {
            None
        };
        if kind == PointKind::BoundaryNoncritical {
            index = tangential.iter().filter(|&&m| m < 0.0).count();
            degenerate = tangential.iter().any(|m| m.abs() < sc.tol_degenerate);
        }
        Some(BoundaryInfo { faces, normal, normal_derivative: dn, tangential_hessian: tangential, alignment_angle: angle })
    };
    if matches!(kind, PointKind::Interior | PointKind::BoundaryCritical) && eig.iter().any(|m| m.abs() < sc.tol_degenerate) {
        return Err(TopologyError::Degenerate { location: x, eigenvalues: eig });
    }
    if kind == PointKind::Corner {
        index = 0;
    }
    let _ = tol;
    Ok(CriticalPoint {
        id: 0,
        value: j.value,
        location: x,
        gradient_norm: gnorm,
        index,
        kind,
        on_boundary: kind != PointKind::Interior,
        hessian_eigenvalues: eig,
        hessian_eigenvectors: vecs,
        boundary,
        degenerate,
    })
}

/// Inserts `p` unless a point of a compatible kind lies within `radius`; on a
/// clash the point with the smaller gradient norm wins.
fn insert_dedup(list: &mut Vec<CriticalPoint>, p: CriticalPoint, radius: f64) {
    for q in list.iter_mut() {
        if dist(&q.location, &p.location) <= radius {
            let q_crit = q.kind != PointKind::BoundaryNoncritical;
            let p_crit = p.kind != PointKind::BoundaryNoncritical;
            if (p_crit && !q_crit) || (p_crit == q_crit && p.gradient_norm < q.gradient_norm) {
                *q = p;
            }
            return;
        }
    }
    list.push(p);
}

pub(crate) fn find_critical_points_scaled(
    field: &ScalarField,
    grid: &Grid,
    values: &GridValues,
    tol: &Tolerances,
    sc: &Scales,
) -> Result<Vec<CriticalPoint>, TopologyError> {
    let d = grid.dim();
    let h = grid.max_dx();
    let radius = 4.0 * h;
    let dedup = 2.0 * h;
    let mut out: Vec<CriticalPoint> = Vec::new();

    // cells where every gradient component changes sign
    let cells: Vec<[usize; 2]> = if d == 1 {
        (0..grid.n(0) - 1).map(|i| [i, 0]).collect()
    } else {
        (0..grid.n(1) - 1).flat_map(|j| (0..grid.n(0) - 1).map(move |i| [i, j])).collect()
    };
    for c in cells {
        let corners: Vec<usize> = if d == 1 {
            vec![c[0], c[0] + 1]
        } else {
            vec![
                grid.node_at(c),
                grid.node_at([c[0] + 1, c[1]]),
                grid.node_at([c[0], c[1] + 1]),
                grid.node_at([c[0] + 1, c[1] + 1]),
            ]
        };
        let changes = (0..d).all(|a| {
            let lo = corners.iter().map(|&v| values.grad[v][a]).fold(f64::INFINITY, f64::min);
            let hi = corners.iter().map(|&v| values.grad[v][a]).fold(f64::NEG_INFINITY, f64::max);
            lo <= 0.0 && hi >= 0.0
        });
        if !changes {
            continue;
        }
        let mut seed = vec![0.0; d];
        for &v in &corners {
            let p = grid.coords(v);
            for a in 0..d {
                seed[a] += p[a] / corners.len() as f64;
            }
        }
        if let Newton::Converged(mut x) = newton(field, grid, &seed, radius, None, sc)? {
            let faces = snap(grid, &mut x, sc.snap);
            let p = classify(field, grid, x, faces, false, sc, tol)?;
            insert_dedup(&mut out, p, dedup);
        }
    }

    if d == 1 {
        for &x in &[grid.domain.lower[0], grid.domain.upper[0]] {
            let faces = grid.domain.faces_containing(&[x], sc.snap);
            let p = classify(field, grid, vec![x], faces, true, sc, tol)?;
            insert_dedup(&mut out, p, dedup);
        }
    } else {
        for face in grid.domain.faces() {
            let a = face.axis;
            let b = 1 - a;
            let fixed_idx = if face.upper { grid.n(a) - 1 } else { 0 };
            let node = |k: usize| {
                let mut idx = [0usize; 2];
                idx[a] = fixed_idx;
                idx[b] = k;
                grid.node_at(idx)
            };
            for k in 0..grid.n(b) - 1 {
                let (v0, v1) = (node(k), node(k + 1));
                if values.grad[v0][b] * values.grad[v1][b] > 0.0 {
                    continue;
                }
                let p0 = grid.coords(v0);
                let p1 = grid.coords(v1);
                let seed = vec![0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])];
                let mut seed = seed;
                seed[a] = grid.domain.face_coord(face);
                if let Newton::Converged(mut x) = newton(field, grid, &seed, radius, Some(face), sc)? {
                    x[a] = grid.domain.face_coord(face);
                    let faces = grid.domain.faces_containing(&x, sc.snap);
                    if faces.len() != 1 {
                        continue;
                    }
                    let p = classify(field, grid, x, faces, true, sc, tol)?;
                    insert_dedup(&mut out, p, dedup);
                }
            }
        }
        for &x in &[grid.domain.lower[0], grid.domain.upper[0]] {
            for &y in &[grid.domain.lower[1], grid.domain.upper[1]] {
                let faces = grid.domain.faces_containing(&[x, y], sc.snap);
                let p = classify(field, grid, vec![x, y], faces, true, sc, tol)?;
                out.push(p);
            }
        }
    }

    out.sort_by(|p, q| {
        p.value
            .total_cmp(&q.value)
            .then_with(|| p.location.iter().zip(&q.location).fold(std::cmp::Ordering::Equal, |o, (a, b)| o.then(a.total_cmp(b))))
    });
    for (i, p) in out.iter_mut().enumerate() {
        p.id = i;
    }
    Ok(out)
}
