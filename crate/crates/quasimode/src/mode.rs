//! Grid quasi-modes ψ_x = φ_x·e^{−(f−f(x))/h}/Z and their Dirichlet energies.

use serde::{Deserialize, Serialize};
use wk_field::{Grid, NodeKind};
use wk_spectrum::Edge;
use wk_topology::{PointKind, Topology, WellLabel};

use crate::cylinder::{orient, smoothstep, Cylinder, CylinderCase, ProfileTable};
use crate::QuasimodeError;

/// Quasi-mode of one labeled minimum at one h, on interior nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuasiMode {
    pub minimum: usize,
    pub h: f64,
    pub dim: usize,
    /// f(x).
    pub f_min: f64,
    /// f on j(x).
    pub level: f64,
    /// f(j(x)) − f(x).
    pub depth: f64,
    /// ¼ when j(x) has a boundary point with ∇f ≠ 0, else ½.
    pub p: f64,
    /// Energy band above the level over which the collar cut-off decays:
    /// φ = 1 below level + r/2, 0 above level + r.
    pub margin: f64,
    /// Cylinders of j(x), oriented for this well.
    pub cylinders: Vec<Cylinder>,
    /// Z_x·e^{f(x)/h}: trapezoid L² norm of φ·e^{−(f−f(x))/h}.
    pub z_scaled: f64,
    /// ln Z_x.
    pub log_z: f64,
    /// Cell volume of the trapezoid rule (product of mesh widths).
    pub cell: f64,
    /// Interior nodes with φ > 0 (the realization of Ω₁(x)).
    pub support: usize,
    /// Interior nodes with φ = 1 (the realization of Ω₂(x)).
    pub plateau: usize,
    /// Cut-off φ_x on interior nodes.
    #[serde(skip)]
    pub phi: Vec<f64>,
    /// ψ_x on interior nodes, with Σψ²·cell = 1.
    #[serde(skip)]
    pub psi: Vec<f64>,
}

const MARGIN_ITERATIONS: usize = 64;

/// Interior grid node ids of the open region {f < level + r} reachable from
/// `start`, not crossing the far half (v_d ≥ δ₁) of the given cylinders.
fn reach(grid: &Grid, f: &[f64], start: usize, bound: f64, cuts: &[&Cylinder]) -> Vec<bool> {
    let d = grid.dim();
    let blocked = |v: usize| {
        let p = grid.coords(v);
        cuts.iter().any(|c| c.contains(&p[..d]) && c.local(&p[..d]).1 >= c.delta1)
    };
    let mut seen = vec![false; grid.node_count()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for (w, _) in grid.neighbors(v) {
            if !seen[w] && grid.kind(w) == NodeKind::Interior && f[w] < bound && !blocked(w) {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

pub(crate) fn build(
    topology: &Topology,
    label: &WellLabel,
    cylinders: &[Cylinder],
    grid: &Grid,
    f: &[f64],
    h: f64,
) -> Result<QuasiMode, QuasimodeError> {
    let d = grid.dim();
    let x = topology.point(label.minimum);
    let tol = topology.labeling.tol_level.max(1e-12);
    let level = label.level;
    let own: Vec<Cylinder> = label
        .j
        .iter()
        .map(|&z| {
            let c = cylinders.iter().find(|c| c.saddle == z).expect("cylinder for every saddle");
            orient(c, grid, &label.nodes)
        })
        .collect::<Result<_, _>>()?;
    let foreign: Vec<&Cylinder> =
        cylinders.iter().filter(|c| !label.j.contains(&c.saddle) && c.level >= level - tol).collect();

    // initial band: below the next critical value and below the lateral walls
    let next = topology
        .critical_points
        .iter()
        .map(|c| c.value)
        .filter(|&v| v > level + tol)
        .fold(f64::INFINITY, f64::min);
    let mut r = if next.is_finite() { 0.9 * (next - level) } else { label.energy };
    for c in &own {
        if let Some(m) = c.wall_margin {
            r = r.min(m);
        }
    }

    let start = grid.nearest_node(&x.location);
    if grid.kind(start) != NodeKind::Interior {
        return Err(QuasimodeError::NoMargin { minimum: label.minimum, reason: "minimum sits on a boundary node".into() });
    }
    let cuts: Vec<&Cylinder> = own.iter().filter(|c| c.case == CylinderCase::Interior).collect();
    let in_own = |p: &[f64]| own.iter().any(|c| c.contains(p));
    let mut region = Vec::new();
    let mut converged = false;
    for _ in 0..MARGIN_ITERATIONS {
        region = reach(grid, f, start, level + r, &cuts);
        // shrink r until the region keeps off foreign cylinders and touches
        // the boundary only inside its own cylinders
        let mut lowest = f64::INFINITY;
        for v in (0..grid.node_count()).filter(|&v| region[v]) {
            let p = grid.coords(v);
            if foreign.iter().any(|c| c.contains(&p[..d])) {
                lowest = lowest.min(f[v]);
            }
            for (w, _) in grid.neighbors(v) {
                if grid.kind(w) == NodeKind::Boundary && f[w] < level + r {
                    let q = grid.coords(w);
                    if !in_own(&q[..d]) {
                        lowest = lowest.min(f[w]);
                    }
                }
            }
        }
        if !lowest.is_finite() {
            converged = true;
            break;
        }
        r = lowest - level;
        if r <= tol {
            return Err(QuasimodeError::NoMargin {
                minimum: label.minimum,
                reason: format!("the sublevel set of level {level} reaches the boundary or a foreign saddle"),
            });
        }
    }
    if !converged {
        return Err(QuasimodeError::NoMargin { minimum: label.minimum, reason: "energy band did not settle".into() });
    }
    // the region must not hold minima outside the well
    for m in topology.critical_points.iter().filter(|c| c.kind == PointKind::Interior && c.index == 0) {
        let v = grid.nearest_node(&m.location);
        if region[v] && label.nodes.binary_search(&v).is_err() {
            return Err(QuasimodeError::Leak { minimum: label.minimum, other: m.id });
        }
    }

    let tables: Vec<ProfileTable> = own.iter().map(|c| c.profile(h)).collect();
    let n = grid.interior_count();
    let mut phi = vec![0.0; n];
    for (k, out) in phi.iter_mut().enumerate() {
        let v = grid.interior_node(k);
        if !region[v] {
            continue;
        }
        let p = grid.coords(v);
        let mut val = 1.0 - smoothstep((f[v] - level - 0.5 * r) / (0.5 * r));
        for (c, t) in own.iter().zip(&tables) {
            if c.contains(&p[..d]) {
                val *= t.eval(c.local(&p[..d]).1);
            }
        }
        *out = val;
    }
    let cell: f64 = grid.dx.iter().product();
    let mut psi: Vec<f64> = (0..n).map(|k| phi[k] * (-(f[grid.interior_node(k)] - x.value) / h).exp()).collect();
    let z2: f64 = psi.iter().map(|v| v * v).sum::<f64>() * cell;
    let z_scaled = z2.sqrt();
    for v in &mut psi {
        *v /= z_scaled;
    }
    let has_noncritical = own.iter().any(|c| c.case == CylinderCase::BoundaryNoncritical);
    Ok(QuasiMode {
        minimum: label.minimum,
        h,
        dim: d,
        f_min: x.value,
        level,
        depth: label.energy,
        p: if has_noncritical { 0.25 } else { 0.5 },
        margin: r,
        cylinders: own,
        z_scaled,
        log_z: z_scaled.ln() - x.value / h,
        cell,
        support: phi.iter().filter(|&&v| v > 0.0).count(),
        plateau: phi.iter().filter(|&&v| v == 1.0).count(),
        phi,
        psi,
    })
}

/// Laplace asymptotics of the normalization, Z_x·e^{f(x)/h} ≈
/// (πh)^{d/4}·(Σ_q det Hess f(q)^{−½})^{½} over the minima q attaining min f on the well.
pub fn laplace_normalization(topology: &Topology, minimum: usize, h: f64) -> Option<f64> {
    let l = topology.labeling.label_of(minimum)?;
    let s: f64 = l.argmin.iter().map(|&q| topology.point(q).det_hessian().powf(-0.5)).sum();
    Some((std::f64::consts::PI * h).powf(topology.dimension as f64 / 4.0) * s.sqrt())
}

/// d_{f,h}ψ on one edge: √c·e^{−(f_mid − f(x))/h}·(φ_b − φ_a)/Z̃.
/// Zero exactly when φ does not change across the edge.
pub(crate) fn edge_derivative(qm: &QuasiMode, e: &Edge) -> f64 {
    let pa = e.ia.map_or(0.0, |i| qm.phi[i]);
    let pb = e.ib.map_or(0.0, |j| qm.phi[j]);
    let dphi = pb - pa;
    if dphi == 0.0 {
        return 0.0;
    }
    e.c.sqrt() * (-(e.fm - qm.f_min) / qm.h).exp() * dphi / qm.z_scaled
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderEnergy {
    pub saddle: usize,
    pub energy: f64,
}

/// ‖d_{f,h}ψ_x‖² and where it sits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub minimum: usize,
    pub total: f64,
    /// Edges whose midpoint lies in a cylinder of j(x).
    pub cylinders: Vec<CylinderEnergy>,
    /// Everything else: the collar where φ decays with f.
    pub collar: f64,
}

impl EnergyBreakdown {
    pub fn collar_fraction(&self) -> f64 {
        self.collar / self.total
    }
}

/// Edge-form energy; identical to the operator's quadratic form applied to ψ
/// (times the cell volume), hence bounded below by its smallest eigenvalue.
pub(crate) fn energy(qm: &QuasiMode, grid: &Grid, edges: &[Edge]) -> EnergyBreakdown {
    let d = grid.dim();
    let mut cyl = vec![0.0; qm.cylinders.len()];
    let mut collar = 0.0;
    for e in edges {
        let g = edge_derivative(qm, e);
        if g == 0.0 {
            continue;
        }
        let w = g * g * qm.cell;
        let (pa, pb) = (grid.coords(e.a), grid.coords(e.b));
        let mid: Vec<f64> = (0..d).map(|k| 0.5 * (pa[k] + pb[k])).collect();
        match qm.cylinders.iter().position(|c| c.contains(&mid)) {
            Some(i) => cyl[i] += w,
            None => collar += w,
        }
    }
    let total = cyl.iter().sum::<f64>() + collar;
    EnergyBreakdown {
        minimum: qm.minimum,
        total,
        cylinders: qm.cylinders.iter().zip(cyl).map(|(c, energy)| CylinderEnergy { saddle: c.saddle, energy }).collect(),
        collar,
    }
}
