//! Cut-off profile, saddle cylinders and the 1-D transition profiles across them.

use serde::{Deserialize, Serialize};
use wk_field::{Grid, ScalarField};
use wk_topology::{CriticalPoint, PointKind, Topology};

use crate::QuasimodeError;

/// Quintic smoothstep: 0 below 0, 1 above 1, C² at both seams.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// Cylinder half-lengths. δ₁ is the axial scale (the cylinder spans 2δ₁ on
/// the well side), δ₂ the lateral radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub delta1: f64,
    pub delta2: f64,
}

impl CutoffProfile {
    pub fn new(delta1: f64, delta2: f64) -> Result<Self, QuasimodeError> {
        if !(delta1 > 0.0 && delta2 > 0.0 && delta1.is_finite() && delta2.is_finite()) {
            return Err(QuasimodeError::InvalidProfile(format!("δ₁ = {delta1}, δ₂ = {delta2}")));
        }
        Ok(CutoffProfile { delta1, delta2 })
    }

    /// δ₂ = ⅓ of the smallest distance between saddle points of the labeling
    /// (and from interior saddles to ∂Ω), δ₁ = δ₂/2. With a single saddle on
    /// the boundary, the shortest box side stands in for the distance.
    pub fn from_topology(topology: &Topology, domain: &wk_field::DomainSpec) -> Result<Self, QuasimodeError> {
        let pts = all_saddles(topology);
        let mut dmin = f64::INFINITY;
        for (i, &a) in pts.iter().enumerate() {
            let pa = &topology.point(a).location;
            for &b in &pts[i + 1..] {
                dmin = dmin.min(dist(pa, &topology.point(b).location));
            }
            if topology.point(a).kind == PointKind::Interior {
                dmin = dmin.min(domain.distance_to_boundary(pa));
            }
        }
        if !dmin.is_finite() {
            dmin = (0..domain.dim()).map(|a| domain.upper[a] - domain.lower[a]).fold(f64::INFINITY, f64::min);
        }
        let delta2 = dmin / 3.0;
        Self::new(delta2 / 2.0, delta2)
    }

    /// Even cut-off: 1 on [−δ₁/2, δ₁/2], 0 outside (−δ₁, δ₁).
    pub fn chi(&self, t: f64) -> f64 {
        chi(self.delta1, t)
    }
}

pub(crate) fn chi(delta1: f64, t: f64) -> f64 {
    let half = 0.5 * delta1;
    1.0 - smoothstep((t.abs() - half) / half)
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn all_saddles(topology: &Topology) -> Vec<usize> {
    let mut pts: Vec<usize> = topology.labeling.labels.iter().flat_map(|l| l.j.iter().copied()).collect();
    pts.sort_unstable();
    pts.dedup();
    pts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CylinderCase {
    /// ∇f ≠ 0 on the boundary; profile ∫χ·e^{2μt/h}, μ = ∂ₙf.
    BoundaryNoncritical,
    /// Boundary saddle point; profile ∫χ·e^{−|μ_d|t²/h} on the inner half.
    BoundaryCritical,
    /// Separating saddle in Ω; profile ∫χ·e^{−|μ_d|t²/h} across both halves.
    Interior,
}

/// Neighbourhood of one saddle: |v'| ≤ δ₂ and v_d ∈ [−2δ₁, 0] (boundary) or
/// [−2δ₁, 2δ₁] (interior), in coordinates centred at the saddle with v_d
/// along `axis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub saddle: usize,
    pub case: CylinderCase,
    pub center: Vec<f64>,
    /// Unit v_d direction: outward normal on the boundary; for interior
    /// saddles the negative-curvature eigenvector, pointing away from the
    /// well it is attached to.
    pub axis: Vec<f64>,
    pub delta1: f64,
    pub delta2: f64,
    /// ∂ₙf (boundary non-critical) or |μ_d|.
    pub mu: f64,
    /// Value of f at the saddle.
    pub level: f64,
    /// min f − f(z) over the lateral walls; None in 1-D (no walls).
    pub wall_margin: Option<f64>,
    pub halvings: usize,
}

impl Cylinder {
    /// (v', v_d) of a point.
    pub fn local(&self, p: &[f64]) -> (f64, f64) {
        let d = self.center.len();
        let w: Vec<f64> = (0..d).map(|k| p[k] - self.center[k]).collect();
        let vd = (0..d).map(|k| w[k] * self.axis[k]).sum();
        let vp = if d == 2 { -w[0] * self.axis[1] + w[1] * self.axis[0] } else { 0.0 };
        (vp, vd)
    }

    pub fn axial_range(&self) -> (f64, f64) {
        match self.case {
            CylinderCase::Interior => (-2.0 * self.delta1, 2.0 * self.delta1),
            _ => (-2.0 * self.delta1, 0.0),
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        let (vp, vd) = self.local(p);
        let (lo, hi) = self.axial_range();
        let eps = 1e-12 * (1.0 + self.delta2);
        vp.abs() <= self.delta2 + eps && vd >= lo - eps && vd <= hi + eps
    }

    /// Point with local coordinates (v', v_d).
    pub fn point(&self, vp: f64, vd: f64) -> Vec<f64> {
        let d = self.center.len();
        let mut p: Vec<f64> = (0..d).map(|k| self.center[k] + vd * self.axis[k]).collect();
        if d == 2 {
            p[0] += -vp * self.axis[1];
            p[1] += vp * self.axis[0];
        }
        p
    }

    /// Same cylinder with the axis reversed (interior saddles shared by two wells).
    pub fn flipped(&self) -> Cylinder {
        let mut c = self.clone();
        for a in &mut c.axis {
            *a = -*a;
        }
        c
    }

    /// Tabulated transition profile at this h.
    pub fn profile(&self, h: f64) -> ProfileTable {
        ProfileTable::new(self, h)
    }
}

const TABLE_INTERVALS: usize = 8192;

/// φ(v_d) = ∫_{v_d}^{hi} w / ∫_{lo}^{hi} w by cumulative trapezoid, with
/// w = χ·e^{2μt/h} (boundary non-critical) or χ·e^{−|μ|t²/h}. Exactly 1 for
/// v_d ≤ −δ₁ and exactly 0 for v_d ≥ δ₁ (interior case), since χ vanishes there.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    lo: f64,
    step: f64,
    tail: Vec<f64>,
}

impl ProfileTable {
    fn new(c: &Cylinder, h: f64) -> ProfileTable {
        let (lo, hi) = c.axial_range();
        let step = (hi - lo) / TABLE_INTERVALS as f64;
        let w = |t: f64| {
            let g = match c.case {
                CylinderCase::BoundaryNoncritical => (2.0 * c.mu * t / h).exp(),
                _ => (-c.mu * t * t / h).exp(),
            };
            chi(c.delta1, t) * g
        };
        let ws: Vec<f64> = (0..=TABLE_INTERVALS).map(|k| w(lo + k as f64 * step)).collect();
        let mut tail = vec![0.0; TABLE_INTERVALS + 1];
        for k in (0..TABLE_INTERVALS).rev() {
            tail[k] = tail[k + 1] + 0.5 * step * (ws[k] + ws[k + 1]);
        }
        ProfileTable { lo, step, tail }
    }

    pub fn eval(&self, vd: f64) -> f64 {
        let s = (vd - self.lo) / self.step;
        if s <= 0.0 {
            return 1.0;
        }
        if s >= TABLE_INTERVALS as f64 {
            return 0.0;
        }
        let k = s.floor() as usize;
        let r = s - k as f64;
        let v = self.tail[k] + r * (self.tail[k + 1] - self.tail[k]);
        v / self.tail[0]
    }
}

const MAX_HALVINGS: usize = 6;
const WALL_SAMPLES: usize = 65;

fn case_of(z: &CriticalPoint) -> Result<CylinderCase, QuasimodeError> {
    match z.kind {
        PointKind::Interior => Ok(CylinderCase::Interior),
        PointKind::BoundaryCritical => Ok(CylinderCase::BoundaryCritical),
        PointKind::BoundaryNoncritical => Ok(CylinderCase::BoundaryNoncritical),
        PointKind::Corner => Err(QuasimodeError::UnsupportedSaddle { saddle: z.id, reason: "box corner".into() }),
    }
}

/// Why a cylinder candidate was rejected.
enum Reject {
    /// Lateral wall dips too low, or the floor reaches a lower level: shorten the axis.
    Axial(String),
    /// The cylinder leaves the box or the transverse rise is not positive: narrow it.
    Lateral(String),
}

/// Validated cylinders for every saddle of the labeling, keyed by saddle id.
/// Each cylinder is checked against
/// - lateral walls: min f on {|v'| = δ₂} ≥ f(z) + ¼·(rise of f at v_d = 0, |v'| = δ₂);
/// - floor: min f over the cylinder ≥ f_below + ¼·(f(z) − f_below), where
///   f_below is the highest well level or attached minimum value below f(z);
/// - containment in the closed box;
///
/// halving δ₁ (axial failures) or δ₂ (lateral failures), at most six times.
/// Interior axes are returned unoriented; see [`orient`].
pub fn build_cylinders(
    topology: &Topology,
    field: &ScalarField,
    grid: &Grid,
    profile: &CutoffProfile,
) -> Result<Vec<Cylinder>, QuasimodeError> {
    let d = topology.dimension;
    let tol = topology.labeling.tol_level.max(1e-12);
    let mut out = Vec::new();
    for s in all_saddles(topology) {
        let z = topology.point(s);
        let case = case_of(z)?;
        let (axis, mu) = match case {
            CylinderCase::BoundaryNoncritical => {
                let b = z.boundary.as_ref().ok_or_else(|| QuasimodeError::UnsupportedSaddle {
                    saddle: s,
                    reason: "boundary point without normal data".into(),
                })?;
                (b.normal.clone(), b.normal_derivative)
            }
            CylinderCase::BoundaryCritical => {
                let b = z.boundary.as_ref().ok_or_else(|| QuasimodeError::UnsupportedSaddle {
                    saddle: s,
                    reason: "boundary point without normal data".into(),
                })?;
                (b.normal.clone(), z.mu_d().abs())
            }
            CylinderCase::Interior => (z.hessian_eigenvectors[0].clone(), z.mu_d().abs()),
        };
        let mut below = f64::NEG_INFINITY;
        for l in &topology.labeling.labels {
            if l.j.contains(&s) {
                below = below.max(topology.point(l.minimum).value);
            }
            if l.level < z.value - tol {
                below = below.max(l.level);
            }
        }
        let mut cyl = Cylinder {
            saddle: s,
            case,
            center: z.location.clone(),
            axis,
            delta1: profile.delta1,
            delta2: profile.delta2,
            mu,
            level: z.value,
            wall_margin: None,
            halvings: 0,
        };
        loop {
            match check(&cyl, field, grid, d, below) {
                Ok(margin) => {
                    cyl.wall_margin = margin;
                    break;
                }
                Err(r) => {
                    if cyl.halvings == MAX_HALVINGS {
                        let reason = match r {
                            Reject::Axial(m) | Reject::Lateral(m) => m,
                        };
                        return Err(QuasimodeError::CylinderValidation { saddle: s, reason });
                    }
                    cyl.halvings += 1;
                    match r {
                        Reject::Axial(_) => cyl.delta1 *= 0.5,
                        Reject::Lateral(_) => {
                            cyl.delta2 *= 0.5;
                            cyl.delta1 = cyl.delta1.min(0.5 * cyl.delta2);
                        }
                    }
                }
            }
        }
        out.push(cyl);
    }
    check_overlap(&out, grid)?;
    Ok(out)
}

fn check(c: &Cylinder, field: &ScalarField, grid: &Grid, d: usize, below: f64) -> Result<Option<f64>, Reject> {
    let (lo, hi) = c.axial_range();
    let f = |p: &[f64]| field.value(&p[..d]);
    let inside = |p: &[f64]| grid.domain.contains(p, 1e-9 * (1.0 + grid.domain.diameter()));
    // floor and containment over a lattice of the cylinder
    let lat = if d == 2 { WALL_SAMPLES } else { 1 };
    let mut floor = f64::INFINITY;
    for i in 0..lat {
        let vp = if d == 2 { -c.delta2 + 2.0 * c.delta2 * i as f64 / (lat - 1) as f64 } else { 0.0 };
        for k in 0..WALL_SAMPLES {
            let vd = lo + (hi - lo) * k as f64 / (WALL_SAMPLES - 1) as f64;
            let p = c.point(vp, vd);
            if !inside(&p) {
                return Err(Reject::Lateral(format!("cylinder leaves the domain at {p:?}")));
            }
            floor = floor.min(f(&p));
        }
    }
    if below.is_finite() && floor < below + 0.25 * (c.level - below) {
        return Err(Reject::Axial(format!(
            "f drops to {floor} inside the cylinder (needs ≥ {})",
            below + 0.25 * (c.level - below)
        )));
    }
    if d == 1 {
        return Ok(None);
    }
    let rise = f(&c.point(c.delta2, 0.0)).min(f(&c.point(-c.delta2, 0.0))) - c.level;
    if !(rise > 0.0) {
        return Err(Reject::Lateral(format!("f does not rise across the cylinder (rise {rise})")));
    }
    let mut wall = f64::INFINITY;
    for side in [-1.0, 1.0] {
        for k in 0..WALL_SAMPLES {
            let vd = lo + (hi - lo) * k as f64 / (WALL_SAMPLES - 1) as f64;
            wall = wall.min(f(&c.point(side * c.delta2, vd)));
        }
    }
    let margin = wall - c.level;
    if margin < 0.25 * rise {
        return Err(Reject::Axial(format!("lateral wall reaches f(z) + {margin} (needs ≥ {})", 0.25 * rise)));
    }
    Ok(Some(margin))
}

fn check_overlap(cyls: &[Cylinder], grid: &Grid) -> Result<(), QuasimodeError> {
    let d = grid.dim();
    for node in 0..grid.node_count() {
        let p = grid.coords(node);
        let mut hit: Option<usize> = None;
        for c in cyls {
            if c.contains(&p[..d]) {
                if let Some(a) = hit {
                    return Err(QuasimodeError::CylinderOverlap { a, b: c.saddle });
                }
                hit = Some(c.saddle);
            }
        }
    }
    Ok(())
}

/// Orients an interior cylinder for the well with node set `well` (sorted
/// grid node ids): the well side is v_d < 0. Boundary cylinders keep the
/// outward normal.
pub fn orient(c: &Cylinder, grid: &Grid, well: &[usize]) -> Result<Cylinder, QuasimodeError> {
    if c.case != CylinderCase::Interior {
        return Ok(c.clone());
    }
    let d = grid.dim();
    let side = |s: f64| {
        let p = c.point(0.0, s * c.delta1);
        well.binary_search(&grid.nearest_node(&p[..d])).is_ok()
    };
    match (side(-1.0), side(1.0)) {
        (true, false) => Ok(c.clone()),
        (false, true) => Ok(c.flipped()),
        _ => Err(QuasimodeError::Orientation { saddle: c.saddle }),
    }
}
