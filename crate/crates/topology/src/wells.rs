//! Principal wells, separating saddles and the recursive j-map.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use wk_field::Grid;

use crate::critical::{CriticalPoint, PointKind};
use crate::merge::{Contact, MergeStructure};
use crate::sublevel::{interior_filter, sublevel_components, NONE};
use crate::TopologyError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalWell {
    /// Interior minima inside the well (critical point ids).
    pub minima: Vec<usize>,
    /// Refined first-boundary-contact level λ; the well is the component of {f < λ}.
    pub level: f64,
    pub contact: Contact,
    /// Critical point the contact was refined to, if any.
    pub refined_contact: Option<usize>,
    pub node_count: usize,
    #[serde(skip)]
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCase {
    /// ∇f ≠ 0, ∂ₙf > 0, non-degenerate local minimum of f|∂Ω.
    NonCritical,
    /// ∇f = 0, boundary saddle point.
    Critical,
    /// Neither classification applies.
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySaddle {
    pub point: usize,
    pub well: usize,
    pub case: BoundaryCase,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleSets {
    /// Interior index-1 points whose two local sublevel sides lie in distinct
    /// global components of {f < f(z)}.
    pub separating: Vec<usize>,
    pub non_separating: Vec<usize>,
    /// Points of ∂C ∩ ∂Ω for the principal wells C.
    pub boundary: Vec<BoundarySaddle>,
    pub wells: Vec<PrincipalWell>,
    /// Contacts that could not be refined to a critical point of f or f|∂Ω.
    pub unresolved: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Lexicographically smallest coordinates.
    #[default]
    LexSmallest,
    LexLargest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellLabel {
    pub minimum: usize,
    /// (k, ℓ): recursion tier and position within the tier, both 1-based.
    pub tier: (usize, usize),
    /// Value of f on j(x).
    pub level: f64,
    pub energy: f64,
    pub j: Vec<usize>,
    /// Minima attaining min f over the well.
    pub argmin: Vec<usize>,
    /// The well is this component of the open sublevel {f < level} (interior nodes).
    pub component: u32,
    pub node_count: usize,
    #[serde(skip)]
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellLabeling {
    pub labels: Vec<WellLabel>,
    pub tol_level: f64,
}

fn coords_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).fold(std::cmp::Ordering::Equal, |o, (x, y)| o.then(x.total_cmp(y)))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// True when a grid node within two index steps of `c` carries `label`, or
/// when a short walk from `c` along a descent direction (±v_d, and the inward
/// normal on ∂Ω) lands in the component.
fn adjacent(grid: &Grid, labels: &[u32], label: u32, c: &CriticalPoint) -> bool {
    let d = grid.dim();
    if grid.nodes_near(&c.location, 2).into_iter().any(|v| labels[v] == label) {
        return true;
    }
    let mut dirs: Vec<Vec<f64>> = vec![c.hessian_eigenvectors[0].clone()];
    dirs.push(dirs[0].iter().map(|x| -x).collect());
    if let Some(b) = &c.boundary {
        dirs.push(b.normal.iter().map(|x| -x).collect());
    }
    let h = grid.max_dx();
    dirs.iter().any(|dir| {
        (1..=12).any(|s| {
            let p: Vec<f64> = (0..d).map(|a| c.location[a] + s as f64 * h * dir[a]).collect();
            grid.domain.contains(&p, 0.0) && labels[grid.nearest_node(&p)] == label
        })
    })
}

/// Depth by which sublevel sets are lowered below a critical level so that
/// grid nodes straddling an off-grid saddle do not bridge the two sides:
/// nodes within √2·Δ of a saddle along its descent axis are excluded.
fn bridge_margin(grid: &Grid, crits: &[CriticalPoint]) -> f64 {
    let mu = crits
        .iter()
        .filter(|c| c.index >= 1 && (c.kind == PointKind::Interior || c.kind == PointKind::BoundaryCritical))
        .map(|c| c.mu_d().abs())
        .fold(0.0, f64::max);
    let h = grid.max_dx();
    mu * h * h
}

struct LevelCache<'a> {
    grid: &'a Grid,
    f: &'a [f64],
    interior: HashMap<u64, Vec<u32>>,
    closed: HashMap<u64, Vec<u32>>,
}

impl<'a> LevelCache<'a> {
    fn new(grid: &'a Grid, f: &'a [f64]) -> Self {
        LevelCache { grid, f, interior: HashMap::new(), closed: HashMap::new() }
    }

    /// Components of {f < level} among interior nodes.
    fn interior(&mut self, level: f64) -> &Vec<u32> {
        let (grid, f) = (self.grid, self.f);
        self.interior.entry(level.to_bits()).or_insert_with(|| sublevel_components(grid, f, level, interior_filter(grid)))
    }

    /// Components of {f < level} in the closed box.
    fn closed(&mut self, level: f64) -> &Vec<u32> {
        let (grid, f) = (self.grid, self.f);
        self.closed.entry(level.to_bits()).or_insert_with(|| sublevel_components(grid, f, level, |_| true))
    }
}

/// Decides whether an interior index-1 point separates two global components
/// of {f < f(z)} in the closed box.
fn is_separating(grid: &Grid, f: &[f64], cache: &mut LevelCache, z: &CriticalPoint) -> bool {
    let d = grid.dim();
    let h = grid.max_dx();
    let level = z.value - z.mu_d().abs() * h * h;
    let labels = cache.closed(level).clone();
    let v = &z.hessian_eigenvectors[0];
    let room = grid.domain.distance_to_boundary(&z.location);
    for mult in [3.0, 6.0, 12.0] {
        let rho = (mult * h).min(0.9 * room);
        let mut side = [NONE; 2];
        for (s, sign) in [1.0, -1.0].iter().enumerate() {
            let p: Vec<f64> = (0..d).map(|a| z.location[a] + sign * rho * v[a]).collect();
            let best = grid
                .nodes_near(&p, 1)
                .into_iter()
                .filter(|&w| f[w] < level)
                .min_by(|&a, &b| f[a].total_cmp(&f[b]));
            if let Some(w) = best {
                side[s] = labels[w];
            }
        }
        if side[0] != NONE && side[1] != NONE {
            return side[0] != side[1];
        }
    }
    false
}

pub(crate) fn separating_saddles_impl(
    grid: &Grid,
    f: &[f64],
    merge: &MergeStructure,
    crits: &[CriticalPoint],
    tol_level: f64,
) -> Result<SaddleSets, TopologyError> {
    let mut cache = LevelCache::new(grid, f);
    let mut separating = Vec::new();
    let mut non_separating = Vec::new();
    for z in crits.iter().filter(|c| c.kind == PointKind::Interior && c.index == 1) {
        if is_separating(grid, f, &mut cache, z) {
            separating.push(z.id);
        } else {
            non_separating.push(z.id);
        }
    }

    let minima: Vec<&CriticalPoint> = crits.iter().filter(|c| c.kind == PointKind::Interior && c.index == 0).collect();
    if minima.is_empty() {
        return Err(TopologyError::NoMinima);
    }
    let h = grid.max_dx();
    let margin = bridge_margin(grid, crits);
    let mut unresolved = Vec::new();
    let mut wells: Vec<PrincipalWell> = Vec::new();
    for m in &minima {
        let node = grid.nearest_node(&m.location);
        let contact = merge
            .contact_of_node(node)
            .ok_or_else(|| TopologyError::Inconsistent(format!("minimum {} never reaches the boundary", m.id)))?;
        let (level, witness) = match contact {
            Contact::BoundaryNode { level, witness } => (level, witness),
            Contact::Merge { level, event } => (level, merge.events[event].witness),
        };
        // refine to the critical point of f or f|∂Ω nearest in level among those
        // within four mesh widths of the witness
        let w = grid.coords(witness);
        let refined = crits
            .iter()
            .filter(|c| c.on_boundary || (c.kind == PointKind::Interior && c.index == 1))
            .filter(|c| dist(&c.location, &w[..grid.dim()]) <= 4.0 * h)
            .min_by(|a, b| (a.value - level).abs().total_cmp(&(b.value - level).abs()));
        let (level, refined) = match refined {
            Some(c) => (c.value, Some(c.id)),
            None => {
                unresolved.push(format!(
                    "boundary contact of minimum {} near node {witness} ({:?}) could not be refined to a critical point of f or f|∂Ω",
                    m.id,
                    &w[..grid.dim()]
                ));
                (level, None)
            }
        };
        let labels = cache.interior(level - margin);
        let label = labels[node];
        if label == NONE {
            return Err(TopologyError::Inconsistent(format!(
                "minimum {} lies above its own contact level {level}",
                m.id
            )));
        }
        if let Some(w) = wells.iter_mut().find(|w| (w.level - level).abs() <= tol_level && {
            let n0 = w.nodes[0];
            cache_label(&mut cache, w.level - margin, n0) == label
        }) {
            w.minima.push(m.id);
            continue;
        }
        let labels = cache.interior(level - margin);
        let nodes: Vec<usize> = (0..grid.node_count()).filter(|&v| labels[v] == label).collect();
        wells.push(PrincipalWell {
            minima: vec![m.id],
            level,
            contact,
            refined_contact: refined,
            node_count: nodes.len(),
            nodes,
        });
    }

    let mut boundary = Vec::new();
    for (wi, w) in wells.iter().enumerate() {
        let labels = cache.interior(w.level - margin).clone();
        let label = labels[w.nodes[0]];
        for c in crits.iter().filter(|c| c.on_boundary && (c.value - w.level).abs() <= tol_level) {
            if !adjacent(grid, &labels, label, c) {
                continue;
            }
            let (case, note) = match c.kind {
                PointKind::BoundaryNoncritical => {
                    let b = c.boundary.as_ref().expect("boundary info");
                    if b.normal_derivative > 0.0 && c.index == 0 && !c.degenerate {
                        (BoundaryCase::NonCritical, None)
                    } else {
                        (
                            BoundaryCase::Unclassified,
                            Some(format!(
                                "∇f ≠ 0 but not a non-degenerate minimum of f|∂Ω with ∂ₙf > 0 (∂ₙf = {}, tangential Hessian {:?})",
                                b.normal_derivative, b.tangential_hessian
                            )),
                        )
                    }
                }
                PointKind::BoundaryCritical if c.index >= 1 => (BoundaryCase::Critical, None),
                PointKind::BoundaryCritical => {
                    (BoundaryCase::Unclassified, Some("∇f = 0 but the point is not a saddle".to_string()))
                }
                PointKind::Corner => (BoundaryCase::Unclassified, Some("contact at a corner of the box".to_string())),
                PointKind::Interior => unreachable!(),
            };
            boundary.push(BoundarySaddle { point: c.id, well: wi, case, note });
        }
    }
    Ok(SaddleSets { separating, non_separating, boundary, wells, unresolved })
}

fn cache_label(cache: &mut LevelCache, level: f64, node: usize) -> u32 {
    cache.interior(level)[node]
}

pub(crate) fn build_jmap_impl(
    grid: &Grid,
    f: &[f64],
    crits: &[CriticalPoint],
    sets: &SaddleSets,
    tol_level: f64,
    tie: TieBreak,
) -> Result<WellLabeling, TopologyError> {
    let mut cache = LevelCache::new(grid, f);
    let margin = bridge_margin(grid, crits);
    let minima: Vec<usize> = sets.wells.iter().flat_map(|w| w.minima.iter().copied()).collect();
    let min_node: HashMap<usize, usize> = minima.iter().map(|&m| (m, grid.nearest_node(&crits[m].location))).collect();

    let argmin_of = |ms: &[usize]| -> Vec<usize> {
        let lo = ms.iter().map(|&m| crits[m].value).fold(f64::INFINITY, f64::min);
        let mut a: Vec<usize> = ms.iter().copied().filter(|&m| crits[m].value <= lo + tol_level).collect();
        a.sort_by(|&p, &q| coords_cmp(&crits[p].location, &crits[q].location));
        a
    };
    let pick = |a: &[usize]| -> usize {
        match tie {
            TieBreak::LexSmallest => a[0],
            TieBreak::LexLargest => *a.last().unwrap(),
        }
    };

    let mut labels: Vec<WellLabel> = Vec::new();
    let mut in_well = vec![false; grid.node_count()];
    for (li, w) in sets.wells.iter().enumerate() {
        for &v in &w.nodes {
            in_well[v] = true;
        }
        let argmin = argmin_of(&w.minima);
        let rep = pick(&argmin);
        let comp = cache.interior(w.level - margin).clone();
        let label = comp[w.nodes[0]];
        let mut j: Vec<usize> = sets.boundary.iter().filter(|b| b.well == li).map(|b| b.point).collect();
        for &s in &sets.separating {
            let z = &crits[s];
            if (z.value - w.level).abs() <= tol_level && adjacent(grid, &comp, label, z) {
                j.push(s);
            }
        }
        j.sort_unstable();
        if j.is_empty() {
            return Err(TopologyError::Inconsistent(format!("principal well of minimum {rep} has no generalized saddle")));
        }
        labels.push(WellLabel {
            minimum: rep,
            tier: (1, li + 1),
            level: w.level,
            energy: w.level - crits[rep].value,
            j,
            argmin,
            component: label,
            node_count: w.nodes.len(),
            nodes: w.nodes.clone(),
        });
    }

    // separating saddles strictly inside the principal wells
    let inner: Vec<usize> = sets
        .separating
        .iter()
        .copied()
        .filter(|&s| {
            let z = &crits[s];
            let v = grid.nearest_node(&z.location);
            sets.wells.iter().any(|w| z.value < w.level - tol_level && w.nodes.binary_search(&v).is_ok())
        })
        .collect();

    let mut kappa_prev = f64::INFINITY;
    let mut tier = 1;
    loop {
        let below: Vec<usize> = inner.iter().copied().filter(|&s| crits[s].value < kappa_prev - tol_level).collect();
        if below.is_empty() {
            break;
        }
        let kappa = below.iter().map(|&s| crits[s].value).fold(f64::NEG_INFINITY, f64::max);
        let at_level: Vec<usize> = inner.iter().copied().filter(|&s| (crits[s].value - kappa).abs() <= tol_level).collect();
        tier += 1;
        let comp = sublevel_components(grid, f, kappa - margin, |v| in_well[v]);
        let mut by_comp: HashMap<u32, Vec<usize>> = HashMap::new();
        for &m in &minima {
            let c = comp[min_node[&m]];
            if c != NONE {
                by_comp.entry(c).or_default().push(m);
            }
        }
        let mut comps: Vec<(u32, Vec<usize>)> = by_comp.into_iter().collect();
        comps.sort_by_key(|(c, _)| *c);
        let labeled: Vec<usize> = labels.iter().map(|l| l.minimum).collect();
        let mut ell = 0;
        for (c, ms) in comps {
            if ms.iter().any(|m| labeled.contains(m)) {
                continue;
            }
            ell += 1;
            let argmin = argmin_of(&ms);
            let rep = pick(&argmin);
            let j: Vec<usize> = at_level.iter().copied().filter(|&s| adjacent(grid, &comp, c, &crits[s])).collect();
            if j.is_empty() {
                return Err(TopologyError::Inconsistent(format!(
                    "sublevel component of minimum {rep} at level {kappa} has no separating saddle on its boundary"
                )));
            }
            let nodes: Vec<usize> = (0..grid.node_count()).filter(|&v| comp[v] == c).collect();
            labels.push(WellLabel {
                minimum: rep,
                tier: (tier, ell),
                level: kappa,
                energy: kappa - crits[rep].value,
                j,
                argmin,
                component: c,
                node_count: nodes.len(),
                nodes,
            });
        }
        kappa_prev = kappa;
    }

    let labeled: Vec<usize> = labels.iter().map(|l| l.minimum).collect();
    if let Some(m) = minima.iter().find(|m| !labeled.contains(m)) {
        return Err(TopologyError::UnlabeledMinimum(*m));
    }
    for l in &labels {
        if !(l.energy > 0.0) {
            return Err(TopologyError::Inconsistent(format!("non-positive well depth for minimum {}", l.minimum)));
        }
        for &z in &l.j {
            if (crits[z].value - l.level).abs() > tol_level {
                return Err(TopologyError::Inconsistent(format!("f is not constant on j({})", l.minimum)));
            }
        }
    }
    Ok(WellLabeling { labels, tol_level })
}

impl WellLabeling {
    pub fn m0(&self) -> usize {
        self.labels.len()
    }

    pub fn label_of(&self, minimum: usize) -> Option<&WellLabel> {
        self.labels.iter().find(|l| l.minimum == minimum)
    }

    /// Checks the structural invariants of the labeling; returns the list of
    /// failures (empty when all hold).
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let ls = &self.labels;
        for l in ls {
            if !(l.energy > 0.0) {
                out.push(format!("E({}) = {} is not positive", l.minimum, l.energy));
            }
        }
        for a in 0..ls.len() {
            for b in a + 1..ls.len() {
                let (x, y) = (&ls[a], &ls[b]);
                if x.j == y.j {
                    out.push(format!("j not injective: {} and {}", x.minimum, y.minimum));
                }
                if x.nodes == y.nodes {
                    out.push(format!("C_j not injective: {} and {}", x.minimum, y.minimum));
                }
                let shared = x.j.iter().any(|z| y.j.contains(z));
                let inter = x.nodes.iter().filter(|v| y.nodes.binary_search(v).is_ok()).count();
                if !shared {
                    let nested = inter == x.nodes.len().min(y.nodes.len()) && x.nodes.len() != y.nodes.len();
                    if inter != 0 && !nested {
                        out.push(format!("wells of {} and {} overlap without nesting", x.minimum, y.minimum));
                    }
                } else if (x.level - y.level).abs() > self.tol_level || inter != 0 {
                    out.push(format!(
                        "{} and {} share a saddle but are not distinct components of one sublevel set",
                        x.minimum, y.minimum
                    ));
                }
            }
        }
        out
    }
}
