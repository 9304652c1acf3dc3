//! Critical points, boundary-aware sublevel merge structure, principal wells,
//! separating saddles and the recursive well/saddle labeling (the maps
//! `x ↦ j(x)` and `x ↦ C_j(x)`), with checks of the boundary hypotheses.

mod critical;
mod hypotheses;
mod merge;
mod sublevel;
mod wells;

pub use critical::{sym_eigen, BoundaryInfo, CriticalPoint, PointKind};
pub use hypotheses::{check_hypotheses, AlignmentCheck, ContactCheck, HypothesisReport};
pub use merge::{Birth, Contact, MergeEvent, MergeStructure};
pub use sublevel::{sublevel_components, NONE};
pub use wells::{BoundaryCase, BoundarySaddle, PrincipalWell, SaddleSets, TieBreak, WellLabel, WellLabeling};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wk_field::{evaluate_on_grid, FieldError, Grid, GridValues, ScalarField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("degenerate critical point at {location:?}: Hessian eigenvalues {eigenvalues:?}")]
    Degenerate { location: Vec<f64>, eigenvalues: Vec<f64> },
    #[error("Newton iteration seeded at {seed:?} did not converge in 50 iterations")]
    NewtonNonConvergence { seed: Vec<f64> },
    #[error("no interior local minimum")]
    NoMinima,
    #[error("minimum {0} left unlabeled after exhausting the separating saddles")]
    UnlabeledMinimum(usize),
    #[error("inconsistent topology: {0}")]
    Inconsistent(String),
}

/// Numerical tolerances. Relative tolerances are scaled by the grid maxima of
/// |∇f|, |Hess f| and the range of f respectively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub grad_rel: f64,
    pub degenerate_rel: f64,
    pub level_rel: f64,
    pub angle: f64,
    pub tangential_pd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { grad_rel: 1e-11, degenerate_rel: 1e-6, level_rel: 1e-9, angle: 1e-3, tangential_pd: 1e-6 }
    }
}

pub fn find_critical_points(
    field: &ScalarField,
    grid: &Grid,
    values: &GridValues,
    tol: &Tolerances,
) -> Result<Vec<CriticalPoint>, TopologyError> {
    let sc = critical::Scales::new(field, grid, values, tol);
    critical::find_critical_points_scaled(field, grid, values, tol, &sc)
}

/// Builds the filtration and attaches to every merge event the interior
/// index-1 critical point found by the witness refinement (within four mesh
/// widths), if any.
pub fn build_merge_structure(grid: &Grid, values: &GridValues, crits: &[CriticalPoint]) -> MergeStructure {
    let mut m = MergeStructure::build(grid, &values.f);
    let r = 4.0 * grid.max_dx();
    for e in &mut m.events {
        let w = grid.coords(e.witness);
        e.refined_saddle = crits
            .iter()
            .filter(|c| c.kind == PointKind::Interior && c.index == 1)
            .map(|c| (c.id, c.location.iter().zip(&w).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()))
            .filter(|&(_, d)| d <= r)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(id, _)| id);
    }
    m
}

pub fn tol_level(values: &GridValues, tol: &Tolerances) -> f64 {
    let lo = values.f.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    tol.level_rel * (hi - lo)
}

pub fn separating_saddles(
    grid: &Grid,
    values: &GridValues,
    merge: &MergeStructure,
    crits: &[CriticalPoint],
    tol_level: f64,
) -> Result<SaddleSets, TopologyError> {
    wells::separating_saddles_impl(grid, &values.f, merge, crits, tol_level)
}

pub fn build_jmap(
    grid: &Grid,
    values: &GridValues,
    crits: &[CriticalPoint],
    sets: &SaddleSets,
    tol_level: f64,
    tie: TieBreak,
) -> Result<WellLabeling, TopologyError> {
    wells::build_jmap_impl(grid, &values.f, crits, sets, tol_level, tie)
}

/// Everything the topology stage produces; serializes with stable field names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Topology {
    pub dimension: usize,
    pub tol_level: f64,
    pub critical_points: Vec<CriticalPoint>,
    pub merge: MergeStructure,
    pub saddles: SaddleSets,
    pub labeling: WellLabeling,
    pub hypotheses: HypothesisReport,
}

impl Topology {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology serializes")
    }

    pub fn point(&self, id: usize) -> &CriticalPoint {
        &self.critical_points[id]
    }
}

/// Runs the whole topology stage.
pub fn analyze(field: &ScalarField, grid: &Grid, tol: &Tolerances, tie: TieBreak) -> Result<Topology, TopologyError> {
    let values = evaluate_on_grid(field, grid)?;
    analyze_with_values(field, grid, &values, tol, tie)
}

pub fn analyze_with_values(
    field: &ScalarField,
    grid: &Grid,
    values: &GridValues,
    tol: &Tolerances,
    tie: TieBreak,
) -> Result<Topology, TopologyError> {
    let crits = find_critical_points(field, grid, values, tol)?;
    let merge = build_merge_structure(grid, values, &crits);
    let tl = tol_level(values, tol);
    let saddles = separating_saddles(grid, values, &merge, &crits, tl)?;
    let labeling = build_jmap(grid, values, &crits, &saddles, tl, tie)?;
    let hypotheses = check_hypotheses(&saddles, &crits, tol.angle, tol.tangential_pd * hessian_scale(&crits));
    Ok(Topology { dimension: grid.dim(), tol_level: tl, critical_points: crits, merge, saddles, labeling, hypotheses })
}

fn hessian_scale(crits: &[CriticalPoint]) -> f64 {
    crits
        .iter()
        .flat_map(|c| c.hessian_eigenvalues.iter().map(|m| m.abs()))
        .fold(0.0, f64::max)
        .max(1e-300)
}
