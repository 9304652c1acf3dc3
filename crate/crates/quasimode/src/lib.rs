//! Quasi-modes built from e^{−f/h} and the well/saddle labeling: one per
//! labeled minimum, cut off with 1-D transition profiles across a cylinder
//! around each saddle of j(x) and by a level-set collar elsewhere. Also the
//! interaction matrix, projections onto the numeric cluster, and two
//! standalone checks (localization identity, singular-value inequality).

mod checks;
mod cylinder;
mod interaction;
mod mode;

use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;
use wk_field::{evaluate_on_grid, FieldError, Grid, ScalarField};
use wk_spectrum::{SpectrumError, SpectrumResult};
use wk_topology::Topology;

pub use checks::{
    fan_excess, fan_inequality_check, ims_identity_check, singular_values, trivial_partition, two_bump_partition,
    Cutoff, FanReport, ImsReport, FAN_SLACK,
};
pub use cylinder::{build_cylinders, orient, smoothstep, CutoffProfile, Cylinder, CylinderCase, ProfileTable};
pub use interaction::{InteractionMatrices, ProjectionRow, ProjectorReport, SingularMatch};
pub use mode::{laplace_normalization, CylinderEnergy, EnergyBreakdown, QuasiMode};

#[derive(Debug, Error)]
pub enum QuasimodeError {
    #[error("hypotheses fail: {0:?}")]
    Hypotheses(Vec<String>),
    #[error("minimum {0} carries no label")]
    UnknownMinimum(usize),
    #[error("invalid cut-off: {0}")]
    InvalidProfile(String),
    #[error("saddle {saddle}: {reason}")]
    UnsupportedSaddle { saddle: usize, reason: String },
    #[error("cylinder of saddle {saddle} rejected after 6 halvings: {reason}")]
    CylinderValidation { saddle: usize, reason: String },
    #[error("cylinders of saddles {a} and {b} overlap")]
    CylinderOverlap { a: usize, b: usize },
    #[error("cannot tell the well side of saddle {saddle}")]
    Orientation { saddle: usize },
    #[error("no energy band for minimum {minimum}: {reason}")]
    NoMargin { minimum: usize, reason: String },
    #[error("support of minimum {minimum} reaches minimum {other} outside its well")]
    Leak { minimum: usize, other: usize },
    #[error("partition of unity: {0}")]
    Partition(String),
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Quasi-mode of one labeled minimum.
pub fn build_quasimode(
    topology: &Topology,
    minimum: usize,
    field: &ScalarField,
    grid: &Grid,
    h: f64,
    profile: &CutoffProfile,
) -> Result<QuasiMode, QuasimodeError> {
    let mut all = build_selected(topology, Some(minimum), field, grid, h, profile)?;
    Ok(all.remove(0))
}

/// Quasi-modes of every labeled minimum, in labeling order.
pub fn build_all(
    topology: &Topology,
    field: &ScalarField,
    grid: &Grid,
    h: f64,
    profile: &CutoffProfile,
) -> Result<Vec<QuasiMode>, QuasimodeError> {
    build_selected(topology, None, field, grid, h, profile)
}

fn build_selected(
    topology: &Topology,
    only: Option<usize>,
    field: &ScalarField,
    grid: &Grid,
    h: f64,
    profile: &CutoffProfile,
) -> Result<Vec<QuasiMode>, QuasimodeError> {
    if !topology.hypotheses.pass() {
        return Err(QuasimodeError::Hypotheses(topology.hypotheses.violations.clone()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(QuasimodeError::Spectrum(SpectrumError::InvalidH(h)));
    }
    let labels: Vec<_> = match only {
        Some(m) => vec![topology.labeling.label_of(m).ok_or(QuasimodeError::UnknownMinimum(m))?],
        None => topology.labeling.labels.iter().collect(),
    };
    let values = evaluate_on_grid(field, grid)?;
    let cylinders = build_cylinders(topology, field, grid, profile)?;
    labels.par_iter().map(|l| mode::build(topology, l, &cylinders, grid, &values.f, h)).collect()
}

fn edges_at(field: &ScalarField, grid: &Grid, h: f64) -> Result<Vec<wk_spectrum::Edge>, QuasimodeError> {
    let values = evaluate_on_grid(field, grid)?;
    Ok(wk_spectrum::edges(field, grid, &values.f, h))
}

/// ‖d_{f,h}ψ_x‖² with its split over the cylinders of j(x) and the collar.
pub fn dirichlet_energy(qm: &QuasiMode, field: &ScalarField, grid: &Grid) -> Result<EnergyBreakdown, QuasimodeError> {
    let edges = edges_at(field, grid, qm.h)?;
    Ok(mode::energy(qm, grid, &edges))
}

/// S, D, T and Gram matrices for quasi-modes built at one h.
pub fn interaction_matrix(qms: &[QuasiMode], field: &ScalarField, grid: &Grid) -> Result<InteractionMatrices, QuasimodeError> {
    let Some(first) = qms.first() else {
        return Err(QuasimodeError::Mismatch("no quasi-modes".into()));
    };
    if qms.iter().any(|q| q.h != first.h || q.psi.len() != grid.interior_count()) {
        return Err(QuasimodeError::Mismatch("quasi-modes differ in h or grid".into()));
    }
    let edges = edges_at(field, grid, first.h)?;
    Ok(interaction::interaction(qms, &edges))
}

/// Projects the quasi-modes onto the span of the first `cluster` numeric
/// eigenvectors; skipped (with the reason) unless `cluster` equals the number
/// of quasi-modes.
pub fn projector_diagnostics(
    qms: &[QuasiMode],
    im: &InteractionMatrices,
    spectrum: &SpectrumResult,
    cluster: Option<usize>,
) -> ProjectorReport {
    interaction::projector(qms, im, spectrum, cluster)
}

pub const QUASIMODE_MAGIC: &[u8; 4] = b"WKQM";

/// ψ vectors on interior nodes in the flat dump layout.
pub fn write_quasimodes(path: &Path, qms: &[QuasiMode]) -> Result<(), QuasimodeError> {
    let n = qms.first().map_or(0, |q| q.psi.len());
    let v: Vec<Vec<f64>> = qms.iter().map(|q| q.psi.clone()).collect();
    Ok(wk_spectrum::dump::write_vectors(path, QUASIMODE_MAGIC, n, &v)?)
}

pub fn read_quasimodes(path: &Path) -> Result<Vec<Vec<f64>>, QuasimodeError> {
    Ok(wk_spectrum::dump::read_vectors(path, QUASIMODE_MAGIC)?)
}
