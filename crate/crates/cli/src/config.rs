//! Run configuration (JSON, `"schema": 1`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wk_spectrum::Method;

use crate::PipelineError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { method: Method::default(), tol: default_tol() }
    }
}

fn default_tol() -> f64 {
    1e-10
}

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    /// Potential in the expression grammar, variables x1, x2.
    pub potential: String,
    pub dimension: usize,
    pub domain: DomainConfig,
    /// Nodes per axis, endpoints included.
    pub grid: Vec<usize>,
    /// Strictly decreasing, positive.
    pub h: Vec<f64>,
    /// Eigenvalues per h; at least m₀ + 2.
    pub k: usize,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "yes")]
    pub quasimode: bool,
    /// Closed-form check for wells leaving only through boundary saddles.
    #[serde(default = "yes")]
    pub corollary: bool,
    /// Threshold scale for the small-cluster count (λ ≤ h·scale).
    #[serde(default = "one")]
    pub cluster_scale: f64,
    /// Write eigenvectors and quasi-modes as binary dumps.
    #[serde(default)]
    pub dump_vectors: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Static checks; k against m₀ is checked once the topology is known.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.schema != SCHEMA {
            return bad(format!("schema {} is not supported (expected {SCHEMA})", self.schema));
        }
        if !(1..=2).contains(&self.dimension) {
            return bad(format!("dimension {} (expected 1 or 2)", self.dimension));
        }
        let d = self.dimension;
        if self.domain.lower.len() != d || self.domain.upper.len() != d || self.grid.len() != d {
            return bad(format!("domain corners and grid must have {d} entries"));
        }
        if let Some(n) = self.grid.iter().find(|&&n| n < wk_field::MIN_NODES_PER_AXIS) {
            return bad(format!("{n} grid nodes on an axis; at least {} required", wk_field::MIN_NODES_PER_AXIS));
        }
        if self.h.is_empty() {
            return bad("empty h list".into());
        }
        if self.h.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return bad("h values must be positive and finite".into());
        }
        if self.h.windows(2).any(|w| w[1] >= w[0]) {
            return bad("h list must be strictly decreasing".into());
        }
        if self.k == 0 {
            return bad("k must be positive".into());
        }
        if !(self.solver.tol > 0.0 && self.solver.tol < 1.0) {
            return bad(format!("solver tolerance {} outside (0, 1)", self.solver.tol));
        }
        if !(self.cluster_scale > 0.0 && self.cluster_scale.is_finite()) {
            return bad("cluster_scale must be positive".into());
        }
        Ok(())
    }
}
