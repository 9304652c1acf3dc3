//! Scalar potentials on axis-aligned boxes.
//!
//! A potential is parsed from a small expression grammar (`+ - * / ^`, unary
//! minus, `exp sin cos sqrt`, variables `x1`/`x2`, numeric literals) and
//! differentiated exactly by second-order forward mode, so Hessians carry no
//! differencing noise.

mod domain;
mod expr;
mod jet;

pub use domain::{evaluate_on_grid, DomainSpec, Face, Grid, GridSpec, GridValues, NodeKind, MIN_NODES_PER_AXIS};
pub use expr::{parse_expr, Expr, Func};
pub use jet::Jet;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("variable x{var} used in a {dim}-dimensional field")]
    DimensionMismatch { var: usize, dim: usize },
    #[error("unsupported dimension {0} (expected 1 or 2)")]
    UnsupportedDimension(usize),
    #[error("non-finite potential value at node {node} ({coords:?})")]
    NonFinite { node: usize, coords: Vec<f64> },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// A parsed potential together with its dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    expr: Expr,
    dim: usize,
    source: String,
}

/// Parses `source` as a potential in `dim` variables.
pub fn parse_field(source: &str, dim: usize) -> Result<ScalarField, FieldError> {
    if !(1..=2).contains(&dim) {
        return Err(FieldError::UnsupportedDimension(dim));
    }
    let expr = parse_expr(source)?;
    if let Some(v) = expr.max_var() {
        if v >= dim {
            return Err(FieldError::DimensionMismatch { var: v + 1, dim });
        }
    }
    Ok(ScalarField { expr, dim, source: source.to_string() })
}

impl ScalarField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        self.expr.eval(p)
    }

    /// Value, gradient and Hessian at `p` in one pass.
    pub fn jet(&self, p: &[f64]) -> Jet {
        self.expr.eval_jet(p, self.dim)
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let j = self.jet(p);
        j.grad[..self.dim].to_vec()
    }

    pub fn hessian(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let j = self.jet(p);
        (0..self.dim).map(|a| j.hess[a][..self.dim].to_vec()).collect()
    }
}
