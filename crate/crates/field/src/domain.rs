//! Box domains, tensor grids and sampled potential data.

use serde::{Deserialize, Serialize};

use crate::{FieldError, ScalarField};

/// Axis-aligned interval (d=1) or box (d=2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// One face of the box: the set `x[axis] = lower[axis]` or `x[axis] = upper[axis]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub axis: usize,
    pub upper: bool,
}

impl Face {
    /// Outward unit normal (length-2 array; unused components are zero).
    pub fn normal(&self) -> [f64; 2] {
        let mut n = [0.0; 2];
        n[self.axis] = if self.upper { 1.0 } else { -1.0 };
        n
    }
}

impl DomainSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, FieldError> {
        if lower.len() != upper.len() || !(1..=2).contains(&lower.len()) {
            return Err(FieldError::InvalidDomain(format!(
                "corner dimensions {} and {} must agree and be 1 or 2",
                lower.len(),
                upper.len()
            )));
        }
        for (a, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(FieldError::InvalidDomain(format!("axis {a}: need lower < upper, got {lo} .. {hi}")));
            }
        }
        Ok(DomainSpec { lower, upper })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self, FieldError> {
        Self::new(vec![a], vec![b])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn kind(&self) -> &'static str {
        if self.dim() == 1 {
            "interval"
        } else {
            "box"
        }
    }

    pub fn faces(&self) -> Vec<Face> {
        (0..self.dim()).flat_map(|axis| [Face { axis, upper: false }, Face { axis, upper: true }]).collect()
    }

    pub fn face_coord(&self, face: Face) -> f64 {
        if face.upper {
            self.upper[face.axis]
        } else {
            self.lower[face.axis]
        }
    }

    pub fn diameter(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }

    /// Faces that contain `p` up to `tol` (two faces at a corner).
    pub fn faces_containing(&self, p: &[f64], tol: f64) -> Vec<Face> {
        let mut out = Vec::new();
        for axis in 0..self.dim() {
            if (p[axis] - self.lower[axis]).abs() <= tol {
                out.push(Face { axis, upper: false });
            }
            if (p[axis] - self.upper[axis]).abs() <= tol {
                out.push(Face { axis, upper: true });
            }
        }
        out
    }

    /// True if `p` lies in the closed box enlarged by `tol`.
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        (0..self.dim()).all(|a| p[a] >= self.lower[a] - tol && p[a] <= self.upper[a] + tol)
    }

    /// Euclidean distance from an interior point to the boundary.
    pub fn distance_to_boundary(&self, p: &[f64]) -> f64 {
        (0..self.dim())
            .map(|a| (p[a] - self.lower[a]).min(self.upper[a] - p[a]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Nodes per axis, endpoints included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Interior,
    Boundary,
}

/// Tensor grid on a box. Nodes are numbered with `x1` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub domain: DomainSpec,
    pub spec: GridSpec,
    pub dx: Vec<f64>,
}

pub const MIN_NODES_PER_AXIS: usize = 33;

impl Grid {
    pub fn new(domain: DomainSpec, spec: GridSpec) -> Result<Self, FieldError> {
        if spec.nodes.len() != domain.dim() {
            return Err(FieldError::InvalidGrid(format!(
                "grid has {} axes but the domain has dimension {}",
                spec.nodes.len(),
                domain.dim()
            )));
        }
        if let Some(n) = spec.nodes.iter().find(|&&n| n < MIN_NODES_PER_AXIS) {
            return Err(FieldError::InvalidGrid(format!("{n} nodes on an axis; at least {MIN_NODES_PER_AXIS} required")));
        }
        let dx = (0..domain.dim())
            .map(|a| (domain.upper[a] - domain.lower[a]) / (spec.nodes[a] - 1) as f64)
            .collect();
        Ok(Grid { domain, spec, dx })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn n(&self, axis: usize) -> usize {
        self.spec.nodes[axis]
    }

    pub fn node_count(&self) -> usize {
        self.spec.nodes.iter().product()
    }

    pub fn interior_count(&self) -> usize {
        self.spec.nodes.iter().map(|n| n - 2).product()
    }

    pub fn max_dx(&self) -> f64 {
        self.dx.iter().cloned().fold(0.0, f64::max)
    }

    pub fn multi_index(&self, node: usize) -> [usize; 2] {
        let n0 = self.n(0);
        [node % n0, node / n0]
    }

    pub fn node_at(&self, idx: [usize; 2]) -> usize {
        if self.dim() == 1 {
            idx[0]
        } else {
            idx[0] + self.n(0) * idx[1]
        }
    }

    /// Physical coordinates (length-2 array; unused component is zero).
    pub fn coords(&self, node: usize) -> [f64; 2] {
        let idx = self.multi_index(node);
        let mut p = [0.0; 2];
        for a in 0..self.dim() {
            p[a] = self.domain.lower[a] + idx[a] as f64 * self.dx[a];
        }
        // land exactly on the upper corner
        for a in 0..self.dim() {
            if idx[a] == self.n(a) - 1 {
                p[a] = self.domain.upper[a];
            }
        }
        p
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        let idx = self.multi_index(node);
        if (0..self.dim()).any(|a| idx[a] == 0 || idx[a] == self.n(a) - 1) {
            NodeKind::Boundary
        } else {
            NodeKind::Interior
        }
    }

    /// Position of an interior node in the interior-only numbering.
    pub fn interior_index(&self, node: usize) -> Option<usize> {
        let idx = self.multi_index(node);
        if self.kind(node) == NodeKind::Boundary {
            return None;
        }
        Some(if self.dim() == 1 { idx[0] - 1 } else { (idx[0] - 1) + (self.n(0) - 2) * (idx[1] - 1) })
    }

    /// Inverse of [`Grid::interior_index`].
    pub fn interior_node(&self, k: usize) -> usize {
        if self.dim() == 1 {
            k + 1
        } else {
            let m0 = self.n(0) - 2;
            self.node_at([k % m0 + 1, k / m0 + 1])
        }
    }

    /// Axis neighbours of a node.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let idx = self.multi_index(node);
        (0..self.dim()).flat_map(move |a| {
            let mut out = [None, None];
            if idx[a] > 0 {
                let mut j = idx;
                j[a] -= 1;
                out[0] = Some((self.node_at(j), a));
            }
            if idx[a] + 1 < self.n(a) {
                let mut j = idx;
                j[a] += 1;
                out[1] = Some((self.node_at(j), a));
            }
            out.into_iter().flatten()
        })
    }

    /// Node closest to `p` (clamped into the grid).
    pub fn nearest_node(&self, p: &[f64]) -> usize {
        let mut idx = [0usize; 2];
        for a in 0..self.dim() {
            let t = ((p[a] - self.domain.lower[a]) / self.dx[a]).round();
            idx[a] = t.clamp(0.0, (self.n(a) - 1) as f64) as usize;
        }
        self.node_at(idx)
    }

    /// Nodes whose multi-index lies within `radius` index steps of the node nearest `p`.
    pub fn nodes_near(&self, p: &[f64], radius: usize) -> Vec<usize> {
        let c = self.multi_index(self.nearest_node(p));
        let r = radius as isize;
        let mut out = Vec::new();
        let range = |a: usize| -> Vec<usize> {
            if a >= self.dim() {
                return vec![0];
            }
            (-r..=r)
                .map(|o| c[a] as isize + o)
                .filter(|&i| i >= 0 && (i as usize) < self.n(a))
                .map(|i| i as usize)
                .collect()
        };
        for j in range(1) {
            for i in range(0) {
                out.push(self.node_at([i, j]));
            }
        }
        out
    }
}

/// Node-indexed samples of f, ∇f, |∇f|² and Δf (trace of the Hessian).
#[derive(Debug, Clone)]
pub struct GridValues {
    pub f: Vec<f64>,
    pub grad: Vec<[f64; 2]>,
    pub grad_sq: Vec<f64>,
    pub lap: Vec<f64>,
}

pub fn evaluate_on_grid(field: &ScalarField, grid: &Grid) -> Result<GridValues, FieldError> {
    if field.dim() != grid.dim() {
        return Err(FieldError::InvalidGrid(format!(
            "field dimension {} does not match grid dimension {}",
            field.dim(),
            grid.dim()
        )));
    }
    let n = grid.node_count();
    let d = grid.dim();
    let mut out = GridValues {
        f: Vec::with_capacity(n),
        grad: Vec::with_capacity(n),
        grad_sq: Vec::with_capacity(n),
        lap: Vec::with_capacity(n),
    };
    for node in 0..n {
        let p = grid.coords(node);
        let j = field.jet(&p[..d]);
        let gsq: f64 = j.grad[..d].iter().map(|g| g * g).sum();
        let lap: f64 = (0..d).map(|a| j.hess[a][a]).sum();
        if !(j.value.is_finite() && gsq.is_finite() && lap.is_finite()) {
            return Err(FieldError::NonFinite { node, coords: p[..d].to_vec() });
        }
        out.f.push(j.value);
        out.grad.push(j.grad);
        out.grad_sq.push(gsq);
        out.lap.push(lap);
    }
    Ok(out)
}
