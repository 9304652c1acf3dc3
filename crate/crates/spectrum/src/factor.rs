//! Banded LDLᵀ of the operator that never subtracts.
//!
//! The operator has non-positive off-diagonal entries and a known positive
//! vector u with A·u = t ≥ 0, every t_i a sum of positive terms. Pivots are
//! formed from the tracked defect, d_k = (t_k + Σ_{j>k} |a_kj|·u_j)/u_k, and
//! the Schur complement keeps the invariant with t_i += |a_ik|·t_k/d_k, so the
//! factorization carries small componentwise relative error however tiny the
//! smallest eigenvalue is.

use crate::{SparseSymmetricOperator, SpectrumError};

pub struct BandedFactor {
    n: usize,
    band: usize,
    /// perm[k] = operator index of the k-th unknown in elimination order.
    perm: Vec<usize>,
    /// Row k holds U[k][k+o] for o = 1..=band.
    upper: Vec<f64>,
    pivots: Vec<f64>,
}

/// Elimination order with the shortest interior axis varying fastest.
fn ordering(shape: &[usize]) -> (Vec<usize>, usize) {
    match shape {
        [n] => ((0..*n).collect(), 1),
        [n0, n1] if n1 < n0 => {
            // transpose: axis 1 fastest
            let mut p = Vec::with_capacity(n0 * n1);
            for i0 in 0..*n0 {
                for i1 in 0..*n1 {
                    p.push(i0 + n0 * i1);
                }
            }
            (p, *n1)
        }
        [n0, n1] => ((0..n0 * n1).collect(), *n0),
        _ => unreachable!("dimension is 1 or 2"),
    }
}

impl BandedFactor {
    pub fn new(op: &SparseSymmetricOperator) -> Result<Self, SpectrumError> {
        Self::shifted(op, 0.0)
    }

    /// Factors A + σI, σ ≥ 0; the defect becomes t + σ·u, still a sum of
    /// positive terms.
    pub fn shifted(op: &SparseSymmetricOperator, sigma: f64) -> Result<Self, SpectrumError> {
        let (u0, t0) = op.positive.as_ref().ok_or(SpectrumError::NoPositiveVector)?;
        let n = op.n;
        let (perm, band) = ordering(&op.shape);
        let mut inv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        let u: Vec<f64> = perm.iter().map(|&p| u0[p]).collect();
        let mut t: Vec<f64> = perm.iter().map(|&p| t0[p] + sigma * u0[p]).collect();
        let mut upper = vec![0.0; n * band];
        for (k, &p) in perm.iter().enumerate() {
            for idx in op.row_ptr[p]..op.row_ptr[p + 1] {
                let j = inv[op.col[idx]];
                if j > k {
                    let o = j - k;
                    if o > band {
                        return Err(SpectrumError::Internal(format!("entry ({k},{j}) outside band {band}")));
                    }
                    upper[k * band + o - 1] = op.val[idx];
                }
            }
        }
        let mut pivots = vec![0.0; n];
        for k in 0..n {
            let row = k * band;
            let width = band.min(n - 1 - k);
            let mut s = t[k];
            for o in 1..=width {
                s -= upper[row + o - 1] * u[k + o];
            }
            let d = s / u[k];
            if !(d > 0.0) || !d.is_finite() {
                return Err(SpectrumError::Factorization { pivot: k, value: d });
            }
            pivots[k] = d;
            let tk = t[k];
            for o1 in 1..=width {
                let a = upper[row + o1 - 1];
                if a == 0.0 {
                    continue;
                }
                let i = k + o1;
                t[i] -= a * tk / d;
                let scale = a / d;
                let dst = i * band;
                for o2 in o1 + 1..=width {
                    let b = upper[row + o2 - 1];
                    if b != 0.0 {
                        upper[dst + o2 - o1 - 1] -= scale * b;
                    }
                }
            }
            for o in 1..=width {
                upper[row + o - 1] /= d;
            }
        }
        Ok(BandedFactor { n, band, perm, upper, pivots })
    }

    /// x = A⁻¹·b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, band) = (self.n, self.band);
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for k in 0..n {
            let yk = y[k];
            if yk == 0.0 {
                continue;
            }
            let width = band.min(n - 1 - k);
            let row = &self.upper[k * band..k * band + width];
            for (o, &l) in row.iter().enumerate() {
                y[k + o + 1] -= l * yk;
            }
        }
        for k in 0..n {
            y[k] /= self.pivots[k];
        }
        for k in (0..n).rev() {
            let width = band.min(n - 1 - k);
            let row = &self.upper[k * band..k * band + width];
            let mut s = y[k];
            for (o, &l) in row.iter().enumerate() {
                s -= l * y[k + o + 1];
            }
            y[k] = s;
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }

    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }
}
