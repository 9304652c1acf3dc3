//! Regression of log λ = log A + γ·log h − 2E/h over an h-sweep.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitError {
    #[error("{points} points on the branch; at least 4 required")]
    TooFew { points: usize },
    #[error("λ = {lambda:e} at h = {h} is below the floating floor {floor:e}")]
    BelowFloor { h: f64, lambda: f64, floor: f64 },
    #[error("design matrix is rank deficient (condition {condition:e}); h values too few or too clustered")]
    RankDeficient { condition: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub energy: f64,
    pub gamma: f64,
    pub prefactor: f64,
    /// RMS of log λ − model.
    pub rms_log_misfit: f64,
}

const MIN_POINTS: usize = 4;
const MAX_CONDITION: f64 = 1e10;

/// Fits (E, γ, A) to points (h, λ). Points with λ ≤ `floor` are refused.
pub fn fit_rates(branch: &[(f64, f64)], floor: f64) -> Result<RateFit, FitError> {
    if branch.len() < MIN_POINTS {
        return Err(FitError::TooFew { points: branch.len() });
    }
    if let Some(&(h, lambda)) = branch.iter().find(|&&(_, l)| !(l > floor && l.is_finite())) {
        return Err(FitError::BelowFloor { h, lambda, floor });
    }
    let n = branch.len();
    let cols = |h: f64| [1.0, h.ln(), 1.0 / h];
    let mut a = DMatrix::from_fn(n, 3, |i, j| cols(branch[i].0)[j]);
    let y = DVector::from_iterator(n, branch.iter().map(|p| p.1.ln()));
    // equilibrate columns; the 1/h column dominates otherwise
    let scale: Vec<f64> = (0..3).map(|j| a.column(j).norm()).collect();
    for (j, &s) in scale.iter().enumerate() {
        a.column_mut(j).iter_mut().for_each(|v| *v /= s);
    }
    let svd = a.clone().svd(true, true);
    let (lo, hi) = svd.singular_values.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond < MAX_CONDITION) {
        return Err(FitError::RankDeficient { condition: cond });
    }
    let x = svd.solve(&y, 0.0).expect("both factors computed");
    let coef: Vec<f64> = (0..3).map(|j| x[j] / scale[j]).collect();
    let resid = &a * &x - &y;
    Ok(RateFit {
        energy: -coef[2] / 2.0,
        gamma: coef[1],
        prefactor: coef[0].exp(),
        rms_log_misfit: (resid.norm_squared() / n as f64).sqrt(),
    })
}
