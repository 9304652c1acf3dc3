//! Eyring–Kramers prefactors and the predicted exponentially small
//! eigenvalues Λ_h(x) = (√h·K₁ + h·K₂)·e^{−2E/h}, one per labeled minimum.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;
use wk_topology::{CriticalPoint, PointKind, Topology, WellLabel, WellLabeling};

#[derive(Debug, Error)]
pub enum KramersError {
    #[error("critical point {id} is claimed as a minimum but det Hess f = {det} is not positive")]
    NotAMinimum { id: usize, det: f64 },
    #[error("critical point {id} is claimed as a saddle but μ_d = {mu} is not negative")]
    NotASaddle { id: usize, mu: f64 },
    #[error("boundary point {id} has ∂ₙf = {dn} and tangential determinant {det}; expected both positive")]
    BadBoundaryPoint { id: usize, dn: f64, det: f64 },
    #[error("point {id} cannot contribute to a prefactor (kind {kind:?})")]
    Unsupported { id: usize, kind: PointKind },
    #[error("hypotheses fail: {0:?}")]
    Hypotheses(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaddleKind {
    BoundaryNoncritical,
    BoundaryCritical,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleContribution {
    pub saddle: usize,
    pub kind: SaddleKind,
    /// c_{x,z}, already divided by B.
    pub constant: f64,
    /// Power of h multiplying the constant: ½ for boundary non-critical points, 1 otherwise.
    pub h_power: f64,
}

/// Relative remainder order of Λ_h.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorOrder {
    H,
    SqrtH,
}

impl ErrorOrder {
    pub fn eval(self, h: f64) -> f64 {
        match self {
            ErrorOrder::H => h,
            ErrorOrder::SqrtH => h.sqrt(),
        }
    }
}

/// Σ_{q ∈ argmin} (det Hess f(q))^{−½}.
pub fn argmin_weight(argmin: &[&CriticalPoint]) -> Result<f64, KramersError> {
    let mut b = 0.0;
    for q in argmin {
        let det = q.det_hessian();
        if !(det > 0.0) {
            return Err(KramersError::NotAMinimum { id: q.id, det });
        }
        b += det.powf(-0.5);
    }
    Ok(b)
}

/// c_{x,z} for one generalized saddle z of the well whose minima (argmin set) are given.
pub fn saddle_constant(z: &CriticalPoint, argmin: &[&CriticalPoint]) -> Result<SaddleContribution, KramersError> {
    let b = argmin_weight(argmin)?;
    let critical = |factor: f64| -> Result<f64, KramersError> {
        let mu = z.mu_d();
        if !(mu < 0.0) {
            return Err(KramersError::NotASaddle { id: z.id, mu });
        }
        Ok(factor * mu.abs() / PI * z.det_hessian().abs().powf(-0.5) / b)
    };
    let (kind, constant, h_power) = match z.kind {
        PointKind::BoundaryNoncritical => {
            let dn = z.boundary.as_ref().map_or(f64::NAN, |bi| bi.normal_derivative);
            let det = z.det_tangential();
            if !(dn > 0.0 && det > 0.0) {
                return Err(KramersError::BadBoundaryPoint { id: z.id, dn, det });
            }
            (SaddleKind::BoundaryNoncritical, 2.0 * dn / PI.sqrt() * det.powf(-0.5) / b, 0.5)
        }
        PointKind::BoundaryCritical => (SaddleKind::BoundaryCritical, critical(2.0)?, 1.0),
        PointKind::Interior if z.index == 1 => (SaddleKind::Interior, critical(1.0)?, 1.0),
        kind => return Err(KramersError::Unsupported { id: z.id, kind }),
    };
    Ok(SaddleContribution { saddle: z.id, kind, constant, h_power })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KramersPrediction {
    pub minimum: usize,
    pub tier: (usize, usize),
    pub j: Vec<usize>,
    pub energy: f64,
    pub k1: f64,
    pub k2: f64,
    /// ¼ when K₁ ≠ 0, else ½.
    pub p: f64,
    /// 2p.
    pub gamma: f64,
    pub b: f64,
    pub a1: f64,
    pub a2: f64,
    pub contributions: Vec<SaddleContribution>,
    pub error_order: ErrorOrder,
}

impl KramersPrediction {
    /// Λ_h(x) = (√h·K₁ + h·K₂)·e^{−2E/h}.
    pub fn lambda(&self, h: f64) -> f64 {
        (h.sqrt() * self.k1 + h * self.k2) * (-2.0 * self.energy / h).exp()
    }

    /// ((A₁ + √h·A₂)/B)·√(h/π)·e^{−2E/h}; algebraically identical to [`Self::lambda`].
    pub fn lambda_from_a(&self, h: f64) -> f64 {
        (self.a1 + h.sqrt() * self.a2) / self.b * (h / PI).sqrt() * (-2.0 * self.energy / h).exp()
    }

    /// Λ_h·h^{−γ}·e^{2E/h}; constant in h exactly when only one of K₁, K₂ is present.
    pub fn prefactor(&self, h: f64) -> f64 {
        (h.sqrt() * self.k1 + h * self.k2) * h.powf(-self.gamma)
    }

    /// h^{2p}·e^{−2E/h}, the scale that orders the predictions.
    pub fn scale(&self, h: f64) -> f64 {
        h.powf(2.0 * self.p) * (-2.0 * self.energy / h).exp()
    }
}

/// Builds the prediction for one labeled minimum.
pub fn predict_one(label: &WellLabel, crits: &[CriticalPoint]) -> Result<KramersPrediction, KramersError> {
    let argmin: Vec<&CriticalPoint> = label.argmin.iter().map(|&q| &crits[q]).collect();
    let b = argmin_weight(&argmin)?;
    let mut contributions = Vec::with_capacity(label.j.len());
    let (mut k1, mut k2, mut a1, mut a2) = (0.0, 0.0, 0.0, 0.0);
    let mut critical_on_boundary = false;
    for &z in &label.j {
        let zc = &crits[z];
        let c = saddle_constant(zc, &argmin)?;
        match c.kind {
            SaddleKind::BoundaryNoncritical => {
                k1 += c.constant;
                a1 += 2.0 * zc.boundary.as_ref().unwrap().normal_derivative / zc.det_tangential().sqrt();
            }
            kind => {
                k2 += c.constant;
                let on_boundary = kind == SaddleKind::BoundaryCritical;
                critical_on_boundary |= on_boundary;
                let w = if on_boundary { 2.0 } else { 1.0 };
                a2 += w * zc.mu_d().abs() / zc.det_hessian().abs().sqrt() / PI.sqrt();
            }
        }
        contributions.push(c);
    }
    let p = if k1 != 0.0 { 0.25 } else { 0.5 };
    Ok(KramersPrediction {
        minimum: label.minimum,
        tier: label.tier,
        j: label.j.clone(),
        energy: label.energy,
        k1,
        k2,
        p,
        gamma: 2.0 * p,
        b,
        a1,
        a2,
        contributions,
        error_order: if critical_on_boundary { ErrorOrder::SqrtH } else { ErrorOrder::H },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossTerm {
    pub x: usize,
    pub y: usize,
    pub shared: Vec<usize>,
    /// Σ_{z ∈ j(x) ∩ j(y)} √(c_{x,z}·c_{y,z}).
    pub k: f64,
}

/// Outcome of the three separation conditions for the first `m` predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixCheck {
    pub m: usize,
    /// E strictly drops after position m (or m is the last and E_m > 0).
    pub energy_gap: bool,
    /// j(x_i) shares no point with any other j, for i ≤ m.
    pub disjoint_saddles: bool,
    /// Nested wells among the first m have strictly ordered minima values.
    pub strict_nesting: bool,
    pub notes: Vec<String>,
}

impl PrefixCheck {
    pub fn valid(&self) -> bool {
        self.energy_gap && self.disjoint_saddles && self.strict_nesting
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Applicability {
    /// Largest m with a valid prefix; 0 when none.
    pub m_star: usize,
    pub prefixes: Vec<PrefixCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictions {
    /// Sorted by E decreasing, then p decreasing.
    pub predictions: Vec<KramersPrediction>,
    pub cross_terms: Vec<CrossTerm>,
    pub applicability: Applicability,
}

fn subset(a: &[usize], b: &[usize]) -> bool {
    // both sorted
    let mut it = b.iter();
    a.iter().all(|x| it.any(|y| y == x))
}

/// Predictions for every labeled minimum, cross terms for wells sharing
/// saddles, and the largest prefix for which the separation conditions hold.
pub fn build_prediction(labeling: &WellLabeling, crits: &[CriticalPoint]) -> Result<Predictions, KramersError> {
    let tol = labeling.tol_level;
    let mut order: Vec<usize> = (0..labeling.labels.len()).collect();
    let mut predictions = Vec::with_capacity(order.len());
    for l in &labeling.labels {
        predictions.push(predict_one(l, crits)?);
    }
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&predictions[a], &predictions[b]);
        if (pa.energy - pb.energy).abs() > tol {
            pb.energy.total_cmp(&pa.energy)
        } else {
            pb.p.total_cmp(&pa.p)
        }
    });
    let labels: Vec<&WellLabel> = order.iter().map(|&i| &labeling.labels[i]).collect();
    let predictions: Vec<KramersPrediction> = order.iter().map(|&i| predictions[i].clone()).collect();

    let mut cross_terms = Vec::new();
    for a in 0..predictions.len() {
        for b in a + 1..predictions.len() {
            let shared: Vec<usize> = predictions[a].j.iter().copied().filter(|z| predictions[b].j.contains(z)).collect();
            if shared.is_empty() {
                continue;
            }
            let c = |p: &KramersPrediction, z: usize| p.contributions.iter().find(|c| c.saddle == z).unwrap().constant;
            let k = shared.iter().map(|&z| (c(&predictions[a], z) * c(&predictions[b], z)).sqrt()).sum();
            cross_terms.push(CrossTerm { x: predictions[a].minimum, y: predictions[b].minimum, shared, k });
        }
    }

    let n = predictions.len();
    let mut prefixes = Vec::with_capacity(n);
    for m in 1..=n {
        let mut notes = Vec::new();
        let rest = predictions[m..].iter().map(|p| p.energy).fold(0.0, f64::max);
        let energy_gap = predictions[m - 1].energy > rest + tol;
        if !energy_gap {
            notes.push(format!("E_{m} = {} does not exceed the remaining maximum {rest}", predictions[m - 1].energy));
        }
        let mut disjoint_saddles = true;
        for i in 0..m {
            for k in (0..n).filter(|&k| k != i) {
                if let Some(z) = predictions[i].j.iter().find(|z| predictions[k].j.contains(z)) {
                    disjoint_saddles = false;
                    notes.push(format!(
                        "saddle {z} is shared by minima {} and {}",
                        predictions[i].minimum, predictions[k].minimum
                    ));
                }
            }
        }
        let mut strict_nesting = true;
        for k in 0..m {
            for l in (0..m).filter(|&l| l != k) {
                if subset(&labels[l].nodes, &labels[k].nodes) {
                    let (fl, fk) = (crits[labels[l].minimum].value, crits[labels[k].minimum].value);
                    if !(fl > fk + tol) {
                        strict_nesting = false;
                        notes.push(format!(
                            "well of minimum {} lies inside that of {} with f equal ({fl} vs {fk})",
                            labels[l].minimum, labels[k].minimum
                        ));
                    }
                }
            }
        }
        prefixes.push(PrefixCheck { m, energy_gap, disjoint_saddles, strict_nesting, notes });
    }
    let m_star = prefixes.iter().filter(|p| p.valid()).map(|p| p.m).max().unwrap_or(0);
    Ok(Predictions { predictions, cross_terms, applicability: Applicability { m_star, prefixes } })
}

/// As [`build_prediction`], refusing when the hypothesis report fails.
pub fn predict(topology: &Topology) -> Result<Predictions, KramersError> {
    if !topology.hypotheses.pass() {
        return Err(KramersError::Hypotheses(topology.hypotheses.violations.clone()));
    }
    build_prediction(&topology.labeling, &topology.critical_points)
}

/// Closed-form principal eigenvalue for a single well that leaves only
/// through critical points of f on ∂Ω:
/// λ₁ ≈ (2/π)·[Σ_z |μ_d(z)|·|det Hess f(z)|^{−½} / Σ_y det Hess f(y)^{−½}]·h·e^{−2(min_∂Ω f − min f)/h}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySaddleFormula {
    pub minimum: usize,
    pub saddles: Vec<usize>,
    pub prefactor: f64,
    pub energy: f64,
}

impl BoundarySaddleFormula {
    pub fn lambda(&self, h: f64) -> f64 {
        self.prefactor * h * (-2.0 * self.energy / h).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BoundarySaddleVerdict {
    Applicable(BoundarySaddleFormula),
    NotApplicable { reasons: Vec<String> },
}

impl BoundarySaddleVerdict {
    pub fn is_applicable(&self) -> bool {
        matches!(self, BoundarySaddleVerdict::Applicable(_))
    }
}

pub fn boundary_saddle_formula(topology: &Topology) -> BoundarySaddleVerdict {
    let crits = &topology.critical_points;
    let tol = topology.tol_level;
    let mut reasons = Vec::new();
    let wells = &topology.saddles.wells;
    let minima: Vec<&CriticalPoint> =
        crits.iter().filter(|c| c.kind == PointKind::Interior && c.index == 0).collect();
    let boundary_min = crits.iter().filter(|c| c.on_boundary).map(|c| c.value).fold(f64::INFINITY, f64::min);
    if wells.len() != 1 {
        reasons.push(format!("{} principal wells, expected exactly one", wells.len()));
    } else {
        let w = &wells[0];
        if w.minima.len() != minima.len() {
            reasons.push("the principal well does not contain every interior minimum".into());
        }
        if (w.level - boundary_min).abs() > tol {
            reasons.push(format!("well level {} differs from min over ∂Ω of f = {boundary_min}", w.level));
        }
    }
    let Some(label) = topology.labeling.labels.iter().find(|l| l.tier == (1, 1)) else {
        reasons.push("no labeled principal well".into());
        return BoundarySaddleVerdict::NotApplicable { reasons };
    };
    for &z in &label.j {
        let c = &crits[z];
        if c.kind != PointKind::BoundaryCritical {
            reasons.push(format!("closure of the well meets ∂Ω at {:?}, which is not a critical point of f ({:?})", c.location, c.kind));
        } else if let Some(a) = topology.hypotheses.alignment.iter().find(|a| a.point == z) {
            if !a.pass {
                reasons.push(format!("descent direction at {:?} is not normal to ∂Ω (angle {})", c.location, a.angle));
            }
        }
    }
    if !reasons.is_empty() {
        return BoundarySaddleVerdict::NotApplicable { reasons };
    }
    let argmin: Vec<&CriticalPoint> = label.argmin.iter().map(|&q| &crits[q]).collect();
    let b: f64 = argmin.iter().map(|q| q.det_hessian().powf(-0.5)).sum();
    let s: f64 = label.j.iter().map(|&z| crits[z].mu_d().abs() * crits[z].det_hessian().abs().powf(-0.5)).sum();
    let fmin = minima.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    BoundarySaddleVerdict::Applicable(BoundarySaddleFormula {
        minimum: label.minimum,
        saddles: label.j.clone(),
        prefactor: 2.0 / PI * s / b,
        energy: boundary_min - fmin,
    })
}
