//! Checks of the boundary hypotheses on the principal-well contact points.

use serde::{Deserialize, Serialize};

use crate::critical::CriticalPoint;
use crate::wells::{BoundaryCase, SaddleSets};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentCheck {
    pub point: usize,
    pub angle: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactCheck {
    pub point: usize,
    pub normal_derivative: f64,
    pub tangential_hessian: Vec<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub h1_pass: bool,
    pub h2_pass: bool,
    pub alignment: Vec<AlignmentCheck>,
    pub contacts: Vec<ContactCheck>,
    pub violations: Vec<String>,
}

impl HypothesisReport {
    pub fn pass(&self) -> bool {
        self.h1_pass && self.h2_pass && self.violations.is_empty()
    }
}

pub fn check_hypotheses(
    sets: &SaddleSets,
    crits: &[CriticalPoint],
    angle_tol: f64,
    tangential_pd_tol: f64,
) -> HypothesisReport {
    let mut alignment = Vec::new();
    let mut contacts = Vec::new();
    let mut violations = sets.unresolved.clone();
    for b in &sets.boundary {
        let z = &crits[b.point];
        let info = z.boundary.as_ref().expect("boundary point");
        match b.case {
            BoundaryCase::Critical => {
                let angle = info.alignment_angle.unwrap_or(f64::NAN);
                let pass = angle <= angle_tol;
                if !pass {
                    violations.push(format!(
                        "(H1) at {:?}: angle {angle:.6} rad between the outward normal and the negative-curvature direction exceeds {angle_tol}",
                        z.location
                    ));
                }
                alignment.push(AlignmentCheck { point: z.id, angle, pass });
            }
            BoundaryCase::NonCritical => {
                let pass = info.normal_derivative > 0.0 && info.tangential_hessian.iter().all(|&m| m >= tangential_pd_tol);
                if !pass {
                    violations.push(format!(
                        "(H2) at {:?}: ∂ₙf = {}, tangential Hessian {:?}",
                        z.location, info.normal_derivative, info.tangential_hessian
                    ));
                }
                contacts.push(ContactCheck {
                    point: z.id,
                    normal_derivative: info.normal_derivative,
                    tangential_hessian: info.tangential_hessian.clone(),
                    pass,
                });
            }
            BoundaryCase::Unclassified => {
                violations.push(format!(
                    "boundary contact {:?} is neither a boundary saddle nor a non-degenerate minimum of f|∂Ω: {}",
                    z.location,
                    b.note.clone().unwrap_or_default()
                ));
            }
        }
    }
    HypothesisReport {
        h1_pass: alignment.iter().all(|a| a.pass),
        h2_pass: contacts.iter().all(|c| c.pass)
            && !sets.boundary.iter().any(|b| b.case == BoundaryCase::Unclassified),
        alignment,
        contacts,
        violations,
    }
}
