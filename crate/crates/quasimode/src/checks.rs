//! Localization identity and singular-value inequality checks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use wk_field::{evaluate_on_grid, Grid, ScalarField};
use wk_spectrum::edges;

use crate::cylinder::smoothstep;
use crate::QuasimodeError;

/// A smooth cut-off: value and gradient at a point.
pub type Cutoff = Box<dyn Fn(&[f64]) -> (f64, [f64; 2]) + Send + Sync>;

/// χ ≡ 1.
pub fn trivial_partition() -> Vec<Cutoff> {
    vec![Box::new(|_: &[f64]| (1.0, [0.0, 0.0]))]
}

/// χ₁ = cos θ, χ₂ = sin θ with θ rising smoothly from 0 to π/2 across
/// [center − width, center + width] along `axis`; χ₁² + χ₂² = 1 exactly.
pub fn two_bump_partition(axis: usize, center: f64, width: f64) -> Vec<Cutoff> {
    let theta = move |p: &[f64]| {
        let t = (p[axis] - center + width) / (2.0 * width);
        let s = smoothstep(t);
        let ds = if (0.0..=1.0).contains(&t) { 30.0 * t * t * (1.0 - t) * (1.0 - t) / (2.0 * width) } else { 0.0 };
        (std::f64::consts::FRAC_PI_2 * s, std::f64::consts::FRAC_PI_2 * ds)
    };
    let grad = move |g: f64| {
        let mut out = [0.0; 2];
        out[axis] = g;
        out
    };
    vec![
        Box::new(move |p: &[f64]| {
            let (th, dth) = theta(p);
            (th.cos(), grad(-th.sin() * dth))
        }),
        Box::new(move |p: &[f64]| {
            let (th, dth) = theta(p);
            (th.sin(), grad(th.cos() * dth))
        }),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImsReport {
    pub trials: usize,
    /// max over trials of |Q(ψ) − Σ Q(χψ) + h²Σ‖|∇χ|ψ‖²| / ‖ψ‖².
    pub max_residual: f64,
    pub mesh: f64,
}

const PARTITION_TOL: f64 = 1e-12;

/// Checks the localization identity for smooth random ψ vanishing on ∂Ω.
/// Q is the grid quadratic form (with the cell volume), the gradient term
/// uses the exact |∇χ| at the nodes; the residual is of order Δx².
pub fn ims_identity_check(
    field: &ScalarField,
    grid: &Grid,
    h: f64,
    partition: &[Cutoff],
    trials: usize,
    seed: u64,
) -> Result<ImsReport, QuasimodeError> {
    let d = grid.dim();
    let n = grid.interior_count();
    let pts: Vec<[f64; 2]> = (0..n).map(|k| grid.coords(grid.interior_node(k))).collect();
    let mut chi = vec![vec![0.0; n]; partition.len()];
    let mut grad_sq = vec![0.0; n];
    for (j, c) in partition.iter().enumerate() {
        for k in 0..n {
            let (v, g) = c(&pts[k][..d]);
            chi[j][k] = v;
            grad_sq[k] += g[..d].iter().map(|x| x * x).sum::<f64>();
        }
    }
    for k in 0..n {
        let s: f64 = chi.iter().map(|c| c[k] * c[k]).sum();
        if (s - 1.0).abs() > PARTITION_TOL {
            return Err(QuasimodeError::Partition(format!("Σχ² = {s} at {:?}", &pts[k][..d])));
        }
    }
    let values = evaluate_on_grid(field, grid)?;
    let es = edges(field, grid, &values.f, h);
    let cell: f64 = grid.dx.iter().product();
    let q = |psi: &[f64]| wk_spectrum::quadratic_form(&es, h, psi) * cell;
    let dom = &grid.domain;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        // low-frequency random combination times a bubble vanishing on ∂Ω
        let modes: Vec<(f64, [f64; 2], f64)> =
            (0..6).map(|_| (rng.gen_range(-1.0..1.0), [rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0)], rng.gen_range(0.0..6.3))).collect();
        let psi: Vec<f64> = pts
            .iter()
            .map(|p| {
                let bubble: f64 = (0..d).map(|a| (p[a] - dom.lower[a]) * (dom.upper[a] - p[a])).product();
                let wave: f64 = modes
                    .iter()
                    .map(|(c, k, ph)| c * ((0..d).map(|a| k[a] * p[a]).sum::<f64>() + ph).cos())
                    .sum();
                bubble * (1.0 + wave)
            })
            .collect();
        let norm: f64 = psi.iter().map(|v| v * v).sum::<f64>() * cell;
        let local: f64 = chi
            .iter()
            .map(|c| {
                let cp: Vec<f64> = psi.iter().zip(c).map(|(a, b)| a * b).collect();
                q(&cp)
            })
            .sum();
        let gradient: f64 = h * h * psi.iter().zip(&grad_sq).map(|(p, g)| p * p * g).sum::<f64>() * cell;
        worst = worst.max((q(&psi) - local + gradient).abs() / norm);
    }
    Ok(ImsReport { trials, max_residual: worst, mesh: grid.max_dx() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FanReport {
    pub trials: usize,
    pub size: usize,
    /// max over trials and j of η_j(ABC) − ‖A‖‖C‖η_j(B).
    pub max_excess: f64,
    pub pass: bool,
}

pub const FAN_SLACK: f64 = 1e-10;

/// Singular values, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Checks η_j(ABC) ≤ ‖A‖·‖C‖·η_j(B) for random Gaussian-entry triples.
pub fn fan_inequality_check(trials: usize, size: usize, seed: u64) -> Result<FanReport, QuasimodeError> {
    if size == 0 || size > 12 {
        return Err(QuasimodeError::InvalidProfile(format!("matrix size {size} outside 1..=12")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gen = |rng: &mut ChaCha8Rng| DMatrix::from_fn(size, size, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut max_excess = f64::NEG_INFINITY;
    for _ in 0..trials {
        let (a, b, c) = (gen(&mut rng), gen(&mut rng), gen(&mut rng));
        let excess = fan_excess(&a, &b, &c);
        max_excess = max_excess.max(excess);
    }
    Ok(FanReport { trials, size, max_excess, pass: max_excess <= FAN_SLACK })
}

/// max_j η_j(ABC) − ‖A‖‖C‖η_j(B).
pub fn fan_excess(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> f64 {
    let na = singular_values(a)[0];
    let nc = singular_values(c)[0];
    let sb = singular_values(b);
    let sabc = singular_values(&(a * b * c));
    sabc.iter().zip(&sb).map(|(x, y)| x - na * nc * y).fold(f64::NEG_INFINITY, f64::max)
}
