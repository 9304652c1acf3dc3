//! Lanczos on A⁻¹ with full reorthogonalization, then deflated inverse
//! iteration on each Ritz vector.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::SpectrumError;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Two passes of classical Gram–Schmidt against `basis` (orthonormal).
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
    }
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng, basis: &[Vec<f64>]) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.5).collect();
        orthogonalize(&mut v, basis);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return v;
        }
    }
}

pub struct Pairs {
    pub vectors: Vec<Vec<f64>>,
    pub steps: usize,
}

/// Ritz values separated from the top one by more than this factor wait for
/// a later phase: the operator's rounding noise is ε times the top value.
const PHASE_RANGE: f64 = 1e-4;

/// Largest `k` eigenpairs of the symmetric positive operator `apply`
/// (here A⁻¹). Runs in phases: each phase is a Lanczos run on the operator
/// projected away from the vectors locked so far, and locks the converged
/// Ritz vectors within [`PHASE_RANGE`] of its top Ritz value. The search
/// runs orthogonal to `known` (orthonormal), which is not returned.
pub fn largest(
    known: &[Vec<f64>],
    n: usize,
    k: usize,
    tol: f64,
    max_extensions: usize,
    seed: u64,
    apply: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<Pairs, SpectrumError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locked: Vec<Vec<f64>> = known.to_vec();
    let k = k + known.len();
    let mut steps = 0;
    let mut extensions = 0;
    while locked.len() < k {
        let projected = |x: &[f64]| {
            let mut y = apply(x);
            orthogonalize(&mut y, &locked);
            y
        };
        let found = phase(n - locked.len(), n, k - locked.len(), tol, max_extensions, &mut extensions, &mut rng, &locked, projected)?;
        steps += found.1;
        locked.extend(found.0);
    }
    locked.truncate(k);
    Ok(Pairs { vectors: locked.split_off(known.len()), steps })
}

#[allow(clippy::too_many_arguments)]
fn phase(
    room: usize,
    n: usize,
    k: usize,
    tol: f64,
    max_extensions: usize,
    extensions: &mut usize,
    rng: &mut ChaCha8Rng,
    locked: &[Vec<f64>],
    apply: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<(Vec<Vec<f64>>, usize), SpectrumError> {
    let chunk = (2 * k + 20).max(30);
    let mut q: Vec<Vec<f64>> = vec![random_unit(n, rng, locked)];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut target = chunk.min(room);
    loop {
        while alpha.len() < target {
            let j = alpha.len();
            let mut w = apply(&q[j]);
            let a = dot(&q[j], &w);
            alpha.push(a);
            orthogonalize(&mut w, locked);
            orthogonalize(&mut w, &q);
            let b = norm(&w);
            if alpha.len() == room {
                break;
            }
            let scale = alpha.iter().map(|x| x.abs()).fold(0.0, f64::max);
            if b <= 1e-12 * scale {
                // invariant subspace: continue from a fresh direction (β = 0)
                beta.push(0.0);
                let mut all = locked.to_vec();
                all.extend(q.iter().cloned());
                q.push(random_unit(n, rng, &all));
            } else {
                beta.push(b);
                w.iter_mut().for_each(|x| *x /= b);
                q.push(w);
            }
        }
        let m = alpha.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let b_last = if m < room { beta.get(m - 1).copied().unwrap_or(0.0) } else { 0.0 };
        let top = eig.eigenvalues[idx[0]];
        let ok = |i: usize| (b_last * eig.eigenvectors[(m - 1, i)]).abs() <= tol * eig.eigenvalues[i].abs();
        let take: Vec<usize> = idx
            .iter()
            .copied()
            .take(k)
            .take_while(|&i| eig.eigenvalues[i] >= PHASE_RANGE * top && ok(i))
            .collect();
        if !take.is_empty() && (take.len() == k.min(m) || m == room || eig.eigenvalues[idx[take.len()]] < PHASE_RANGE * top) {
            let vectors = take
                .iter()
                .map(|&i| {
                    let mut v = vec![0.0; n];
                    for (j, qj) in q.iter().take(m).enumerate() {
                        axpy(eig.eigenvectors[(j, i)], qj, &mut v);
                    }
                    orthogonalize(&mut v, locked);
                    let nv = norm(&v);
                    v.iter_mut().for_each(|x| *x /= nv);
                    v
                })
                .collect();
            return Ok((vectors, m));
        }
        if m == room || *extensions >= max_extensions {
            return Err(SpectrumError::NoConvergence { restarts: *extensions });
        }
        *extensions += 1;
        target = (target + chunk).min(room);
    }
}

/// Refines approximate eigenvectors of A (smallest first) by inverse
/// iteration with (A + σI)⁻¹, deflating `done` and the already refined ones.
/// Returns (λ, v) with λ = ‖v‖²/⟨v, (A + σI)⁻¹v⟩ − σ, which involves no
/// cancellation for σ ≪ λ.
pub fn refine(
    done: &[Vec<f64>],
    vectors: Vec<Vec<f64>>,
    steps: usize,
    shift: f64,
    solve: impl Fn(&[f64]) -> Vec<f64>,
) -> Vec<(f64, Vec<f64>)> {
    let mut done = done.to_vec();
    let mut out = Vec::with_capacity(vectors.len());
    for mut x in vectors {
        orthogonalize(&mut x, &done);
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let mut lambda = f64::NAN;
        for _ in 0..steps {
            let mut y = solve(&x);
            lambda = 1.0 / dot(&x, &y) - shift;
            orthogonalize(&mut y, &done);
            let ny = norm(&y);
            y.iter_mut().for_each(|v| *v /= ny);
            x = y;
        }
        let y = solve(&x);
        let inv = dot(&x, &y);
        if inv > 0.0 {
            lambda = 1.0 / inv - shift;
        }
        done.push(x.clone());
        out.push((lambda, x));
    }
    out
}
