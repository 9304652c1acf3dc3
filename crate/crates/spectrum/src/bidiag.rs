//! High relative accuracy eigenvalues in 1-D.
//!
//! A = BᵀB where B is the (N+1)×N lower-bidiagonal edge matrix. Givens
//! rotations reduce B to an upper-bidiagonal R using only products and
//! hypot, so A = RᵀR = L·D·Lᵀ with D = diag(r_i²), L unit lower bidiagonal
//! with l_i = t_i/r_i. Bisection on the stationary qd negcount of L·D·Lᵀ − σ
//! then yields every eigenvalue to high relative accuracy.

use crate::operator::Edge;

pub struct Ldl {
    pub d: Vec<f64>,
    pub l: Vec<f64>,
}

/// L·D·Lᵀ of A for a 1-D edge list.
pub fn ldl_from_edges(n: usize, edges: &[Edge], h: f64) -> Ldl {
    // edge e joins interior nodes e−1 and e, e = 0..=n; row e of B holds
    // g_b at column e and g_a at column e−1
    let mut diag = vec![0.0; n]; // B[e][e]
    let mut sub = vec![0.0; n]; // B[e+1][e]
    for e in edges {
        // a is the left node, b the right node
        match (e.ia, e.ib) {
            (Some(i), Some(j)) => {
                debug_assert_eq!(j, i + 1);
                sub[i] = e.ga(h);
                diag[j] = e.gb(h);
            }
            (None, Some(j)) => diag[j] = e.gb(h),
            (Some(i), None) => sub[i] = e.ga(h),
            (None, None) => {}
        }
    }
    // B (rows = edges 0..=n): row e holds diag[e] at column e (e < n) and
    // sub[e−1] at column e−1 (e ≥ 1). Signs are irrelevant for singular values.
    let mut r = vec![0.0; n];
    let mut t = vec![0.0; n.saturating_sub(1)];
    // carry: the current top row's entry at column k after previous rotations
    let mut carry = diag[0];
    for k in 0..n {
        // rotate the carried row (entry at column k) with row k+1 (sub[k] at column k,
        // diag[k+1] at column k+1)
        let a = carry;
        let b = sub[k];
        let rk = a.hypot(b);
        r[k] = rk;
        if k + 1 < n {
            let (c, s) = if rk > 0.0 { (a / rk, b / rk) } else { (1.0, 0.0) };
            t[k] = s * diag[k + 1];
            carry = c * diag[k + 1];
        }
    }
    let d: Vec<f64> = r.iter().map(|x| x * x).collect();
    let l: Vec<f64> = t.iter().zip(&r).map(|(ti, ri)| ti / ri).collect();
    Ldl { d, l }
}

/// Number of eigenvalues of L·D·Lᵀ strictly below σ.
pub fn negcount(ldl: &Ldl, sigma: f64) -> usize {
    let n = ldl.d.len();
    let mut count = 0;
    let mut s = -sigma;
    for i in 0..n {
        let mut dplus = ldl.d[i] + s;
        if dplus == 0.0 {
            dplus = -f64::MIN_POSITIVE;
        }
        if dplus < 0.0 {
            count += 1;
        }
        if i + 1 < n {
            let lplus = ldl.d[i] * ldl.l[i] / dplus;
            s = lplus * ldl.l[i] * s - sigma;
            if !s.is_finite() {
                // dplus underflowed relative to d·l; the next pivot is dominated by −σ
                s = -sigma;
            }
        }
    }
    count
}

/// The j-th smallest eigenvalue (0-based) by bisection to relative width `rtol`,
/// geometric while the bracket spans more than a factor two.
pub fn eigenvalue(ldl: &Ldl, j: usize, upper: f64, rtol: f64) -> f64 {
    let mut lo = f64::MIN_POSITIVE;
    let mut hi = upper;
    if negcount(ldl, lo) > j {
        return 0.0;
    }
    for _ in 0..4000 {
        if hi - lo <= rtol * hi {
            break;
        }
        let mid = if hi > 2.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if negcount(ldl, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
