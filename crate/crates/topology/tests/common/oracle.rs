//! Brute-force 1-D labeling on a fine sample: wells are explicit intervals.

pub struct Sample {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

pub fn sample(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Sample {
    let x: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    let f = x.iter().map(|&t| f(t)).collect();
    Sample { x, f }
}

pub fn interior_extrema(s: &Sample, maxima: bool) -> Vec<usize> {
    (1..s.f.len() - 1)
        .filter(|&i| {
            let (l, c, r) = (s.f[i - 1], s.f[i], s.f[i + 1]);
            if maxima {
                c > l && c >= r
            } else {
                c < l && c <= r
            }
        })
        .collect()
}

/// Open interval of {f < level} containing index i, as index bounds of
/// the first points at or above the level (or the domain ends).
pub fn interval(s: &Sample, i: usize, level: f64) -> (usize, usize) {
    let mut l = i;
    while l > 0 && s.f[l] < level {
        l -= 1;
    }
    let mut r = i;
    while r + 1 < s.f.len() && s.f[r] < level {
        r += 1;
    }
    (l, r)
}

/// Returns (E, positions of j(x)) for every labeled minimum.
pub fn labeling(s: &Sample, tol: f64) -> Vec<(f64, Vec<f64>)> {
    let n = s.f.len();
    let minima = interior_extrema(s, false);
    let maxima = interior_extrema(s, true);
    let mut out = Vec::new();
    let mut labeled: Vec<usize> = Vec::new();
    let mut wells: Vec<(usize, usize, f64)> = Vec::new();
    for &m in &minima {
        let left = s.f[..=m].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let right = s.f[m..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lambda = left.min(right);
        let (l, r) = interval(s, m, lambda);
        if wells.iter().any(|w| w.0 == l && w.1 == r) {
            continue;
        }
        wells.push((l, r, lambda));
        let ms: Vec<usize> = minima.iter().copied().filter(|&q| q > l && q < r).collect();
        let rep = *ms.iter().min_by(|&&a, &&b| s.f[a].total_cmp(&s.f[b])).unwrap();
        labeled.push(rep);
        let mut j = Vec::new();
        for e in [l, r] {
            if (s.f[e] - lambda).abs() <= tol && (e == 0 || e == n - 1 || maxima.contains(&e)) {
                j.push(s.x[e]);
            }
        }
        out.push((lambda - s.f[rep], j));
    }
    let mut kappa_prev = f64::INFINITY;
    loop {
        let inner: Vec<usize> = maxima
            .iter()
            .copied()
            .filter(|&z| wells.iter().any(|w| z > w.0 && z < w.1 && s.f[z] < w.2 - tol))
            .filter(|&z| s.f[z] < kappa_prev - tol)
            .collect();
        let Some(kappa) = inner.iter().map(|&z| s.f[z]).reduce(f64::max) else { break };
        let mut seen: Vec<(usize, usize)> = Vec::new();
        for &m in &minima {
            if s.f[m] >= kappa {
                continue;
            }
            let (l, r) = interval(s, m, kappa);
            if seen.contains(&(l, r)) {
                continue;
            }
            seen.push((l, r));
            let ms: Vec<usize> = minima.iter().copied().filter(|&q| q > l && q < r).collect();
            if ms.iter().any(|q| labeled.contains(q)) {
                continue;
            }
            let rep = *ms.iter().min_by(|&&a, &&b| s.f[a].total_cmp(&s.f[b])).unwrap();
            labeled.push(rep);
            let j: Vec<f64> = [l, r]
                .into_iter()
                .filter(|e| maxima.contains(e) && (s.f[*e] - kappa).abs() <= tol)
                .map(|e| s.x[e])
                .collect();
            out.push((kappa - s.f[rep], j));
        }
        kappa_prev = kappa;
    }
    out
}
