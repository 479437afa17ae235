//! Oracles shared by the integration tests. Nothing here calls into the
//! library's quadrature, so agreement with it is evidence rather than
//! tautology.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let k = k as f64;
                (p0, p1) = (p1, ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k);
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        rule.push((z, 2.0 / ((1.0 - z * z) * dp * dp)));
    }
    rule
}

/// Composite Gauss-Legendre on `[lo, hi]` with panels shrinking
/// geometrically toward both ends, so endpoint singularities of
/// `(b−t)^α` type still converge fast. Split at interior kinks first.
pub fn graded_integral(f: impl Fn(f64) -> f64, lo: f64, hi: f64, breaks: &[f64]) -> f64 {
    let rule = gauss_legendre(20);
    let mut points = vec![lo];
    points.extend(breaks.iter().copied().filter(|&p| p > lo && p < hi));
    points.push(hi);
    let mut total = 0.0;
    for w in points.windows(2) {
        let (l, r) = (w[0], w[1]);
        let mid = 0.5 * (l + r);
        let mut panels = Vec::new();
        let mut edge = mid;
        let mut half = 0.5 * (r - l);
        for _ in 0..60 {
            half *= 0.5;
            panels.push((edge - half, edge));
            panels.push((mid + (mid - edge), mid + (mid - edge) + half));
            edge -= half;
        }
        panels.push((l, edge));
        panels.push((mid + (mid - edge), r));
        for (p, q) in panels {
            if q <= p {
                continue;
            }
            let (c, h) = (0.5 * (p + q), 0.5 * (q - p));
            total += rule.iter().map(|&(z, w)| w * f(c + h * z)).sum::<f64>() * h;
        }
    }
    total
}

/// `∫ₐᵇ |t−x| ((b−t)/(b−a))^α dt`
pub fn m_integral(a: f64, b: f64, x: f64, alpha: f64) -> f64 {
    let w = |t: f64| ((b - t) / (b - a)).max(0.0).powf(alpha);
    graded_integral(|t| (t - x).abs() * w(t), a, b, &[x])
}

/// `∫ₐˣ (t−a) w(t) dt + ∫ₓᵇ (b−t) w(t) dt`
pub fn a_integral(a: f64, b: f64, x: f64, alpha: f64) -> f64 {
    let w = |t: f64| ((b - t) / (b - a)).max(0.0).powf(alpha);
    graded_integral(|t| if t < x { (t - a) * w(t) } else { (b - t) * w(t) }, a, b, &[x])
}

/// Plain convexity on the grid the library uses: every `(x, y, t)` with
/// `x, y ∈ grid(lo, hi, n)` and `t ∈ grid(0, 1, nt)`.
pub fn plain_convex_on_grid(h: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize, nt: usize) -> bool {
    let pts = |l: f64, r: f64, n: usize| -> Vec<f64> {
        (0..n).map(|k| if k == n - 1 { r } else { l + (r - l) * (k as f64 / (n - 1) as f64) }).collect()
    };
    let xs = pts(lo, hi, n);
    let ts = pts(0.0, 1.0, nt);
    for &x in &xs {
        for &y in &xs {
            for &t in &ts {
                let rhs = t * h(x) + (1.0 - t) * h(y);
                let lhs = h(t * x + (1.0 - t) * y);
                if lhs - rhs > 1e-12 * (1.0 + rhs.abs()) {
                    return false;
                }
            }
        }
    }
    true
}

/// One function per registry family, all defined on `[0, 1]`.
pub const REGISTRY_SAMPLES: [&str; 16] = [
    "const:2",
    "affine:1:-3",
    "monomial:2",
    "monomial:3",
    "negmonomial:2",
    "power:1:1.5",
    "power:1:0.5",
    "poly:0:1:-1",
    "poly:1:0:2",
    "exp",
    "exp:-2",
    "sin",
    "sin:4",
    "cos",
    "pwl:0:1:0.5:0:1:1",
    "step:0:0.5:1:0:1",
];
