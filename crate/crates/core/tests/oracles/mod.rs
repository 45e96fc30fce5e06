//! Independent reference implementations used to check the library.
//! They favour obviousness over speed and share no code with the crate.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Unit-power tangent-law gains found by bisection on `g1` with
/// `g2 = √(1 − g1²)`: `(g1 − g2)/(g1 + g2) = tan θ / tan φ`.
pub fn tangent_law_bisection(theta: f64, phi: f64) -> (f64, f64) {
    let target = theta.tan() / phi.tan();
    let f = |g1: f64| {
        let g2 = (1.0 - g1 * g1).max(0.0).sqrt();
        (g1 - g2) / (g1 + g2) - target
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g1 = 0.5 * (lo + hi);
    (g1, (1.0 - g1 * g1).max(0.0).sqrt())
}

/// Direct-form linear convolution, full length `x.len() + h.len() − 1`.
pub fn naive_convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len() + h.len() - 1];
    for (i, xv) in x.iter().enumerate() {
        for (k, hv) in h.iter().enumerate() {
            y[i + k] += xv * hv;
        }
    }
    y
}

/// Every pair of azimuth-adjacent speakers whose arc contains `target`
/// (degrees). Found by checking all pairs, not by sorting.
pub fn enclosing_pairs(azimuths_deg: &[f64], target: f64) -> Vec<(usize, usize)> {
    let n = azimuths_deg.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            // arc from i counter-clockwise to j
            let span = (azimuths_deg[j] - azimuths_deg[i]).rem_euclid(360.0);
            if span == 0.0 {
                continue;
            }
            let adjacent = (0..n).all(|k| {
                let s = (azimuths_deg[k] - azimuths_deg[i]).rem_euclid(360.0);
                k == i || k == j || s == 0.0 || s >= span
            });
            let offset = (target - azimuths_deg[i]).rem_euclid(360.0);
            if adjacent && (offset <= span + 1e-9 || (360.0 - offset) < 1e-9) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Distance from `p` to segment `ab`, minimised over the segment parameter.
pub fn closest_on_segment(a: [f64; 3], b: [f64; 3], p: [f64; 3]) -> f64 {
    golden_min(|t| dist(lerp(a, b, t), p), 0.0, 1.0)
}

/// Minimum of a convex function on `[lo, hi]` by golden-section search.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2).min(f(lo)).min(f(hi))
}

/// Distance from `p` to triangle `abc` by nested golden-section search over
/// barycentric coordinates (the distance is convex in both).
pub fn distance_to_triangle(a: [f64; 3], b: [f64; 3], c: [f64; 3], p: [f64; 3]) -> f64 {
    // point(u, v) = a + u (b − a) + v (c − a), u, v ≥ 0, u + v ≤ 1
    let point = |u: f64, v: f64| {
        [
            a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]),
            a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1]),
            a[2] + u * (b[2] - a[2]) + v * (c[2] - a[2]),
        ]
    };
    let inner = |u: f64| golden_min(|v| dist(point(u, v), p), 0.0, (1.0 - u).max(0.0));
    golden_min(inner, 0.0, 1.0)
}

/// Coarse distance estimate from a dense grid over the triangle.
pub fn sampled_distance_to_triangle(a: [f64; 3], b: [f64; 3], c: [f64; 3], p: [f64; 3], n: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..=n {
        for j in 0..=(n - i) {
            let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
            let q = [
                a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]),
                a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1]),
                a[2] + u * (b[2] - a[2]) + v * (c[2] - a[2]),
            ];
            best = best.min(dist(q, p));
        }
    }
    best
}

pub fn lerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [
        a[0] + (b[0] - a[0]) * t,
        a[1] + (b[1] - a[1]) * t,
        a[2] + (b[2] - a[2]) * t,
    ]
}

pub fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Coefficients (ascending powers) of the Legendre polynomial `P_n`,
/// from Bonnet's recursion on coefficient vectors.
pub fn legendre_poly(n: usize) -> Vec<f64> {
    let mut p0 = vec![1.0];
    if n == 0 {
        return p0;
    }
    let mut p1 = vec![0.0, 1.0];
    for k in 1..n {
        // (k+1) P_{k+1} = (2k+1) x P_k − k P_{k−1}
        let mut next = vec![0.0; k + 2];
        for (i, c) in p1.iter().enumerate() {
            next[i + 1] += (2 * k + 1) as f64 * c;
        }
        for (i, c) in p0.iter().enumerate() {
            next[i] -= k as f64 * c;
        }
        next.iter_mut().for_each(|c| *c /= (k + 1) as f64);
        p0 = p1;
        p1 = next;
    }
    p1
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// SN3D associated Legendre function without the Condon–Shortley phase:
/// `√((2 − δ_m0)(n−m)!/(n+m)!) (1 − x²)^{m/2} dᵐ/dxᵐ P_n(x)`.
pub fn sn3d_legendre(n: usize, m: usize, x: f64) -> f64 {
    let mut c = legendre_poly(n);
    for _ in 0..m {
        c = c.iter().enumerate().skip(1).map(|(i, v)| i as f64 * v).collect();
        if c.is_empty() {
            return 0.0;
        }
    }
    let poly: f64 = c.iter().rev().fold(0.0, |acc, v| acc * x + v);
    let delta = if m == 0 { 1.0 } else { 2.0 };
    let norm = (delta * factorial(n - m) / factorial(n + m)).sqrt();
    norm * (1.0 - x * x).powf(m as f64 / 2.0) * poly
}

/// Real SN3D spherical harmonic of degree `n`, order `m`, σ = ±1, with
/// elevation measured from the horizontal plane.
pub fn sn3d_harmonic(n: usize, m: usize, sigma: i8, az: f64, el: f64) -> f64 {
    let trig = if sigma >= 0 {
        (m as f64 * az).cos()
    } else {
        (m as f64 * az).sin()
    };
    sn3d_legendre(n, m, el.sin()) * trig
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Supporting edges of a planar point set (z ignored): pairs with every
/// other point on one side. Outward normal sign is returned with the pair.
pub fn supporting_edges(points: &[[f64; 3]]) -> Vec<(usize, usize, f64)> {
    let n = points.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (points[i], points[j]);
            let side = |p: [f64; 3]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
            let (mut pos, mut neg) = (false, false);
            for (k, &p) in points.iter().enumerate() {
                if k == i || k == j {
                    continue;
                }
                let s = side(p);
                pos |= s > 1e-12;
                neg |= s < -1e-12;
            }
            if !(pos && neg) {
                out.push((i, j, if pos { -1.0 } else { 1.0 }));
            }
        }
    }
    out
}

/// Supporting triangles of a 3-D point set, with outward unit normals.
pub fn supporting_triangles(points: &[[f64; 3]]) -> Vec<([usize; 3], [f64; 3])> {
    let n = points.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let nrm = cross(sub(points[j], points[i]), sub(points[k], points[i]));
                let len = dot(nrm, nrm).sqrt();
                if len < 1e-12 {
                    continue;
                }
                let nrm = [nrm[0] / len, nrm[1] / len, nrm[2] / len];
                let (mut pos, mut neg) = (false, false);
                for &p in points {
                    let s = dot(nrm, sub(p, points[i]));
                    pos |= s > 1e-12;
                    neg |= s < -1e-12;
                }
                if !(pos && neg) {
                    let sign = if pos { -1.0 } else { 1.0 };
                    out.push(([i, j, k], [nrm[0] * sign, nrm[1] * sign, nrm[2] * sign]));
                }
            }
        }
    }
    out
}

/// Distance from `p` to the convex hull of a planar point set, in the
/// plane; zero inside.
pub fn planar_hull_distance(points: &[[f64; 3]], p: [f64; 3]) -> f64 {
    let edges = supporting_edges(points);
    let flat = |q: [f64; 3]| [q[0], q[1], 0.0];
    let outside = edges.iter().any(|&(i, j, sign)| {
        let (a, b) = (points[i], points[j]);
        sign * ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) > 1e-12
    });
    if !outside {
        return 0.0;
    }
    edges
        .iter()
        .map(|&(i, j, _)| closest_on_segment(flat(points[i]), flat(points[j]), flat(p)))
        .fold(f64::INFINITY, f64::min)
}

/// Distance from `p` to the convex hull of a full-rank 3-D point set;
/// zero inside. Faces are bracketed on a coarse grid before refinement.
pub fn solid_hull_distance(points: &[[f64; 3]], faces: &[([usize; 3], [f64; 3])], p: [f64; 3]) -> f64 {
    let outside = faces.iter().any(|(f, n)| dot(*n, sub(p, points[f[0]])) > 1e-12);
    if !outside {
        return 0.0;
    }
    const GRID: usize = 12;
    let coarse: Vec<(f64, f64)> = faces
        .iter()
        .map(|(f, _)| {
            let (a, b, c) = (points[f[0]], points[f[1]], points[f[2]]);
            let edge = dist(a, b).max(dist(b, c)).max(dist(a, c));
            (sampled_distance_to_triangle(a, b, c, p, GRID), edge / GRID as f64)
        })
        .collect();
    let best = coarse.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    faces
        .iter()
        .zip(&coarse)
        .filter(|(_, c)| c.0 - c.1 <= best)
        .map(|((f, _), _)| distance_to_triangle(points[f[0]], points[f[1]], points[f[2]], p))
        .fold(f64::INFINITY, f64::min)
}
