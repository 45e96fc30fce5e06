//! Convex hulls of speaker positions and closest-point queries against them.
//!
//! 2-D hulls use Andrew's monotone chain. 3-D hulls are grown facet by facet
//! from a supporting plane, wrapping around each open edge; coplanar points
//! are merged into one polygonal facet which is then fan-triangulated.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::geometry::{GeometryError, Position, Vec3};

/// Orientation epsilon, relative to the squared scale of the point set.
const ORIENT_EPS: f64 = 1e-12;
/// Plane-membership tolerance, relative to the scale of the point set.
const PLANE_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimensionality {
    Two,
    Three,
}

impl Dimensionality {
    pub fn from_u8(d: u8) -> Option<Self> {
        match d {
            2 => Some(Dimensionality::Two),
            3 => Some(Dimensionality::Three),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Dimensionality::Two => 2,
            Dimensionality::Three => 3,
        }
    }
}

/// Orthonormal frame of a plane: `origin + s·u + t·v + h·normal`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PlaneFrame {
    origin: Vec3,
    u: Vec3,
    v: Vec3,
    normal: Vec3,
}

impl PlaneFrame {
    fn xy() -> Self {
        Self {
            origin: Vec3::ZERO,
            u: Vec3::new(1.0, 0.0, 0.0),
            v: Vec3::new(0.0, 1.0, 0.0),
            normal: Vec3::new(0.0, 0.0, 1.0),
        }
    }

    fn from_normal(origin: Vec3, normal: Vec3) -> Self {
        let n = normal.normalized();
        let helper = if n.x.abs() < 0.9 {
            Vec3::new(1.0, 0.0, 0.0)
        } else {
            Vec3::new(0.0, 1.0, 0.0)
        };
        let u = helper.cross(n).normalized();
        let v = n.cross(u);
        Self {
            origin,
            u,
            v,
            normal: n,
        }
    }

    fn project(&self, p: Vec3) -> (f64, f64, f64) {
        let d = p - self.origin;
        (d.dot(self.u), d.dot(self.v), d.dot(self.normal))
    }

    fn lift(&self, s: f64, t: f64, h: f64) -> Vec3 {
        self.origin + self.u * s + self.v * t + self.normal * h
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Facet {
    normal: Vec3,
    offset: f64,
    /// Polygon vertices, counterclockwise seen from outside.
    polygon: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Point(usize),
    Segment(usize, usize),
    Polygon {
        frame: PlaneFrame,
        /// When set, the offset along the frame normal is ignored (planar 2-D mode).
        planar: bool,
        ring: Vec<usize>,
        coords: Vec<(f64, f64)>,
    },
    Polyhedron {
        facets: Vec<Facet>,
        faces: Vec<[usize; 3]>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexHull {
    points: Vec<Position>,
    shape: Shape,
}

/// Convex hull of `points`. Degenerate inputs (collinear in 2-D, coplanar in
/// 3-D) are rejected; see [`ConvexHull::lenient`] for the fallback variant.
pub fn convex_hull(points: &[Position], dim: Dimensionality) -> Result<ConvexHull, GeometryError> {
    check_finite(points)?;
    match dim {
        Dimensionality::Two => {
            if points.len() < 3 {
                return Err(GeometryError::Degenerate(format!(
                    "2-D hull needs at least 3 points, got {}",
                    points.len()
                )));
            }
            let hull = planar_hull(points, PlaneFrame::xy(), true);
            match hull {
                Some(shape) => Ok(ConvexHull {
                    points: points.to_vec(),
                    shape,
                }),
                None => Err(GeometryError::Degenerate(format!(
                    "all {} points are collinear in the x-y plane",
                    points.len()
                ))),
            }
        }
        Dimensionality::Three => {
            if points.len() < 4 {
                return Err(GeometryError::Degenerate(format!(
                    "3-D hull needs at least 4 points, got {}",
                    points.len()
                )));
            }
            match affine_rank(points) {
                3 => Ok(ConvexHull {
                    points: points.to_vec(),
                    shape: polyhedron(points),
                }),
                2 => Err(GeometryError::Degenerate(format!(
                    "all {} points are coplanar",
                    points.len()
                ))),
                _ => Err(GeometryError::Degenerate(format!(
                    "all {} points are collinear",
                    points.len()
                ))),
            }
        }
    }
}

impl ConvexHull {
    /// Hull that falls back to a lower-dimensional shape (polygon in the
    /// spanned plane, segment, or single point) instead of failing.
    pub fn lenient(points: &[Position], dim: Dimensionality) -> Result<ConvexHull, GeometryError> {
        check_finite(points)?;
        if points.is_empty() {
            return Err(GeometryError::EmptyLayout);
        }
        let planar = dim == Dimensionality::Two;
        let working: Vec<Vec3> = if planar {
            points.iter().map(|p| Vec3::new(p.x, p.y, 0.0)).collect()
        } else {
            points.to_vec()
        };
        let rank = affine_rank(&working);
        let shape = match rank {
            3 => polyhedron(points),
            2 => {
                let frame = if planar {
                    PlaneFrame::xy()
                } else {
                    spanned_plane(&working)
                };
                planar_hull(points, frame, planar).expect("rank-2 set has a polygon hull")
            }
            1 => {
                let (a, b) = extreme_pair(&working);
                Shape::Segment(a, b)
            }
            _ => Shape::Point(0),
        };
        Ok(ConvexHull {
            points: points.to_vec(),
            shape,
        })
    }

    pub fn points(&self) -> &[Position] {
        &self.points
    }

    /// Indices of hull vertices into the input points, in deterministic order.
    pub fn vertex_indices(&self) -> Vec<usize> {
        match &self.shape {
            Shape::Point(i) => alloc::vec![*i],
            Shape::Segment(a, b) => alloc::vec![*a, *b],
            Shape::Polygon { ring, .. } => ring.clone(),
            Shape::Polyhedron { faces, .. } => {
                let set: BTreeSet<usize> = faces.iter().flatten().copied().collect();
                set.into_iter().collect()
            }
        }
    }

    pub fn vertices(&self) -> Vec<Position> {
        self.vertex_indices().into_iter().map(|i| self.points[i]).collect()
    }

    /// Triangular faces (3-D hulls only), as indices into the input points,
    /// counterclockwise seen from outside.
    pub fn faces(&self) -> &[[usize; 3]] {
        match &self.shape {
            Shape::Polyhedron { faces, .. } => faces,
            _ => &[],
        }
    }

    /// Boundary edges of a polygon hull, counterclockwise.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        match &self.shape {
            Shape::Polygon { ring, .. } => (0..ring.len()).map(|i| (ring[i], ring[(i + 1) % ring.len()])).collect(),
            Shape::Segment(a, b) => alloc::vec![(*a, *b)],
            _ => Vec::new(),
        }
    }

    /// Number of dimensions the hull actually spans (0 to 3).
    pub fn rank(&self) -> usize {
        match self.shape {
            Shape::Point(_) => 0,
            Shape::Segment(..) => 1,
            Shape::Polygon { .. } => 2,
            Shape::Polyhedron { .. } => 3,
        }
    }

    /// Largest signed distance of `p` outside any supporting half-space
    /// (≤ 0 inside). Only defined for full-dimensional hulls; for lower
    /// rank shapes the Euclidean distance to the shape is returned.
    pub fn max_violation(&self, p: Position) -> f64 {
        match &self.shape {
            Shape::Polyhedron { facets, .. } => facets
                .iter()
                .map(|f| f.normal.dot(p) - f.offset)
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Polygon {
                frame, planar, coords, ..
            } => {
                let (s, t, h) = frame.project(p);
                let mut worst = f64::NEG_INFINITY;
                for i in 0..coords.len() {
                    let a = coords[i];
                    let b = coords[(i + 1) % coords.len()];
                    let (ex, ey) = (b.0 - a.0, b.1 - a.1);
                    let len = libm::hypot(ex, ey);
                    // outward normal of a ccw edge is (ey, -ex)
                    let d = (ey * (s - a.0) - ex * (t - a.1)) / len;
                    worst = worst.max(d);
                }
                if *planar {
                    worst
                } else {
                    worst.max(h.abs())
                }
            }
            _ => self.closest_point(p).1,
        }
    }

    pub fn contains(&self, p: Position) -> bool {
        self.max_violation(p) <= 0.0
    }

    /// Closest point of the closed hull to `p` and the distance to it.
    /// Interior points map to themselves at distance 0.
    pub fn closest_point(&self, p: Position) -> (Position, f64) {
        match &self.shape {
            Shape::Point(i) => {
                let q = self.points[*i];
                (q, q.distance_to(p))
            }
            Shape::Segment(a, b) => {
                let q = closest_on_segment(self.points[*a], self.points[*b], p);
                (q, q.distance_to(p))
            }
            Shape::Polygon {
                frame, planar, coords, ..
            } => {
                let (s, t, h) = frame.project(p);
                let (qs, qt) = closest_in_polygon(coords, (s, t));
                let d_plane = libm::hypot(qs - s, qt - t);
                if *planar {
                    (frame.lift(qs, qt, h), d_plane)
                } else {
                    (frame.lift(qs, qt, 0.0), libm::hypot(d_plane, h))
                }
            }
            Shape::Polyhedron { facets, faces } => {
                let inside = facets.iter().all(|f| f.normal.dot(p) - f.offset <= 0.0);
                if inside {
                    return (p, 0.0);
                }
                let mut best = (p, f64::INFINITY);
                for face in faces {
                    let q = closest_on_triangle(p, self.points[face[0]], self.points[face[1]], self.points[face[2]]);
                    let d = q.distance_to(p);
                    if d < best.1 {
                        best = (q, d);
                    }
                }
                best
            }
        }
    }
}

fn check_finite(points: &[Position]) -> Result<(), GeometryError> {
    if points.iter().all(|p| p.is_finite()) {
        Ok(())
    } else {
        Err(GeometryError::NonFinite)
    }
}

fn scale_of(points: &[Vec3]) -> f64 {
    let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for p in points {
        lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    (hi - lo).norm().max(f64::MIN_POSITIVE)
}

/// Indices of the two points farthest apart along the dominant axis.
fn extreme_pair(points: &[Vec3]) -> (usize, usize) {
    let mut best = (0, 0, -1.0);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = points[i].distance_to(points[j]);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    (best.0, best.1)
}

/// Dimension of the affine span (0 to 3), with scale-relative tolerances.
fn affine_rank(points: &[Vec3]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let scale = scale_of(points);
    let (a, b) = extreme_pair(points);
    let pa = points[a];
    let ab = points[b] - pa;
    if ab.norm() <= PLANE_EPS * scale {
        return 0;
    }
    let dir = ab.normalized();
    let far = points
        .iter()
        .map(|&q| (q - pa).cross(dir).norm())
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();
    if far.1 <= PLANE_EPS * scale {
        return 1;
    }
    let normal = ab.cross(points[far.0] - pa).normalized();
    let off = points.iter().map(|&q| (q - pa).dot(normal).abs()).fold(0.0, f64::max);
    if off <= PLANE_EPS * scale {
        2
    } else {
        3
    }
}

fn spanned_plane(points: &[Vec3]) -> PlaneFrame {
    let (a, b) = extreme_pair(points);
    let pa = points[a];
    let dir = (points[b] - pa).normalized();
    let far = points
        .iter()
        .map(|&q| (q - pa).cross(dir).norm())
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap()
        .0;
    PlaneFrame::from_normal(pa, (points[b] - pa).cross(points[far] - pa))
}

/// Monotone chain in the frame's (u, v) coordinates. Returns `None` when the
/// projected points are collinear.
fn planar_hull(points: &[Position], frame: PlaneFrame, planar: bool) -> Option<Shape> {
    let projected: Vec<(f64, f64)> = points
        .iter()
        .map(|&p| {
            let (s, t, _) = frame.project(p);
            (s, t)
        })
        .collect();
    let ring = monotone_chain(&projected)?;
    let coords = ring.iter().map(|&i| projected[i]).collect();
    Some(Shape::Polygon {
        frame,
        planar,
        ring,
        coords,
    })
}

fn monotone_chain(pts: &[(f64, f64)]) -> Option<Vec<usize>> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        pts[a]
            .0
            .total_cmp(&pts[b].0)
            .then(pts[a].1.total_cmp(&pts[b].1))
            .then(a.cmp(&b))
    });
    idx.dedup_by(|a, b| pts[*a] == pts[*b]);
    if idx.len() < 3 {
        return None;
    }
    let scale = {
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for &(x, y) in pts {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        libm::hypot(hi.0 - lo.0, hi.1 - lo.1)
    };
    let eps = ORIENT_EPS * scale * scale;
    let cross = |o: usize, a: usize, b: usize| {
        (pts[a].0 - pts[o].0) * (pts[b].1 - pts[o].1) - (pts[a].1 - pts[o].1) * (pts[b].0 - pts[o].0)
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for &i in &idx {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= eps {
            hull.pop();
        }
        hull.push(i);
    }
    let lower_len = hull.len() + 1;
    for &i in idx.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= eps {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    if hull.len() < 3 {
        None
    } else {
        Some(hull)
    }
}

fn polyhedron(points: &[Position]) -> Shape {
    let scale = scale_of(points);
    let eps = PLANE_EPS * scale;
    let n = points.len();
    let centroid = points.iter().fold(Vec3::ZERO, |acc, &p| acc + p) * (1.0 / n as f64);

    let outward = |a: Vec3, normal: Vec3| -> Vec3 {
        if normal.dot(centroid - a) > 0.0 {
            -normal
        } else {
            normal
        }
    };
    let supports = |a: Vec3, normal: Vec3| points.iter().all(|&q| normal.dot(q - a) <= eps);

    // First supporting plane through the lowest point.
    let start = (0..n)
        .min_by(|&i, &j| {
            let (p, q) = (points[i], points[j]);
            p.z.total_cmp(&q.z).then(p.y.total_cmp(&q.y)).then(p.x.total_cmp(&q.x))
        })
        .unwrap();
    let a = points[start];
    let mut first = None;
    'search: for j in 0..n {
        for k in j + 1..n {
            let normal = (points[j] - a).cross(points[k] - a);
            if normal.norm() <= ORIENT_EPS * scale * scale {
                continue;
            }
            let normal = outward(a, normal.normalized());
            if supports(a, normal) {
                first = Some(normal);
                break 'search;
            }
        }
    }
    let first = first.expect("non-coplanar set has a supporting plane through its lowest point");

    let mut facets: Vec<Facet> = Vec::new();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut open: Vec<(usize, usize)> = Vec::new();

    let mut add_facet = |origin: Vec3, normal: Vec3, facets: &mut Vec<Facet>, open: &mut Vec<(usize, usize)>| {
        let members: Vec<usize> = (0..n)
            .filter(|&i| normal.dot(points[i] - origin).abs() <= eps)
            .collect();
        let frame = PlaneFrame::from_normal(origin, normal);
        let coords: Vec<(f64, f64)> = members
            .iter()
            .map(|&i| {
                let (s, t, _) = frame.project(points[i]);
                (s, t)
            })
            .collect();
        let ring: Vec<usize> = match monotone_chain(&coords) {
            Some(r) => r.into_iter().map(|k| members[k]).collect(),
            None => return,
        };
        let mut key = ring.clone();
        key.sort_unstable();
        if !seen.insert(key) {
            return;
        }
        for i in 0..ring.len() {
            open.push((ring[i], ring[(i + 1) % ring.len()]));
        }
        let offset = normal.dot(points[ring[0]]);
        facets.push(Facet {
            normal,
            offset,
            polygon: ring,
        });
    };

    add_facet(a, first, &mut facets, &mut open);

    let guard = 4 * n * n + 16;
    let mut steps = 0;
    while let Some((ea, eb)) = open.pop() {
        steps += 1;
        if steps > guard {
            break;
        }
        // The neighbour facet traverses this edge as eb -> ea.
        let (pb, pa) = (points[eb], points[ea]);
        let axis = pa - pb;
        let mut c = None;
        for q in 0..n {
            if q == ea || q == eb {
                continue;
            }
            if axis.cross(points[q] - pb).norm() <= ORIENT_EPS * scale * scale {
                continue;
            }
            c = match c {
                None => Some(q),
                Some(cur) => {
                    let normal: Vec3 = axis.cross(points[cur] - pb);
                    if normal.dot(points[q] - pb) > eps * normal.norm() {
                        Some(q)
                    } else {
                        Some(cur)
                    }
                }
            };
        }
        let Some(c) = c else { continue };
        let normal = axis.cross(points[c] - pb).normalized();
        add_facet(pb, normal, &mut facets, &mut open);
    }

    let mut faces = Vec::new();
    for f in &facets {
        for i in 1..f.polygon.len() - 1 {
            faces.push([f.polygon[0], f.polygon[i], f.polygon[i + 1]]);
        }
    }
    Shape::Polyhedron { facets, faces }
}

fn closest_on_segment(a: Vec3, b: Vec3, p: Vec3) -> Vec3 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

fn closest_in_polygon(coords: &[(f64, f64)], p: (f64, f64)) -> (f64, f64) {
    let inside = (0..coords.len()).all(|i| {
        let a = coords[i];
        let b = coords[(i + 1) % coords.len()];
        (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0
    });
    if inside {
        return p;
    }
    let mut best = (p, f64::INFINITY);
    for i in 0..coords.len() {
        let a = coords[i];
        let b = coords[(i + 1) % coords.len()];
        let q = closest_on_segment(
            Vec3::new(a.0, a.1, 0.0),
            Vec3::new(b.0, b.1, 0.0),
            Vec3::new(p.0, p.1, 0.0),
        );
        let d = libm::hypot(q.x - p.0, q.y - p.1);
        if d < best.1 {
            best = ((q.x, q.y), d);
        }
    }
    best.0
}

/// Closest point on triangle `abc` to `p` (Ericson, Real-Time Collision Detection).
fn closest_on_triangle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}
