//! Coordinate conventions and loudspeaker layouts.
//!
//! Right-handed frame centred on the listener: `x` forward, `y` left, `z` up.
//! Azimuth is counterclockwise-positive seen from above (0 = straight ahead,
//! +π/2 = left), elevation is 0 on the horizontal plane and +π/2 at the zenith.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::math::{self, FRAC_PI_2, PI, TAU};

/// Polar tolerance below which the azimuth is canonicalised to 0.
const POLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Direction {
    azimuth: f64,
    elevation: f64,
}

impl Direction {
    /// Creates a direction, wrapping azimuth into (−π, π] and clamping
    /// elevation into [−π/2, π/2]. At the poles azimuth is set to 0.
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        let elevation = elevation.clamp(-FRAC_PI_2, FRAC_PI_2);
        let azimuth = if FRAC_PI_2 - elevation.abs() < POLE_EPS {
            0.0
        } else {
            math::wrap_angle(azimuth)
        };
        Self { azimuth, elevation }
    }

    pub fn from_degrees(azimuth_deg: f64, elevation_deg: f64) -> Self {
        Self::new(math::rad(azimuth_deg), math::rad(elevation_deg))
    }

    pub fn horizontal(azimuth: f64) -> Self {
        Self::new(azimuth, 0.0)
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn elevation(&self) -> f64 {
        self.elevation
    }

    /// `(cos φ cos θ, cos φ sin θ, sin φ)`.
    pub fn to_unit_vector(&self) -> Vec3 {
        let ce = math::cos(self.elevation);
        Vec3::new(
            ce * math::cos(self.azimuth),
            ce * math::sin(self.azimuth),
            math::sin(self.elevation),
        )
    }

    /// Direction of a non-zero vector. The zero vector maps to straight ahead.
    pub fn from_vector(v: Vec3) -> Self {
        let horiz = math::hypot(v.x, v.y);
        if horiz == 0.0 && v.z == 0.0 {
            return Self::new(0.0, 0.0);
        }
        Self::new(math::atan2(v.y, v.x), math::atan2(v.z, horiz))
    }

    /// Great-circle angle between two directions, in radians.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        let a = self.to_unit_vector();
        let b = other.to_unit_vector();
        // atan2 form stays accurate for tiny and near-π angles
        math::atan2(a.cross(b).norm(), a.dot(b))
    }

    /// Mirror image across the median (x-z) plane.
    pub fn mirrored(&self) -> Self {
        Self::new(-self.azimuth, self.elevation)
    }
}

/// Plain 3-vector used for unit directions and positions alike.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        math::sqrt(self.dot(self))
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self * (1.0 / n)
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Point in metres, listener at the origin.
pub type Position = Vec3;

impl Vec3 {
    /// Position from spherical coordinates (radians, metres).
    pub fn from_spherical(direction: Direction, distance: f64) -> Position {
        direction.to_unit_vector() * distance
    }

    pub fn distance_to(self, other: Position) -> f64 {
        (self - other).norm()
    }

    pub fn direction(self) -> Direction {
        Direction::from_vector(self)
    }
}

/// Layout categories after Heller et al.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayoutCategory {
    Regular,
    DiametricPairs,
    Irregular,
}

impl LayoutCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            LayoutCategory::Regular => "regular",
            LayoutCategory::DiametricPairs => "diametric-pairs",
            LayoutCategory::Irregular => "irregular",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "regular" => Some(LayoutCategory::Regular),
            "diametric-pairs" | "diametric_pairs" => Some(LayoutCategory::DiametricPairs),
            "irregular" => Some(LayoutCategory::Irregular),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("layout has no speakers")]
    EmptyLayout,
    #[error("degenerate point set: {0}")]
    Degenerate(String),
    #[error("non-finite coordinate in input")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoudspeakerLayout {
    pub name: String,
    pub category: LayoutCategory,
    pub speakers: Vec<Position>,
}

impl LoudspeakerLayout {
    pub fn new(name: impl Into<String>, category: LayoutCategory, speakers: Vec<Position>) -> Self {
        Self {
            name: name.into(),
            category,
            speakers,
        }
    }

    /// Builds a layout from `(azimuth°, elevation°, distance m)` triples.
    pub fn from_degrees(name: impl Into<String>, category: LayoutCategory, speakers: &[(f64, f64, f64)]) -> Self {
        let speakers = speakers
            .iter()
            .map(|&(az, el, d)| Position::from_spherical(Direction::from_degrees(az, el), d))
            .collect();
        Self::new(name, category, speakers)
    }

    /// Regular horizontal ring of `n` speakers, the first one at `first_azimuth`.
    pub fn ring(name: impl Into<String>, n: usize, radius: f64, first_azimuth: f64) -> Self {
        let speakers = (0..n)
            .map(|i| {
                let az = first_azimuth + TAU * i as f64 / n as f64;
                Position::from_spherical(Direction::horizontal(az), radius)
            })
            .collect();
        Self::new(name, LayoutCategory::Regular, speakers)
    }

    pub fn len(&self) -> usize {
        self.speakers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speakers.is_empty()
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.speakers.iter().map(|p| p.direction()).collect()
    }

    pub fn distances(&self) -> Vec<f64> {
        self.speakers.iter().map(|p| p.norm()).collect()
    }

    /// True when all speakers lie on the horizontal plane through the listener.
    pub fn is_horizontal(&self) -> bool {
        self.speakers.iter().all(|p| p.z.abs() <= 1e-9 * p.norm().max(1.0))
    }

    /// True when speaker distances agree within `rel_tol` of the largest one.
    pub fn is_equidistant(&self, rel_tol: f64) -> bool {
        let d = self.distances();
        let max = d.iter().cloned().fold(0.0, f64::max);
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min <= rel_tol * max
    }

    pub fn mean_distance(&self) -> f64 {
        let d = self.distances();
        d.iter().sum::<f64>() / d.len().max(1) as f64
    }

    /// Named presets used by the CLI and tests.
    pub fn preset(name: &str) -> Option<Self> {
        let layout = match name {
            "stereo" => Self::from_degrees(
                "stereo",
                LayoutCategory::Irregular,
                &[(30.0, 0.0, 2.0), (-30.0, 0.0, 2.0)],
            ),
            "quad" => Self::from_degrees(
                "quad",
                LayoutCategory::Regular,
                &[
                    (45.0, 0.0, 2.0),
                    (135.0, 0.0, 2.0),
                    (-135.0, 0.0, 2.0),
                    (-45.0, 0.0, 2.0),
                ],
            ),
            "5.0" | "itu-5.0" => Self::from_degrees(
                "itu-5.0",
                LayoutCategory::Irregular,
                &[
                    (30.0, 0.0, 2.0),
                    (-30.0, 0.0, 2.0),
                    (0.0, 0.0, 2.0),
                    (110.0, 0.0, 2.0),
                    (-110.0, 0.0, 2.0),
                ],
            ),
            "hexagon" => Self::ring("hexagon", 6, 2.0, 0.0),
            "octagon" => Self::ring("octagon", 8, 2.0, 0.0),
            "cube" => {
                let e = math::atan(1.0 / math::sqrt(2.0));
                let mut spk = Vec::new();
                for &el in &[e, -e] {
                    for i in 0..4 {
                        let az = PI / 4.0 + FRAC_PI_2 * i as f64;
                        spk.push(Position::from_spherical(Direction::new(az, el), 2.0));
                    }
                }
                Self::new("cube", LayoutCategory::Regular, spk)
            }
            _ => return None,
        };
        Some(layout)
    }

    pub const PRESETS: &'static [&'static str] = &["stereo", "quad", "5.0", "hexagon", "octagon", "cube"];
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayoutIssue {
    DuplicatePosition {
        first: usize,
        second: usize,
    },
    ZeroDistance {
        speaker: usize,
    },
    NonFinite {
        speaker: usize,
    },
    UnequalRadius {
        speaker: usize,
        distance: f64,
        expected: f64,
    },
    UnequalSpacing {
        speaker: usize,
        spacing_deg: f64,
        expected_deg: f64,
    },
    UnpairedSpeaker {
        speaker: usize,
    },
}

impl core::fmt::Display for LayoutIssue {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LayoutIssue::DuplicatePosition { first, second } => {
                write!(f, "speakers {first} and {second} share a position")
            }
            LayoutIssue::ZeroDistance { speaker } => {
                write!(f, "speaker {speaker} sits at the listener position")
            }
            LayoutIssue::NonFinite { speaker } => {
                write!(f, "speaker {speaker} has a non-finite coordinate")
            }
            LayoutIssue::UnequalRadius {
                speaker,
                distance,
                expected,
            } => write!(
                f,
                "speaker {speaker} is at {distance} m, regular layout expects {expected} m"
            ),
            LayoutIssue::UnequalSpacing {
                speaker,
                spacing_deg,
                expected_deg,
            } => write!(
                f,
                "gap after speaker {speaker} is {spacing_deg} deg, regular ring expects {expected_deg} deg"
            ),
            LayoutIssue::UnpairedSpeaker { speaker } => {
                write!(f, "speaker {speaker} has no diametrically opposite partner")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayoutReport {
    pub issues: Vec<LayoutIssue>,
}

impl LayoutReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.issues.iter().map(|i| i.to_string()).collect()
    }
}

const REL_TOL: f64 = 1e-6;

/// Geometric checks for a layout against its declared category.
///
/// Speaker-count requirements of individual decoders are checked where the
/// decoder is built, not here.
pub fn validate_layout(layout: &LoudspeakerLayout) -> Result<LayoutReport, GeometryError> {
    if layout.speakers.is_empty() {
        return Err(GeometryError::EmptyLayout);
    }
    let mut issues = Vec::new();
    let spk = &layout.speakers;
    for (i, p) in spk.iter().enumerate() {
        if !p.is_finite() {
            issues.push(LayoutIssue::NonFinite { speaker: i });
        } else if p.norm() == 0.0 {
            issues.push(LayoutIssue::ZeroDistance { speaker: i });
        }
    }
    for i in 0..spk.len() {
        for j in i + 1..spk.len() {
            let scale = spk[i].norm().max(spk[j].norm()).max(1.0);
            if spk[i].distance_to(spk[j]) <= 1e-9 * scale {
                issues.push(LayoutIssue::DuplicatePosition { first: i, second: j });
            }
        }
    }
    if !issues.is_empty() {
        return Ok(LayoutReport { issues });
    }

    match layout.category {
        LayoutCategory::Regular => check_regular(layout, &mut issues),
        LayoutCategory::DiametricPairs => check_diametric(layout, &mut issues),
        LayoutCategory::Irregular => {}
    }
    Ok(LayoutReport { issues })
}

fn check_regular(layout: &LoudspeakerLayout, issues: &mut Vec<LayoutIssue>) {
    let dist = layout.distances();
    let reference = dist.iter().cloned().fold(0.0, f64::max);
    for (i, &d) in dist.iter().enumerate() {
        if (reference - d).abs() > REL_TOL * reference {
            issues.push(LayoutIssue::UnequalRadius {
                speaker: i,
                distance: d,
                expected: reference,
            });
        }
    }
    if layout.is_horizontal() && layout.len() >= 2 {
        let mut az: Vec<(usize, f64)> = layout
            .directions()
            .iter()
            .enumerate()
            .map(|(i, d)| (i, math::wrap_positive(d.azimuth())))
            .collect();
        az.sort_by(|a, b| a.1.total_cmp(&b.1));
        let expected = TAU / az.len() as f64;
        for k in 0..az.len() {
            let next = az[(k + 1) % az.len()].1 + if k + 1 == az.len() { TAU } else { 0.0 };
            let gap = next - az[k].1;
            if (gap - expected).abs() > REL_TOL {
                issues.push(LayoutIssue::UnequalSpacing {
                    speaker: az[k].0,
                    spacing_deg: math::deg(gap),
                    expected_deg: math::deg(expected),
                });
            }
        }
    } else if layout.len() >= 2 {
        // Polyhedra: every speaker must see its nearest neighbour at the same angle.
        let dirs = layout.directions();
        let nearest: Vec<f64> = dirs
            .iter()
            .enumerate()
            .map(|(i, d)| {
                dirs.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, o)| d.angle_to(o))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let expected = nearest[0];
        for (i, &a) in nearest.iter().enumerate() {
            if (a - expected).abs() > REL_TOL {
                issues.push(LayoutIssue::UnequalSpacing {
                    speaker: i,
                    spacing_deg: math::deg(a),
                    expected_deg: math::deg(expected),
                });
            }
        }
    }
}

fn check_diametric(layout: &LoudspeakerLayout, issues: &mut Vec<LayoutIssue>) {
    let dirs = layout.directions();
    let mut partner: Vec<Option<usize>> = alloc::vec![None; dirs.len()];
    for i in 0..dirs.len() {
        if partner[i].is_some() {
            continue;
        }
        let found =
            (i + 1..dirs.len()).find(|&j| partner[j].is_none() && (PI - dirs[i].angle_to(&dirs[j])).abs() <= REL_TOL);
        match found {
            Some(j) => {
                partner[i] = Some(j);
                partner[j] = Some(i);
            }
            None => issues.push(LayoutIssue::UnpairedSpeaker { speaker: i }),
        }
    }
}
