use alloc::vec;
use alloc::vec::Vec;

use super::BinauralError;
use crate::geometry::Direction;
use crate::math::{self, TAU};
use crate::SPEED_OF_SOUND;

pub const DEFAULT_HEAD_RADIUS: f64 = 0.0875;
pub const DEFAULT_HRIR_TAPS: usize = 256;
/// Corner frequency of the contralateral head-shadow filter at 90° incidence.
const HEAD_SHADOW_CUTOFF: f64 = 1500.0;
/// Onset of the ipsilateral impulse, in samples.
const ONSET: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceClass {
    FarField,
    /// Measured at this distance in metres.
    NearField(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hrir {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub direction: Direction,
    pub distance_class: DistanceClass,
}

impl Hrir {
    pub fn new(left: Vec<f64>, right: Vec<f64>, direction: Direction) -> Result<Self, BinauralError> {
        if left.is_empty() || left.len() != right.len() {
            return Err(BinauralError::InvalidHrir("ears need equal, non-zero tap counts"));
        }
        if left.iter().chain(&right).any(|x| !x.is_finite()) {
            return Err(BinauralError::InvalidHrir("non-finite sample"));
        }
        Ok(Self {
            left,
            right,
            direction,
            distance_class: DistanceClass::FarField,
        })
    }

    /// Unit impulse on both ears.
    pub fn identity(direction: Direction) -> Self {
        Self {
            left: vec![1.0],
            right: vec![1.0],
            direction,
            distance_class: DistanceClass::FarField,
        }
    }

    pub fn taps(&self) -> usize {
        self.left.len()
    }

    pub fn ear(&self, ear: usize) -> &[f64] {
        if ear == 0 {
            &self.left
        } else {
            &self.right
        }
    }

    /// The response of the mirror-image direction on a symmetric head.
    pub fn mirrored(&self) -> Self {
        Self {
            left: self.right.clone(),
            right: self.left.clone(),
            direction: self.direction.mirrored(),
            distance_class: self.distance_class,
        }
    }
}

/// Tolerance when comparing HRIR directions and mirrored samples.
const DIRECTION_EPS: f64 = 1e-9;
const SYMMETRY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HrirSet {
    entries: Vec<Hrir>,
    azimuth_spacing: Option<f64>,
    elevation_spacing: Option<f64>,
    symmetric_head: bool,
}

impl HrirSet {
    pub fn new(entries: Vec<Hrir>, symmetric_head: bool) -> Result<Self, BinauralError> {
        if entries.is_empty() {
            return Err(BinauralError::EmptySet);
        }
        for (i, a) in entries.iter().enumerate() {
            if entries[..i]
                .iter()
                .any(|b| a.direction.angle_to(&b.direction) < DIRECTION_EPS)
            {
                return Err(duplicate(a.direction));
            }
        }
        if symmetric_head {
            for e in &entries {
                let target = e.direction.mirrored();
                let mirror = entries
                    .iter()
                    .find(|m| m.direction.angle_to(&target) < DIRECTION_EPS)
                    .ok_or(BinauralError::MissingMirror {
                        azimuth_deg: math::deg(e.direction.azimuth()),
                        elevation_deg: math::deg(e.direction.elevation()),
                    })?;
                let same = |a: &[f64], b: &[f64]| {
                    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= SYMMETRY_EPS)
                };
                if !same(&e.left, &mirror.right) || !same(&e.right, &mirror.left) {
                    return Err(BinauralError::Asymmetric {
                        azimuth_deg: math::deg(e.direction.azimuth()),
                        elevation_deg: math::deg(e.direction.elevation()),
                    });
                }
            }
        }
        Ok(Self {
            entries,
            azimuth_spacing: None,
            elevation_spacing: None,
            symmetric_head,
        })
    }

    /// Records the grid spacing (radians) for metadata purposes.
    pub fn with_grid(mut self, azimuth_spacing: Option<f64>, elevation_spacing: Option<f64>) -> Self {
        self.azimuth_spacing = azimuth_spacing;
        self.elevation_spacing = elevation_spacing;
        self
    }

    pub fn entries(&self) -> &[Hrir] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn symmetric_head(&self) -> bool {
        self.symmetric_head
    }

    pub fn azimuth_spacing(&self) -> Option<f64> {
        self.azimuth_spacing
    }

    pub fn elevation_spacing(&self) -> Option<f64> {
        self.elevation_spacing
    }

    pub fn max_taps(&self) -> usize {
        self.entries.iter().map(Hrir::taps).max().unwrap_or(0)
    }

    /// Entry with the smallest great-circle distance to `d`; ties go to the
    /// smallest azimuth, then the smallest elevation.
    pub fn nearest(&self, d: Direction) -> &Hrir {
        let mut best = &self.entries[0];
        let mut best_angle = d.angle_to(&best.direction);
        for e in &self.entries[1..] {
            let a = d.angle_to(&e.direction);
            let key = (e.direction.azimuth(), e.direction.elevation());
            let best_key = (best.direction.azimuth(), best.direction.elevation());
            if a < best_angle - 1e-12 || ((a - best_angle).abs() <= 1e-12 && key < best_key) {
                best = e;
                best_angle = a;
            }
        }
        best
    }
}

fn duplicate(d: Direction) -> BinauralError {
    BinauralError::DuplicateDirection {
        azimuth_deg: math::deg(d.azimuth()),
        elevation_deg: math::deg(d.elevation()),
    }
}

/// Woodworth interaural time difference `(r/c)(θ + sin θ)` for a lateral
/// angle `θ` in `[0, π/2]`.
pub fn woodworth_itd(lateral_angle: f64, head_radius: f64) -> f64 {
    head_radius / SPEED_OF_SOUND * (lateral_angle + math::sin(lateral_angle))
}

/// Spherical-head HRIR: a delayed impulse per ear, with the Woodworth ITD
/// on the far ear plus a one-pole low-pass for the head shadow.
pub fn synthesize_spherical_head_hrir(d: Direction, head_radius: f64, sample_rate: f64, taps: usize) -> Hrir {
    assert!(sample_rate > 0.0, "sample rate must be positive");
    let taps = taps.max(1);
    // angle away from the median plane, positive to the left
    let mut s = math::sin(d.azimuth()) * math::cos(d.elevation());
    if s.abs() < 1e-12 {
        s = 0.0;
    }
    let lateral = math::asin(s.clamp(-1.0, 1.0));
    let itd = woodworth_itd(lateral.abs(), head_radius) * sample_rate;
    let shadow = math::sin(lateral.abs()) * math::exp(-TAU * HEAD_SHADOW_CUTOFF / sample_rate);
    let near = impulse(taps, ONSET, 0.0);
    let far = impulse(taps, ONSET + itd, shadow);
    let (left, right) = if lateral >= 0.0 { (near, far) } else { (far, near) };
    Hrir {
        left,
        right,
        direction: d,
        distance_class: DistanceClass::FarField,
    }
}

/// Linearly interpolated impulse at a fractional position, through a
/// one-pole low-pass `y[n] = (1-a) x[n] + a y[n-1]`.
fn impulse(taps: usize, position: f64, pole: f64) -> Vec<f64> {
    let mut x = vec![0.0; taps];
    let i = math::floor(position) as usize;
    let frac = position - i as f64;
    if i < taps {
        x[i] += 1.0 - frac;
    }
    if i + 1 < taps {
        x[i + 1] += frac;
    }
    if pole != 0.0 {
        let mut y = 0.0;
        for v in x.iter_mut() {
            y = (1.0 - pole) * *v + pole * y;
            *v = y;
        }
    }
    x
}

/// Symmetric spherical-head set on a regular grid: azimuths every
/// `azimuth_step` starting at 0, at each of `elevations`.
pub fn synthesize_spherical_head_set(
    azimuth_step: f64,
    elevations: &[f64],
    head_radius: f64,
    sample_rate: f64,
    taps: usize,
) -> Result<HrirSet, BinauralError> {
    if !(azimuth_step > 0.0) || !(sample_rate > 0.0) || !(head_radius >= 0.0) {
        return Err(BinauralError::InvalidParameter(
            "grid step, sample rate and head radius must be positive",
        ));
    }
    let count = math::floor(TAU / azimuth_step + 1e-9) as usize;
    let mut entries = Vec::new();
    for &el in elevations {
        let at_pole = (el.abs() - math::FRAC_PI_2).abs() < 1e-12;
        let n = if at_pole { 1 } else { count };
        for k in 0..n {
            let d = Direction::new(k as f64 * azimuth_step, el);
            if entries.iter().any(|e: &Hrir| e.direction.angle_to(&d) < DIRECTION_EPS) {
                continue;
            }
            entries.push(synthesize_spherical_head_hrir(d, head_radius, sample_rate, taps));
        }
    }
    let spacing = if elevations.len() > 1 {
        Some((elevations[1] - elevations[0]).abs())
    } else {
        None
    };
    let symmetric = is_mirror_closed(&entries);
    Ok(HrirSet::new(entries, symmetric)?.with_grid(Some(azimuth_step), spacing))
}

fn is_mirror_closed(entries: &[Hrir]) -> bool {
    entries.iter().all(|e| {
        let m = e.direction.mirrored();
        entries.iter().any(|o| o.direction.angle_to(&m) < DIRECTION_EPS)
    })
}
