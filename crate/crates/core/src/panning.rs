//! Channel-based panning: tangent-law stereo, delay panning and pairwise
//! panning around a horizontal ring (quadraphonic, 5.x).

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::LoudspeakerLayout;
use crate::math::{self, FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};

/// Per-speaker amplitude gains and delays (seconds) produced by any panner.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GainVector {
    pub gains: Vec<f64>,
    pub delays: Vec<f64>,
}

impl GainVector {
    /// Amplitude-only gains with zero delays.
    pub fn from_gains(gains: Vec<f64>) -> Self {
        let delays = vec![0.0; gains.len()];
        Self { gains, delays }
    }

    pub fn silent(len: usize) -> Self {
        Self::from_gains(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// Σ g².
    pub fn power(&self) -> f64 {
        self.gains.iter().map(|g| g * g).sum()
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for g in &mut self.gains {
            *g *= factor;
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Σ g² = 1.
    #[default]
    UnitPower,
    /// Σ g = 1.
    UnitAmplitude,
}

impl Normalization {
    fn apply(self, gains: &mut [f64]) {
        let norm = match self {
            Normalization::UnitPower => math::sqrt(gains.iter().map(|g| g * g).sum()),
            Normalization::UnitAmplitude => gains.iter().sum(),
        };
        if norm > 0.0 {
            for g in gains {
                *g /= norm;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PanError {
    #[error("target azimuth {target_deg:.6} deg lies outside the +/-{half_angle_deg:.6} deg speaker pair")]
    OutOfRange { target_deg: f64, half_angle_deg: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(&'static str),
    #[error("invalid ring layout: {0}")]
    Ring(&'static str),
}

fn check_half_angle(half_angle: f64) -> Result<(), PanError> {
    if !(half_angle > 0.0 && half_angle < FRAC_PI_2) {
        return Err(PanError::Parameter("half angle must lie in (0, pi/2)"));
    }
    Ok(())
}

fn check_target(target: f64, half_angle: f64) -> Result<(), PanError> {
    // Tolerate rounding at the edges so that exact speaker angles stay valid.
    if !target.is_finite() || target.abs() > half_angle * (1.0 + 1e-12) {
        return Err(PanError::OutOfRange {
            target_deg: math::deg(target),
            half_angle_deg: math::deg(half_angle),
        });
    }
    Ok(())
}

/// Stereo gains from the tangent law
/// `tan(target) / tan(half_angle) = (g1 − g2) / (g1 + g2)`.
///
/// Speaker 1 sits at `+half_angle` (left), speaker 2 at `−half_angle`.
pub fn tangent_law_gains(target_azimuth: f64, half_angle: f64) -> Result<GainVector, PanError> {
    tangent_law_gains_with(target_azimuth, half_angle, Normalization::UnitPower)
}

pub fn tangent_law_gains_with(
    target_azimuth: f64,
    half_angle: f64,
    normalization: Normalization,
) -> Result<GainVector, PanError> {
    check_half_angle(half_angle)?;
    check_target(target_azimuth, half_angle)?;
    let ratio = (math::tan(target_azimuth) / math::tan(half_angle)).clamp(-1.0, 1.0);
    let mut gains = vec![1.0 + ratio, 1.0 - ratio];
    normalization.apply(&mut gains);
    Ok(GainVector::from_gains(gains))
}

/// Equal-amplitude panning where the far-side speaker is delayed. The delay
/// grows linearly with `|target| / half_angle` and reaches `max_delay` at
/// the speaker.
pub fn delay_pan(target_azimuth: f64, half_angle: f64, max_delay: f64) -> Result<GainVector, PanError> {
    if !(max_delay >= 0.0) || !max_delay.is_finite() {
        return Err(PanError::Parameter("max delay must be finite and non-negative"));
    }
    check_half_angle(half_angle)?;
    check_target(target_azimuth, half_angle)?;
    let delay = (max_delay * target_azimuth.abs() / half_angle).min(max_delay);
    let delays = if target_azimuth >= 0.0 {
        vec![0.0, delay]
    } else {
        vec![delay, 0.0]
    };
    Ok(GainVector {
        gains: vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        delays,
    })
}

/// Default delay that fully lateralises a delay-panned source.
pub const DEFAULT_MAX_DELAY: f64 = 0.002;

/// Predicted phantom-source azimuth for a level difference between the two
/// speakers of a pair (inverse tangent law). `f64::INFINITY` means the
/// quieter channel is silent.
pub fn amplitude_difference_to_position(level_difference_db: f64, half_angle: f64) -> f64 {
    if level_difference_db <= 0.0 {
        return 0.0;
    }
    let ratio = if level_difference_db.is_infinite() {
        1.0
    } else {
        let r = math::powf(10.0, level_difference_db / 20.0);
        (r - 1.0) / (r + 1.0)
    };
    math::atan(ratio * math::tan(half_angle)).min(half_angle)
}

/// Horizontal ring of equidistant speakers with adjacent pairs ordered by
/// azimuth. Pair `k` spans from `pairs[k].0` counterclockwise to `pairs[k].1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseRing {
    layout: LoudspeakerLayout,
    /// (speaker, next speaker ccw, start azimuth in [0, 2π), span)
    pairs: Vec<RingPair>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct RingPair {
    first: usize,
    second: usize,
    start: f64,
    span: f64,
}

impl PairwiseRing {
    pub fn new(layout: LoudspeakerLayout) -> Result<Self, PanError> {
        if layout.len() < 3 {
            return Err(PanError::Ring("a ring needs at least 3 speakers"));
        }
        if !layout.is_horizontal() {
            return Err(PanError::Ring("all speakers must lie on the horizontal plane"));
        }
        if !layout.is_equidistant(1e-6) {
            return Err(PanError::Ring("speakers must be equidistant from the listener"));
        }
        let mut az: Vec<(usize, f64)> = layout
            .directions()
            .iter()
            .enumerate()
            .map(|(i, d)| (i, math::wrap_positive(d.azimuth())))
            .collect();
        az.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut pairs = Vec::with_capacity(az.len());
        for k in 0..az.len() {
            let (first, start) = az[k];
            let (second, next) = az[(k + 1) % az.len()];
            let span = if k + 1 == az.len() {
                next + TAU - start
            } else {
                next - start
            };
            if span <= 0.0 {
                return Err(PanError::Ring("two speakers share an azimuth"));
            }
            if span >= PI {
                return Err(PanError::Ring("adjacent speakers are 180 degrees or more apart"));
            }
            pairs.push(RingPair {
                first,
                second,
                start,
                span,
            });
        }
        Ok(Self { layout, pairs })
    }

    pub fn layout(&self) -> &LoudspeakerLayout {
        &self.layout
    }

    /// Adjacent speaker pairs in counterclockwise order.
    pub fn adjacency(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().map(|p| (p.first, p.second)).collect()
    }

    /// Index into [`adjacency`](Self::adjacency) of the pair enclosing `azimuth`.
    pub fn enclosing_pair(&self, azimuth: f64) -> usize {
        let az = math::wrap_positive(azimuth);
        self.pairs
            .iter()
            .position(|p| {
                let rel = math::wrap_positive(az - p.start);
                rel < p.span
            })
            .unwrap_or(0)
    }
}

/// Pairwise tangent-law panning on a ring: only the two speakers of the
/// enclosing adjacent pair are active.
pub fn ring_pan(target_azimuth: f64, ring: &PairwiseRing) -> GainVector {
    let k = ring.enclosing_pair(target_azimuth);
    let pair = ring.pairs[k];
    let half = pair.span / 2.0;
    let bisector = pair.start + half;
    let rel = math::wrap_angle(target_azimuth - bisector).clamp(-half, half);
    // tangent law: index 0 is the ccw (second) speaker of the pair
    let g = tangent_law_gains(rel, half).expect("pair span validated at construction");
    let mut out = GainVector::silent(ring.layout.len());
    out.gains[pair.second] = g.gains[0];
    out.gains[pair.first] = g.gains[1];
    out
}
