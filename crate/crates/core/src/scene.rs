//! Declarative scene description: sources with keyframed trajectories, the
//! panning algorithm, the (virtual) loudspeaker layout and an optional head
//! yaw track for binaural output.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ambisonics::{build_decoder_with, AmbisonicFormat, DecoderFlavour, DecoderOptions};
use crate::binaural::HrirSet;
use crate::dbap::DbapConfig;
use crate::geometry::{Direction, LoudspeakerLayout, Position, Vec3};
use crate::hull::Dimensionality;
use crate::math::{self, PI, TAU};
use crate::panning::{Normalization, PairwiseRing};
use crate::vbap::build_bases;

pub const SUPPORTED_SAMPLE_RATES: [u32; 3] = [44100, 48000, 96000];
pub const DEFAULT_BLOCK_SIZE: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub enum SourceSignal {
    Samples(Vec<f64>),
    Sine {
        frequency: f64,
    },
    /// Uniform white noise in [-1, 1).
    Noise {
        seed: u64,
    },
    /// A single unit sample at t = 0.
    Impulse,
}

impl SourceSignal {
    /// `len` samples of the signal; recorded samples are zero-padded or cut.
    pub fn generate(&self, sample_rate: f64, len: usize) -> Vec<f64> {
        match self {
            SourceSignal::Samples(s) => {
                let mut v: Vec<f64> = s.iter().take(len).copied().collect();
                v.resize(len, 0.0);
                v
            }
            SourceSignal::Sine { frequency } => (0..len)
                .map(|i| math::sin(TAU * frequency * i as f64 / sample_rate))
                .collect(),
            SourceSignal::Noise { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
            }
            SourceSignal::Impulse => {
                let mut v = vec![0.0; len];
                if let Some(x) = v.first_mut() {
                    *x = 1.0;
                }
                v
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    Direction(Direction),
    Position(Position),
}

impl Location {
    pub fn direction(&self) -> Direction {
        match self {
            Location::Direction(d) => *d,
            Location::Position(p) => p.direction(),
        }
    }

    /// Position, placing pure directions at `radius`.
    pub fn position(&self, radius: f64) -> Position {
        match self {
            Location::Direction(d) => Vec3::from_spherical(*d, radius),
            Location::Position(p) => *p,
        }
    }

    /// Rotates about the vertical axis by `angle` (counter-clockwise).
    pub fn rotated_z(&self, angle: f64) -> Self {
        match self {
            Location::Direction(d) => Location::Direction(Direction::new(d.azimuth() + angle, d.elevation())),
            Location::Position(p) => {
                let (s, c) = (math::sin(angle), math::cos(angle));
                Location::Position(Vec3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keyframe {
    /// Seconds from the start of the scene.
    pub time: f64,
    pub location: Location,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    Hold,
    #[default]
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub name: String,
    pub signal: SourceSignal,
    pub keyframes: Vec<Keyframe>,
    pub interpolation: Interpolation,
}

impl Source {
    /// A source that never moves.
    pub fn fixed(name: impl Into<String>, signal: SourceSignal, location: Location, gain: f64) -> Self {
        Self {
            name: name.into(),
            signal,
            keyframes: vec![Keyframe {
                time: 0.0,
                location,
                gain,
            }],
            interpolation: Interpolation::Hold,
        }
    }

    /// Location and gain at time `t`. Outside the keyframe range the nearest
    /// keyframe holds. Directions interpolate along the shorter azimuth arc
    /// with linear elevation; positions interpolate linearly.
    pub fn state_at(&self, t: f64) -> (Location, f64) {
        let keys = &self.keyframes;
        let first = keys[0];
        if t <= first.time || keys.len() == 1 {
            return (first.location, first.gain);
        }
        let k = keys.partition_point(|k| k.time <= t);
        if k >= keys.len() {
            let last = keys[keys.len() - 1];
            return (last.location, last.gain);
        }
        let (a, b) = (keys[k - 1], keys[k]);
        if self.interpolation == Interpolation::Hold {
            return (a.location, a.gain);
        }
        let w = (t - a.time) / (b.time - a.time);
        let gain = a.gain + (b.gain - a.gain) * w;
        let loc = match (a.location, b.location) {
            (Location::Position(p), Location::Position(q)) => Location::Position(p + (q - p) * w),
            (la, lb) => {
                let (da, db) = (la.direction(), lb.direction());
                let mut daz = db.azimuth() - da.azimuth();
                if daz > PI {
                    daz -= TAU;
                } else if daz < -PI {
                    daz += TAU;
                }
                Location::Direction(Direction::new(
                    da.azimuth() + daz * w,
                    da.elevation() + (db.elevation() - da.elevation()) * w,
                ))
            }
        };
        (loc, gain)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    /// Amplitude panning on a symmetric two-speaker layout.
    StereoTangent {
        normalization: Normalization,
    },
    /// Equal gains with a delay on the far speaker.
    StereoDelay {
        max_delay: f64,
    },
    RingPairwise,
    Ambisonics {
        horizontal_order: u32,
        periphonic_order: u32,
        flavour: DecoderFlavour,
        delay_compensation: bool,
    },
    Vbap {
        dimensionality: Dimensionality,
        power: f64,
    },
    Dbap {
        rolloff_db: f64,
        blur: f64,
        exterior_attenuation: bool,
    },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::StereoTangent { .. } => "stereo-tangent",
            Algorithm::StereoDelay { .. } => "stereo-delay",
            Algorithm::RingPairwise => "ring-pairwise",
            Algorithm::Ambisonics { .. } => "ambisonics",
            Algorithm::Vbap { .. } => "vbap",
            Algorithm::Dbap { .. } => "dbap",
        }
    }
}

/// Head yaw (radians) at a point in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YawKey {
    pub time: f64,
    pub yaw: f64,
}

/// Piecewise-linear yaw, holding the end values outside the keyed range.
pub fn yaw_at(track: &[YawKey], t: f64) -> f64 {
    match track {
        [] => 0.0,
        [only] => only.yaw,
        _ => {
            let k = track.partition_point(|k| k.time <= t);
            if k == 0 {
                return track[0].yaw;
            }
            if k >= track.len() {
                return track[track.len() - 1].yaw;
            }
            let (a, b) = (track[k - 1], track[k]);
            a.yaw + (b.yaw - a.yaw) * (t - a.time) / (b.time - a.time)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub sample_rate: u32,
    /// Seconds.
    pub duration: f64,
    pub algorithm: Algorithm,
    /// Physical layout, or the virtual layout when `binaural` is set.
    pub layout: LoudspeakerLayout,
    /// HRIRs for rendering the layout to headphones.
    pub binaural: Option<HrirSet>,
    pub sources: Vec<Source>,
    pub head_yaw: Option<Vec<YawKey>>,
    pub block_size: usize,
    /// Evaluate trajectories at every sample instead of once per block.
    pub precise: bool,
}

impl Scene {
    pub fn new(sample_rate: u32, duration: f64, algorithm: Algorithm, layout: LoudspeakerLayout) -> Self {
        Self {
            sample_rate,
            duration,
            algorithm,
            layout,
            binaural: None,
            sources: Vec::new(),
            head_yaw: None,
            block_size: DEFAULT_BLOCK_SIZE,
            precise: false,
        }
    }

    pub fn total_samples(&self) -> usize {
        math::floor(self.duration * self.sample_rate as f64 + 0.5) as usize
    }

    pub fn output_channels(&self) -> usize {
        if self.binaural.is_some() {
            2
        } else {
            self.layout.len()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    /// Stable machine-readable code such as `"keyframe-order"`.
    pub code: &'static str,
    pub source: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    fn push(&mut self, code: &'static str, source: Option<&str>, message: impl Into<String>) {
        self.issues.push(ValidationIssue {
            code,
            source: source.map(ToString::to_string),
            message: message.into(),
        });
    }
}

impl core::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            match &issue.source {
                Some(s) => write!(f, "[{}] source '{}': {}", issue.code, s, issue.message)?,
                None => write!(f, "[{}] {}", issue.code, issue.message)?,
            }
        }
        Ok(())
    }
}

/// Half-angle and index of the left speaker of a symmetric stereo pair.
pub fn stereo_pair_of(layout: &LoudspeakerLayout) -> Result<(f64, usize), String> {
    if layout.len() != 2 {
        return Err(format!(
            "stereo panning needs exactly 2 speakers, layout has {}",
            layout.len()
        ));
    }
    let d = layout.directions();
    if !layout.is_horizontal() {
        return Err("stereo speakers must lie on the horizontal plane".into());
    }
    let (a, b) = (d[0].azimuth(), d[1].azimuth());
    if (a + b).abs() > 1e-9 || a == 0.0 || a.abs() >= math::FRAC_PI_2 {
        return Err("stereo speakers must sit at +phi and -phi with 0 < phi < 90 degrees".into());
    }
    Ok((a.abs(), if a > 0.0 { 0 } else { 1 }))
}

/// Checks everything that can be checked without rendering.
pub fn validate_scene(scene: &Scene) -> ValidationReport {
    let mut r = ValidationReport::default();
    if !SUPPORTED_SAMPLE_RATES.contains(&scene.sample_rate) {
        r.push(
            "sample-rate",
            None,
            format!("sample rate {} Hz is not one of 44100, 48000, 96000", scene.sample_rate),
        );
    }
    if !(scene.duration > 0.0) || !scene.duration.is_finite() {
        r.push(
            "duration",
            None,
            format!("duration must be positive, got {}", scene.duration),
        );
    }
    if scene.block_size == 0 {
        r.push("block-size", None, "block size must be at least 1");
    }
    if scene.layout.is_empty() {
        r.push("layout", None, "layout has no speakers");
    } else {
        check_algorithm(scene, &mut r);
    }
    if let Some(track) = &scene.head_yaw {
        if scene.binaural.is_none() {
            r.push("head-yaw", None, "a head yaw track needs binaural output");
        }
        if track.windows(2).any(|w| !(w[1].time > w[0].time)) {
            r.push("head-yaw", None, "head yaw key times must be strictly increasing");
        }
        if track.iter().any(|k| !k.yaw.is_finite() || !k.time.is_finite()) {
            r.push("head-yaw", None, "head yaw keys must be finite");
        }
    }
    for s in &scene.sources {
        check_source(scene, s, &mut r);
    }
    r
}

fn check_source(scene: &Scene, s: &Source, r: &mut ValidationReport) {
    let name = Some(s.name.as_str());
    if s.keyframes.is_empty() {
        r.push("keyframes", name, "source has no keyframes");
        return;
    }
    if s.keyframes.windows(2).any(|w| !(w[1].time > w[0].time)) {
        r.push("keyframe-order", name, "keyframe times must be strictly increasing");
    }
    if s.keyframes.iter().any(|k| !(k.time >= 0.0) || k.time > scene.duration) {
        r.push(
            "keyframe-range",
            name,
            format!("keyframe times must lie within [0, {}] s", scene.duration),
        );
    }
    if s.keyframes.iter().any(|k| !k.gain.is_finite()) {
        r.push("keyframe-gain", name, "keyframe gains must be finite");
    }
    let finite = s.keyframes.iter().all(|k| match k.location {
        Location::Direction(d) => d.azimuth().is_finite() && d.elevation().is_finite(),
        Location::Position(p) => p.is_finite(),
    });
    if !finite {
        r.push("keyframe-location", name, "keyframe locations must be finite");
    }
    let positions = s
        .keyframes
        .iter()
        .filter(|k| matches!(k.location, Location::Position(_)))
        .count();
    if positions != 0 && positions != s.keyframes.len() {
        r.push(
            "keyframe-location",
            name,
            "keyframes must all be directions or all be positions",
        );
    }
    if let SourceSignal::Samples(x) = &s.signal {
        if x.iter().any(|v| !v.is_finite()) {
            r.push("signal", name, "source samples must be finite");
        }
    }
    if let SourceSignal::Sine { frequency } = s.signal {
        if !frequency.is_finite() || frequency < 0.0 {
            r.push("signal", name, "sine frequency must be finite and non-negative");
        }
    }
}

fn check_algorithm(scene: &Scene, r: &mut ValidationReport) {
    let layout = &scene.layout;
    let result: Result<(), String> = match &scene.algorithm {
        Algorithm::StereoTangent { .. } => stereo_pair_of(layout).map(|_| ()),
        Algorithm::StereoDelay { max_delay } => {
            if !(*max_delay >= 0.0) || !max_delay.is_finite() {
                Err("maximum delay must be finite and non-negative".into())
            } else {
                stereo_pair_of(layout).map(|_| ())
            }
        }
        Algorithm::RingPairwise => PairwiseRing::new(layout.clone()).map(|_| ()).map_err(|e| e.to_string()),
        Algorithm::Ambisonics {
            horizontal_order,
            periphonic_order,
            flavour,
            delay_compensation,
        } => AmbisonicFormat::acn_sn3d(*horizontal_order, *periphonic_order)
            .and_then(|f| {
                build_decoder_with(
                    layout,
                    f,
                    DecoderOptions {
                        flavour: *flavour,
                        delay_compensation: *delay_compensation,
                    },
                )
            })
            .map(|_| ())
            .map_err(|e| e.to_string()),
        Algorithm::Vbap { dimensionality, power } => {
            if !(*power > 0.0) {
                Err("VBAP power level must be positive".into())
            } else {
                build_bases(layout, *dimensionality)
                    .map(|_| ())
                    .map_err(|e| e.to_string())
            }
        }
        Algorithm::Dbap { rolloff_db, blur, .. } => DbapConfig::new(layout.clone(), *rolloff_db, *blur)
            .map(|_| ())
            .map_err(|e| e.to_string()),
    };
    if let Err(msg) = result {
        r.push("algorithm", None, format!("{}: {}", scene.algorithm.name(), msg));
    }
    if let Some(set) = &scene.binaural {
        if set.is_empty() {
            r.push("hrir", None, "HRIR set is empty");
        }
    }
}
