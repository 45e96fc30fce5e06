//! Block renderer turning a [`Scene`] into loudspeaker or headphone signals.
//!
//! Trajectories are evaluated once per block, at its centre, and the
//! resulting coefficients (gains, delays, Ambisonic encoding gains) are
//! crossfaded linearly from the previous block's values over the block:
//! sample `j` of an `n`-sample block uses `prev + (cur − prev)·(j+1)/n`.
//! The first block starts directly at its own coefficients. Static sources
//! therefore produce identical output for any block size.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::ambisonics::{build_decoder_with, encode_coefficients, AmbisonicFormat, DecoderMatrix, DecoderOptions};
use crate::binaural::{virtual_speaker_hrirs, Convolver};
use crate::dbap::{dbap_pan, DbapConfig};
use crate::math;
use crate::panning::{delay_pan, ring_pan, tangent_law_gains_with, Normalization, PairwiseRing};
use crate::scene::{stereo_pair_of, validate_scene, yaw_at, Algorithm, Location, Scene, Source, ValidationReport};
use crate::vbap::{build_bases, vbap_pan_with, BaseSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("scene is invalid:\n{0}")]
    Invalid(ValidationReport),
    #[error("source '{source_name}' at t = {time:.6} s: {message}")]
    Coverage {
        source_name: String,
        time: f64,
        message: String,
    },
    #[error("renderer setup failed: {0}")]
    Setup(String),
}

enum Panner {
    Tangent {
        half_angle: f64,
        left: usize,
        normalization: Normalization,
    },
    Delay {
        half_angle: f64,
        left: usize,
        max_delay: f64,
    },
    Ring(PairwiseRing),
    Ambisonics(AmbisonicFormat),
    Vbap(BaseSet, f64),
    Dbap(DbapConfig, f64),
}

#[derive(Debug, Clone, PartialEq)]
struct Coefs {
    gains: Vec<f64>,
    /// In samples; empty when the panner produces no delays.
    delays: Vec<f64>,
}

/// Streaming fractional delay (linear interpolation) with a fixed delay.
#[derive(Debug, Clone)]
struct DelayLine {
    whole: usize,
    frac: f64,
    /// Last `whole + 1` inputs.
    history: Vec<f64>,
}

impl DelayLine {
    fn new(samples: f64) -> Self {
        let whole = math::floor(samples) as usize;
        Self {
            whole,
            frac: samples - whole as f64,
            history: vec![0.0; whole + 1],
        }
    }

    fn process(&mut self, x: &mut [f64]) {
        let m = self.history.len();
        let mut ext = core::mem::take(&mut self.history);
        ext.extend_from_slice(x);
        for (j, out) in x.iter_mut().enumerate() {
            let a = ext[m + j - self.whole];
            *out = if self.frac == 0.0 {
                a
            } else {
                a * (1.0 - self.frac) + ext[m + j - self.whole - 1] * self.frac
            };
        }
        self.history = ext[ext.len() - m..].to_vec();
    }
}

/// Reads `x` at the fractional index `i − delay`, zero outside the signal.
fn read_delayed(x: &[f64], i: usize, delay: f64) -> f64 {
    if delay == 0.0 {
        return x[i];
    }
    let pos = i as f64 - delay;
    if pos < 0.0 {
        // before the start only the next sample can contribute
        return if pos > -1.0 { x[0] * (1.0 + pos) } else { 0.0 };
    }
    let k = math::floor(pos) as usize;
    let frac = pos - k as f64;
    let a = x[k];
    if frac == 0.0 {
        return a;
    }
    let b = x.get(k + 1).copied().unwrap_or(0.0);
    a * (1.0 - frac) + b * frac
}

pub struct Renderer {
    scene: Scene,
    panner: Panner,
    signals: Vec<Vec<f64>>,
    previous: Vec<Option<Coefs>>,
    bus_channels: usize,
    decoder: Option<DecoderMatrix>,
    compensation: Vec<DelayLine>,
    /// `[speaker][ear]` when rendering to headphones.
    hrirs: Option<Vec<[Convolver; 2]>>,
    position: usize,
    total: usize,
}

impl Renderer {
    pub fn new(scene: Scene) -> Result<Self, RenderError> {
        let report = validate_scene(&scene);
        if !report.is_ok() {
            return Err(RenderError::Invalid(report));
        }
        let layout = &scene.layout;
        let setup = |e: &dyn core::fmt::Display| RenderError::Setup(e.to_string());
        let mut decoder = None;
        let panner = match &scene.algorithm {
            Algorithm::StereoTangent { normalization } => {
                let (half_angle, left) = stereo_pair_of(layout).map_err(|e| setup(&e))?;
                Panner::Tangent {
                    half_angle,
                    left,
                    normalization: *normalization,
                }
            }
            Algorithm::StereoDelay { max_delay } => {
                let (half_angle, left) = stereo_pair_of(layout).map_err(|e| setup(&e))?;
                Panner::Delay {
                    half_angle,
                    left,
                    max_delay: *max_delay,
                }
            }
            Algorithm::RingPairwise => Panner::Ring(PairwiseRing::new(layout.clone()).map_err(|e| setup(&e))?),
            Algorithm::Ambisonics {
                horizontal_order,
                periphonic_order,
                flavour,
                delay_compensation,
            } => {
                let format = AmbisonicFormat::acn_sn3d(*horizontal_order, *periphonic_order).map_err(|e| setup(&e))?;
                let options = DecoderOptions {
                    flavour: *flavour,
                    delay_compensation: *delay_compensation,
                };
                decoder = Some(build_decoder_with(layout, format, options).map_err(|e| setup(&e))?);
                Panner::Ambisonics(format)
            }
            Algorithm::Vbap { dimensionality, power } => {
                Panner::Vbap(build_bases(layout, *dimensionality).map_err(|e| setup(&e))?, *power)
            }
            Algorithm::Dbap {
                rolloff_db,
                blur,
                exterior_attenuation,
            } => {
                let cfg = DbapConfig::new(layout.clone(), *rolloff_db, *blur)
                    .map_err(|e| setup(&e))?
                    .with_exterior_attenuation(*exterior_attenuation);
                Panner::Dbap(cfg, layout.mean_distance())
            }
        };
        let sr = scene.sample_rate as f64;
        let compensation = match &decoder {
            Some(d) if d.delays().iter().any(|&x| x != 0.0) => {
                d.delays().iter().map(|&s| DelayLine::new(s * sr)).collect()
            }
            _ => Vec::new(),
        };
        let bus_channels = match &decoder {
            Some(d) => d.components(),
            None => layout.len(),
        };
        let hrirs = scene.binaural.as_ref().map(|set| {
            virtual_speaker_hrirs(layout, set)
                .into_iter()
                .map(|h| [Convolver::new(h.left), Convolver::new(h.right)])
                .collect()
        });
        let total = scene.total_samples();
        let signals = scene.sources.iter().map(|s| s.signal.generate(sr, total)).collect();
        let previous = vec![None; scene.sources.len()];
        Ok(Self {
            scene,
            panner,
            signals,
            previous,
            bus_channels,
            decoder,
            compensation,
            hrirs,
            position: 0,
            total,
        })
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn output_channels(&self) -> usize {
        self.scene.output_channels()
    }

    pub fn total_samples(&self) -> usize {
        self.total
    }

    fn evaluate(&self, source: &Source, t: f64) -> Result<Coefs, RenderError> {
        let (mut loc, gain) = source.state_at(t);
        if let Some(track) = &self.scene.head_yaw {
            // turning the head one way turns the scene the other way
            loc = loc.rotated_z(-yaw_at(track, t));
        }
        let coverage = |message: String| RenderError::Coverage {
            source_name: source.name.clone(),
            time: t,
            message,
        };
        let sr = self.scene.sample_rate as f64;
        let az = loc.direction().azimuth();
        let pair = |g: &[f64], left: usize| if left == 0 { vec![g[0], g[1]] } else { vec![g[1], g[0]] };
        let (gains, delays) = match &self.panner {
            Panner::Tangent {
                half_angle,
                left,
                normalization,
            } => {
                let g = tangent_law_gains_with(az, *half_angle, *normalization).map_err(|e| coverage(e.to_string()))?;
                (pair(&g.gains, *left), Vec::new())
            }
            Panner::Delay {
                half_angle,
                left,
                max_delay,
            } => {
                let g = delay_pan(az, *half_angle, *max_delay).map_err(|e| coverage(e.to_string()))?;
                let d: Vec<f64> = g.delays.iter().map(|d| d * sr).collect();
                (pair(&g.gains, *left), pair(&d, *left))
            }
            Panner::Ring(ring) => (ring_pan(az, ring).gains, Vec::new()),
            Panner::Ambisonics(format) => (
                encode_coefficients(*format, loc.direction()).map_err(|e| coverage(e.to_string()))?,
                Vec::new(),
            ),
            Panner::Vbap(bases, power) => (
                vbap_pan_with(bases, loc.direction(), *power)
                    .map_err(|e| coverage(e.to_string()))?
                    .gains,
                Vec::new(),
            ),
            Panner::Dbap(cfg, radius) => {
                let p = match loc {
                    Location::Position(p) => p,
                    other => other.position(*radius),
                };
                (dbap_pan(p, cfg).gains.gains, Vec::new())
            }
        };
        Ok(Coefs {
            gains: gains.into_iter().map(|g| g * gain).collect(),
            delays,
        })
    }

    /// Renders the next block, or `None` once the scene is finished.
    /// Channels are returned planar, one `Vec` per output channel.
    pub fn next_block(&mut self) -> Result<Option<Vec<Vec<f64>>>, RenderError> {
        if self.position >= self.total {
            return Ok(None);
        }
        let n = self.scene.block_size.min(self.total - self.position);
        let start = self.position;
        let sr = self.scene.sample_rate as f64;
        let mut bus = vec![vec![0.0; n]; self.bus_channels];

        for (s, source) in self.scene.sources.iter().enumerate() {
            let x = &self.signals[s];
            if self.scene.precise {
                for j in 0..n {
                    let c = self.evaluate(source, (start + j) as f64 / sr)?;
                    for (ch, g) in c.gains.iter().enumerate() {
                        let d = c.delays.get(ch).copied().unwrap_or(0.0);
                        bus[ch][j] += g * read_delayed(x, start + j, d);
                    }
                }
                continue;
            }
            let cur = self.evaluate(source, (start as f64 + n as f64 / 2.0) / sr)?;
            let prev = self.previous[s].take().unwrap_or_else(|| cur.clone());
            for (ch, out) in bus.iter_mut().enumerate() {
                let (g0, g1) = (prev.gains[ch], cur.gains[ch]);
                let (d0, d1) = (
                    prev.delays.get(ch).copied().unwrap_or(0.0),
                    cur.delays.get(ch).copied().unwrap_or(0.0),
                );
                if g0 == 0.0 && g1 == 0.0 {
                    continue;
                }
                for (j, o) in out.iter_mut().enumerate() {
                    let w = (j + 1) as f64 / n as f64;
                    let g = g0 + (g1 - g0) * w;
                    let d = d0 + (d1 - d0) * w;
                    *o += g * read_delayed(x, start + j, d);
                }
            }
            self.previous[s] = Some(cur);
        }

        let mut feeds = match &self.decoder {
            Some(d) => {
                let m = d.matrix();
                (0..d.speakers())
                    .map(|i| {
                        let mut f = vec![0.0; n];
                        for (c, ch) in bus.iter().enumerate() {
                            let g = m[(i, c)];
                            if g != 0.0 {
                                for (o, v) in f.iter_mut().zip(ch) {
                                    *o += g * v;
                                }
                            }
                        }
                        f
                    })
                    .collect()
            }
            None => bus,
        };
        for (f, line) in feeds.iter_mut().zip(self.compensation.iter_mut()) {
            line.process(f);
        }
        let out = match &mut self.hrirs {
            Some(convs) => {
                let mut ears = vec![vec![0.0; n]; 2];
                for (feed, pair) in feeds.iter().zip(convs.iter_mut()) {
                    for (ear, conv) in pair.iter_mut().enumerate() {
                        conv.process_add(feed, &mut ears[ear]);
                    }
                }
                ears
            }
            None => feeds,
        };
        self.position += n;
        Ok(Some(out))
    }
}

/// Renders a whole scene; channels are planar.
pub fn render(scene: &Scene) -> Result<Vec<Vec<f64>>, RenderError> {
    let mut r = Renderer::new(scene.clone())?;
    let mut out = vec![Vec::with_capacity(r.total); r.output_channels()];
    while let Some(block) = r.next_block()? {
        for (o, b) in out.iter_mut().zip(block) {
            o.extend(b);
        }
    }
    Ok(out)
}

/// Whole-signal fractional delay by `delay` samples (linear interpolation),
/// keeping the input length.
pub fn delay_signal(x: &[f64], delay: f64) -> Vec<f64> {
    (0..x.len()).map(|i| read_delayed(x, i, delay)).collect()
}

/// Scales all channels so the largest magnitude equals `peak`; silent input
/// is returned unchanged. Returns the applied factor.
pub fn normalize_peak(channels: &mut [Vec<f64>], peak: f64) -> f64 {
    let max = channels
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return 1.0;
    }
    let k = peak / max;
    for c in channels.iter_mut() {
        c.iter_mut().for_each(|x| *x *= k);
    }
    k
}
