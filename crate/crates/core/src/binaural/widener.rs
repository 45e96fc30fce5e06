use alloc::vec;
use alloc::vec::Vec;

use super::BinauralError;
use crate::math::{self, TAU};

/// Stereo widening in three stages: side-signal gain, low-passed crossfeed
/// between channels, and a low-passed feed-forward reflection per channel.
///
/// The defaults are a reasonable starting point, not a standard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidenerParams {
    pub side_gain: f64,
    pub crossfeed_gain: f64,
    pub crossfeed_cutoff: f64,
    /// Seconds.
    pub reflection_delay: f64,
    pub reflection_gain: f64,
    pub reflection_cutoff: f64,
}

impl Default for WidenerParams {
    fn default() -> Self {
        Self {
            side_gain: 1.4,
            crossfeed_gain: 0.3,
            crossfeed_cutoff: 700.0,
            reflection_delay: 0.008,
            reflection_gain: 0.25,
            reflection_cutoff: 4000.0,
        }
    }
}

impl WidenerParams {
    /// Passes the input through unchanged.
    pub const IDENTITY: Self = Self {
        side_gain: 1.0,
        crossfeed_gain: 0.0,
        crossfeed_cutoff: 700.0,
        reflection_delay: 0.0,
        reflection_gain: 0.0,
        reflection_cutoff: 4000.0,
    };

    pub fn validate(&self, sample_rate: f64) -> Result<(), BinauralError> {
        let finite = [
            self.side_gain,
            self.crossfeed_gain,
            self.crossfeed_cutoff,
            self.reflection_delay,
            self.reflection_gain,
            self.reflection_cutoff,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(BinauralError::InvalidParameter("widener parameters must be finite"));
        }
        if !(sample_rate > 0.0) {
            return Err(BinauralError::InvalidParameter("sample rate must be positive"));
        }
        if self.side_gain < 0.0 {
            return Err(BinauralError::InvalidParameter("side gain must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.crossfeed_gain) {
            return Err(BinauralError::InvalidParameter("crossfeed gain must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.reflection_gain) {
            return Err(BinauralError::InvalidParameter("reflection gain must lie in [0, 1)"));
        }
        if self.reflection_delay < 0.0 {
            return Err(BinauralError::InvalidParameter("reflection delay must be non-negative"));
        }
        if self.crossfeed_cutoff <= 0.0 || self.reflection_cutoff <= 0.0 {
            return Err(BinauralError::InvalidParameter("cutoff frequencies must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct OnePole {
    alpha: f64,
    state: f64,
}

impl OnePole {
    fn new(cutoff: f64, sample_rate: f64) -> Self {
        Self {
            alpha: 1.0 - math::exp(-TAU * cutoff / sample_rate),
            state: 0.0,
        }
    }

    fn tick(&mut self, x: f64) -> f64 {
        self.state += self.alpha * (x - self.state);
        self.state
    }
}

/// Stateful widener; feed consecutive blocks of one stereo stream.
#[derive(Debug, Clone)]
pub struct StereoWidener {
    params: WidenerParams,
    crossfeed: [OnePole; 2],
    reflection: [OnePole; 2],
    /// Ring buffers holding the last `delay` stage-2 samples per channel.
    lines: [Vec<f64>; 2],
    pos: usize,
}

impl StereoWidener {
    pub fn new(params: WidenerParams, sample_rate: f64) -> Result<Self, BinauralError> {
        params.validate(sample_rate)?;
        let delay = math::floor(params.reflection_delay * sample_rate + 0.5) as usize;
        let cf = OnePole::new(params.crossfeed_cutoff, sample_rate);
        let rf = OnePole::new(params.reflection_cutoff, sample_rate);
        Ok(Self {
            params,
            crossfeed: [cf, cf],
            reflection: [rf, rf],
            lines: [vec![0.0; delay], vec![0.0; delay]],
            pos: 0,
        })
    }

    pub fn params(&self) -> &WidenerParams {
        &self.params
    }

    /// Processes a block in place.
    pub fn process(&mut self, left: &mut [f64], right: &mut [f64]) {
        assert_eq!(left.len(), right.len(), "channel length mismatch");
        let p = self.params;
        for (l, r) in left.iter_mut().zip(right.iter_mut()) {
            let (mut a, mut b) = (*l, *r);
            if p.side_gain != 1.0 {
                // mid ± g·side with mid, side = (L ± R)/2
                let side = (a - b) * 0.5;
                let extra = (p.side_gain - 1.0) * side;
                a += extra;
                b -= extra;
            }
            if p.crossfeed_gain != 0.0 {
                let from_r = self.crossfeed[0].tick(b);
                let from_l = self.crossfeed[1].tick(a);
                a += p.crossfeed_gain * from_r;
                b += p.crossfeed_gain * from_l;
            }
            if p.reflection_gain != 0.0 {
                let (da, db) = if self.lines[0].is_empty() {
                    (a, b)
                } else {
                    let i = self.pos;
                    let out = (self.lines[0][i], self.lines[1][i]);
                    self.lines[0][i] = a;
                    self.lines[1][i] = b;
                    self.pos = (i + 1) % self.lines[0].len();
                    out
                };
                a += p.reflection_gain * self.reflection[0].tick(da);
                b += p.reflection_gain * self.reflection[1].tick(db);
            }
            *l = a;
            *r = b;
        }
    }
}

/// Widens a whole stereo signal.
pub fn stereo_widen(
    left: &[f64],
    right: &[f64],
    params: WidenerParams,
    sample_rate: f64,
) -> Result<(Vec<f64>, Vec<f64>), BinauralError> {
    if left.len() != right.len() {
        return Err(BinauralError::DimensionMismatch {
            expected: left.len(),
            got: right.len(),
        });
    }
    let mut w = StereoWidener::new(params, sample_rate)?;
    let (mut l, mut r) = (left.to_vec(), right.to_vec());
    w.process(&mut l, &mut r);
    Ok((l, r))
}
