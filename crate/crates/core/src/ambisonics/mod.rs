//! Ambisonics: B-format and higher/mixed-order encoding, first-order sound
//! field rotation, convention conversion and decoding to loudspeakers.
//!
//! Internally every higher-order signal uses ACN channel ordering with SN3D
//! normalisation. FuMa (`W` scaled by 1/√2, channel order `W X Y Z`) is only
//! accepted at first order, as a boundary format.

mod decoder;
mod harmonics;

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::Direction;
use crate::math::{self, FRAC_1_SQRT_2, SQRT_2};

pub use decoder::{
    build_decoder, build_decoder_with, decode, decode_frame, DecoderFlavour, DecoderMatrix, DecoderOptions,
};
pub use harmonics::{associated_legendre_sn3d, spherical_harmonic, SphericalHarmonicIndex};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AmbisonicsError {
    #[error("periphonic order {periphonic} exceeds horizontal order {horizontal}")]
    InvalidOrder { horizontal: u32, periphonic: u32 },
    #[error("invalid harmonic index (degree {degree}, order {order}, sigma {sigma})")]
    InvalidIndex { degree: u32, order: u32, sigma: i8 },
    #[error("FuMa ordering/normalisation is only defined for first order (H = P = 1)")]
    FumaRequiresFirstOrder,
    #[error("operation supports first-order signals only, got horizontal order {0}")]
    UnsupportedOrder(u32),
    #[error("rotation about this axis needs the Z component, which a horizontal-only signal lacks")]
    MissingZ,
    #[error("source distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("{flavour} decoder for {components} components needs at least {needed} speakers, layout has {got}")]
    TooFewSpeakers {
        flavour: &'static str,
        components: usize,
        needed: usize,
        got: usize,
    },
    #[error("speakers are not equidistant from the listener; enable delay compensation")]
    DelayCompensationRequired,
    #[error("dimension mismatch: expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("format mismatch between signal and decoder")]
    FormatMismatch,
    #[error("speaker harmonic matrix is singular")]
    Singular,
    #[error("layout has no speakers")]
    EmptyLayout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelOrdering {
    /// `W X Y Z`, first order only.
    FumaWxyz,
    /// Ambisonic Channel Number ordering.
    Acn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentNormalization {
    /// `W` scaled by 1/√2, first-order components unscaled.
    Fuma,
    /// Schmidt semi-normalised.
    Sn3d,
}

/// Channel layout of an Ambisonic signal: ordering, normalisation and the
/// mixed-order pair `#H#P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AmbisonicFormat {
    pub ordering: ChannelOrdering,
    pub normalization: ComponentNormalization,
    pub horizontal_order: u32,
    pub periphonic_order: u32,
}

impl AmbisonicFormat {
    /// Traditional B-format (`W X Y Z`, FuMa weights).
    pub const FUMA: AmbisonicFormat = AmbisonicFormat {
        ordering: ChannelOrdering::FumaWxyz,
        normalization: ComponentNormalization::Fuma,
        horizontal_order: 1,
        periphonic_order: 1,
    };

    pub fn acn_sn3d(horizontal_order: u32, periphonic_order: u32) -> Result<Self, AmbisonicsError> {
        let f = Self {
            ordering: ChannelOrdering::Acn,
            normalization: ComponentNormalization::Sn3d,
            horizontal_order,
            periphonic_order,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), AmbisonicsError> {
        if self.periphonic_order > self.horizontal_order {
            return Err(AmbisonicsError::InvalidOrder {
                horizontal: self.horizontal_order,
                periphonic: self.periphonic_order,
            });
        }
        match (self.ordering, self.normalization) {
            (ChannelOrdering::Acn, ComponentNormalization::Sn3d) => Ok(()),
            (ChannelOrdering::FumaWxyz, ComponentNormalization::Fuma)
                if self.horizontal_order == 1 && self.periphonic_order == 1 =>
            {
                Ok(())
            }
            _ => Err(AmbisonicsError::FumaRequiresFirstOrder),
        }
    }

    pub fn is_fuma(&self) -> bool {
        self.ordering == ChannelOrdering::FumaWxyz
    }

    pub fn component_count(&self) -> usize {
        mixed_order_count(self.horizontal_order, self.periphonic_order)
    }

    /// Harmonic carried by each channel, in channel order.
    pub fn indices(&self) -> Vec<SphericalHarmonicIndex> {
        let ix = |m, n, s| SphericalHarmonicIndex::new(m, n, s).expect("valid by construction");
        if self.is_fuma() {
            return vec![ix(0, 0, 1), ix(1, 1, 1), ix(1, 1, -1), ix(1, 0, 1)];
        }
        let p = self.periphonic_order as usize;
        let mut out: Vec<SphericalHarmonicIndex> =
            (0..(p + 1) * (p + 1)).map(SphericalHarmonicIndex::from_acn).collect();
        for m in self.periphonic_order + 1..=self.horizontal_order {
            out.push(ix(m, m, 1));
            out.push(ix(m, m, -1));
        }
        out
    }

    /// Channel positions of `W`, `X`, `Y` and (if present) `Z` for
    /// first-order formats.
    fn first_order_slots(&self) -> Result<(usize, usize, usize, Option<usize>), AmbisonicsError> {
        if self.horizontal_order != 1 {
            return Err(AmbisonicsError::UnsupportedOrder(self.horizontal_order));
        }
        Ok(match (self.ordering, self.periphonic_order) {
            (ChannelOrdering::FumaWxyz, _) => (0, 1, 2, Some(3)),
            (ChannelOrdering::Acn, 1) => (0, 3, 1, Some(2)),
            (ChannelOrdering::Acn, _) => (0, 1, 2, None),
        })
    }
}

fn mixed_order_count(h: u32, p: u32) -> usize {
    let (h, p) = (h as usize, p as usize);
    (p + 1) * (p + 1) + 2 * (h - p)
}

/// Number of components of a `#H#P` mixed-order signal: `(P+1)² + 2(H−P)`.
pub fn component_count(horizontal_order: u32, periphonic_order: u32) -> Result<usize, AmbisonicsError> {
    if periphonic_order > horizontal_order {
        return Err(AmbisonicsError::InvalidOrder {
            horizontal: horizontal_order,
            periphonic: periphonic_order,
        });
    }
    Ok(mixed_order_count(horizontal_order, periphonic_order))
}

/// One sample of an Ambisonic signal.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbisonicFrame {
    pub format: AmbisonicFormat,
    pub components: Vec<f64>,
}

impl AmbisonicFrame {
    pub fn zero(format: AmbisonicFormat) -> Self {
        Self {
            format,
            components: vec![0.0; format.component_count()],
        }
    }

    pub fn new(format: AmbisonicFormat, components: Vec<f64>) -> Result<Self, AmbisonicsError> {
        format.validate()?;
        if components.len() != format.component_count() {
            return Err(AmbisonicsError::DimensionMismatch {
                expected: format.component_count(),
                got: components.len(),
            });
        }
        Ok(Self { format, components })
    }
}

/// Planar multichannel Ambisonic signal, one `Vec` per component.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbisonicStream {
    pub format: AmbisonicFormat,
    pub channels: Vec<Vec<f64>>,
}

impl AmbisonicStream {
    pub fn new(format: AmbisonicFormat, channels: Vec<Vec<f64>>) -> Result<Self, AmbisonicsError> {
        format.validate()?;
        if channels.len() != format.component_count() {
            return Err(AmbisonicsError::DimensionMismatch {
                expected: format.component_count(),
                got: channels.len(),
            });
        }
        Ok(Self { format, channels })
    }

    pub fn silent(format: AmbisonicFormat, len: usize) -> Self {
        Self {
            format,
            channels: vec![vec![0.0; len]; format.component_count()],
        }
    }

    /// Encodes a mono signal from a fixed direction.
    pub fn encode_mono(format: AmbisonicFormat, signal: &[f64], d: Direction) -> Result<Self, AmbisonicsError> {
        let coeffs = encode_coefficients(format, d)?;
        let channels = coeffs
            .iter()
            .map(|&c| signal.iter().map(|&s| s * c).collect())
            .collect();
        Ok(Self { format, channels })
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |c| c.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn frame(&self, i: usize) -> AmbisonicFrame {
        AmbisonicFrame {
            format: self.format,
            components: self.channels.iter().map(|c| c[i]).collect(),
        }
    }

    pub fn set_frame(&mut self, i: usize, frame: &AmbisonicFrame) {
        for (c, &v) in self.channels.iter_mut().zip(&frame.components) {
            c[i] = v;
        }
    }

    /// Applies a per-frame map, which must preserve the format.
    pub fn map_frames<E>(
        &self,
        mut f: impl FnMut(usize, &AmbisonicFrame) -> Result<AmbisonicFrame, E>,
    ) -> Result<Self, E> {
        let mut out = self.clone();
        for i in 0..self.len() {
            let frame = f(i, &self.frame(i))?;
            out.format = frame.format;
            out.set_frame(i, &frame);
        }
        Ok(out)
    }
}

/// Encoding gains for a unit input in `format` from direction `d`.
pub fn encode_coefficients(format: AmbisonicFormat, d: Direction) -> Result<Vec<f64>, AmbisonicsError> {
    format.validate()?;
    if format.is_fuma() {
        return Ok(encode_foa(1.0, d).components);
    }
    Ok(format
        .indices()
        .into_iter()
        .map(|idx| spherical_harmonic(idx, d))
        .collect())
}

/// B-format encoding: `W = I/√2`, `X = I cos θ cos φ`, `Y = I sin θ cos φ`,
/// `Z = I sin φ`.
pub fn encode_foa(input: f64, d: Direction) -> AmbisonicFrame {
    let (t, p) = (d.azimuth(), d.elevation());
    let cp = math::cos(p);
    AmbisonicFrame {
        format: AmbisonicFormat::FUMA,
        components: vec![
            input * FRAC_1_SQRT_2,
            input * math::cos(t) * cp,
            input * math::sin(t) * cp,
            input * math::sin(p),
        ],
    }
}

/// Mixed-order `#H#P` encoding in ACN/SN3D.
pub fn encode_hoa(
    input: f64,
    d: Direction,
    horizontal_order: u32,
    periphonic_order: u32,
) -> Result<AmbisonicFrame, AmbisonicsError> {
    let format = AmbisonicFormat::acn_sn3d(horizontal_order, periphonic_order)?;
    let components = format
        .indices()
        .into_iter()
        .map(|idx| input * spherical_harmonic(idx, d))
        .collect();
    Ok(AmbisonicFrame { format, components })
}

/// Inverse-distance gain `min(1, reference / distance)`.
pub fn distance_gain(distance: f64, reference_distance: f64) -> Result<f64, AmbisonicsError> {
    if !(distance > 0.0) {
        return Err(AmbisonicsError::NonPositiveDistance(distance));
    }
    Ok((reference_distance / distance).min(1.0))
}

/// [`encode_hoa`] scaled by [`distance_gain`].
pub fn encode_with_distance_gain(
    input: f64,
    d: Direction,
    distance: f64,
    reference_distance: f64,
    horizontal_order: u32,
    periphonic_order: u32,
) -> Result<AmbisonicFrame, AmbisonicsError> {
    let g = distance_gain(distance, reference_distance)?;
    encode_hoa(input * g, d, horizontal_order, periphonic_order)
}

fn rotate_plane(frame: &AmbisonicFrame, a: usize, b: usize, angle: f64) -> AmbisonicFrame {
    let (s, c) = (math::sin(angle), math::cos(angle));
    let mut out = frame.clone();
    let (va, vb) = (frame.components[a], frame.components[b]);
    out.components[a] = va * c - vb * s;
    out.components[b] = va * s + vb * c;
    out
}

/// Rotation about the vertical axis: `X' = X cos α − Y sin α`,
/// `Y' = X sin α + Y cos α`. A source at azimuth θ moves to θ + α.
pub fn rotate_z(frame: &AmbisonicFrame, angle: f64) -> Result<AmbisonicFrame, AmbisonicsError> {
    let (_, x, y, _) = frame.format.first_order_slots()?;
    Ok(rotate_plane(frame, x, y, angle))
}

/// Rotation in the Y–Z plane (about the front axis); positive angles move
/// the left direction towards the zenith.
pub fn rotate_x(frame: &AmbisonicFrame, angle: f64) -> Result<AmbisonicFrame, AmbisonicsError> {
    let (_, _, y, z) = frame.format.first_order_slots()?;
    Ok(rotate_plane(frame, y, z.ok_or(AmbisonicsError::MissingZ)?, angle))
}

/// Rotation in the X–Z plane; positive angles move the front direction
/// towards the zenith.
pub fn rotate_y(frame: &AmbisonicFrame, angle: f64) -> Result<AmbisonicFrame, AmbisonicsError> {
    let (_, x, _, z) = frame.format.first_order_slots()?;
    Ok(rotate_plane(frame, x, z.ok_or(AmbisonicsError::MissingZ)?, angle))
}

/// Converts a first-order frame between FuMa `W X Y Z` and ACN/SN3D
/// `W Y Z X` (W rescaled by √2 on the way in, 1/√2 on the way out).
pub fn convert_fuma_acn(frame: &AmbisonicFrame) -> Result<AmbisonicFrame, AmbisonicsError> {
    let f = frame.format;
    let c = &frame.components;
    if f.is_fuma() {
        Ok(AmbisonicFrame {
            format: AmbisonicFormat::acn_sn3d(1, 1)?,
            components: vec![c[0] * SQRT_2, c[2], c[3], c[1]],
        })
    } else if f.horizontal_order == 1 && f.periphonic_order == 1 {
        Ok(AmbisonicFrame {
            format: AmbisonicFormat::FUMA,
            components: vec![c[0] * FRAC_1_SQRT_2, c[3], c[1], c[2]],
        })
    } else {
        Err(AmbisonicsError::FumaRequiresFirstOrder)
    }
}

/// Stream version of [`convert_fuma_acn`].
pub fn convert_stream_fuma_acn(stream: &AmbisonicStream) -> Result<AmbisonicStream, AmbisonicsError> {
    stream.map_frames(|_, f| convert_fuma_acn(f))
}
