//! Decoder matrices: `L = D · [components]` per sample.

use alloc::vec::Vec;

use crate::geometry::LoudspeakerLayout;
use crate::linalg::Matrix;
use crate::math::SQRT_2;
use crate::SPEED_OF_SOUND;

use super::{
    encode_coefficients, spherical_harmonic, AmbisonicFormat, AmbisonicFrame, AmbisonicStream, AmbisonicsError,
};

/// Relative Tikhonov damping for the pseudoinverse decoder.
const PINV_DAMPING: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecoderFlavour {
    /// Sampling decoder for regular layouts.
    #[default]
    Projection,
    /// Regularised pseudoinverse of the speaker harmonic matrix.
    Pseudoinverse,
}

impl DecoderFlavour {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecoderFlavour::Projection => "projection",
            DecoderFlavour::Pseudoinverse => "pseudoinverse",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "projection" => Some(DecoderFlavour::Projection),
            "pseudoinverse" | "pinv" => Some(DecoderFlavour::Pseudoinverse),
            _ => None,
        }
    }

    /// Smallest speaker count accepted for `components` signals.
    pub fn min_speakers(&self, components: usize) -> usize {
        match self {
            DecoderFlavour::Projection => components + 1,
            DecoderFlavour::Pseudoinverse => components,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DecoderOptions {
    pub flavour: DecoderFlavour,
    /// Delay closer speakers so all wavefronts arrive together. Required
    /// when speaker distances differ.
    pub delay_compensation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderMatrix {
    /// `L × K`, row per speaker, column per component.
    entries: Matrix,
    format: AmbisonicFormat,
    layout: LoudspeakerLayout,
    flavour: DecoderFlavour,
    delays: Vec<f64>,
}

impl DecoderMatrix {
    /// Wraps an explicit matrix (`speakers × components`).
    pub fn from_matrix(
        entries: Matrix,
        format: AmbisonicFormat,
        layout: LoudspeakerLayout,
        flavour: DecoderFlavour,
    ) -> Result<Self, AmbisonicsError> {
        if entries.rows() != layout.len() || entries.cols() != format.component_count() {
            return Err(AmbisonicsError::DimensionMismatch {
                expected: format.component_count(),
                got: entries.cols(),
            });
        }
        let delays = alloc::vec![0.0; layout.len()];
        Ok(Self {
            entries,
            format,
            layout,
            flavour,
            delays,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn format(&self) -> AmbisonicFormat {
        self.format
    }

    pub fn layout(&self) -> &LoudspeakerLayout {
        &self.layout
    }

    pub fn flavour(&self) -> DecoderFlavour {
        self.flavour
    }

    pub fn speakers(&self) -> usize {
        self.entries.rows()
    }

    pub fn components(&self) -> usize {
        self.entries.cols()
    }

    /// Per-speaker compensation delays in seconds (all zero unless enabled).
    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    /// Speaker gains for a single source direction.
    pub fn gains_for(&self, frame: &AmbisonicFrame) -> Result<Vec<f64>, AmbisonicsError> {
        decode_frame(frame, self)
    }
}

/// ACN/SN3D decoder for a `#H#P` signal.
pub fn build_decoder(
    layout: &LoudspeakerLayout,
    horizontal_order: u32,
    periphonic_order: u32,
    flavour: DecoderFlavour,
) -> Result<DecoderMatrix, AmbisonicsError> {
    let format = AmbisonicFormat::acn_sn3d(horizontal_order, periphonic_order)?;
    build_decoder_with(
        layout,
        format,
        DecoderOptions {
            flavour,
            delay_compensation: false,
        },
    )
}

pub fn build_decoder_with(
    layout: &LoudspeakerLayout,
    format: AmbisonicFormat,
    options: DecoderOptions,
) -> Result<DecoderMatrix, AmbisonicsError> {
    format.validate()?;
    if layout.is_empty() {
        return Err(AmbisonicsError::EmptyLayout);
    }
    let k = format.component_count();
    let l = layout.len();
    let needed = options.flavour.min_speakers(k);
    if l < needed {
        return Err(AmbisonicsError::TooFewSpeakers {
            flavour: options.flavour.as_str(),
            components: k,
            needed,
            got: l,
        });
    }

    let equidistant = layout.is_equidistant(1e-6);
    if !equidistant && !options.delay_compensation {
        return Err(AmbisonicsError::DelayCompensationRequired);
    }
    let distances = layout.distances();
    let max_d = distances.iter().cloned().fold(0.0, f64::max);
    let delays = if options.delay_compensation {
        distances.iter().map(|d| (max_d - d) / SPEED_OF_SOUND).collect()
    } else {
        alloc::vec![0.0; l]
    };

    let dirs = layout.directions();
    let entries = match options.flavour {
        DecoderFlavour::Projection => {
            let horizontal = layout.is_horizontal();
            let indices = format.indices();
            let mut d = Matrix::zeros(l, k);
            for (i, dir) in dirs.iter().enumerate() {
                for (c, idx) in indices.iter().enumerate() {
                    let m = idx.degree();
                    let weight = if horizontal {
                        match (m, idx.is_sectoral()) {
                            (0, _) => 1.0,
                            (_, true) => 2.0,
                            // non-sectoral harmonics carry no horizontal information
                            (_, false) => 0.0,
                        }
                    } else {
                        (2 * m + 1) as f64
                    };
                    d[(i, c)] = weight * spherical_harmonic(*idx, *dir) / l as f64;
                }
            }
            if format.is_fuma() {
                // FuMa W is the SN3D W divided by √2
                for i in 0..l {
                    d[(i, 0)] *= SQRT_2;
                }
            }
            d
        }
        DecoderFlavour::Pseudoinverse => {
            let mut y = Matrix::zeros(k, l);
            for (i, dir) in dirs.iter().enumerate() {
                for (c, v) in encode_coefficients(format, *dir)?.into_iter().enumerate() {
                    y[(c, i)] = v;
                }
            }
            y.regularized_pseudoinverse(PINV_DAMPING)
                .ok_or(AmbisonicsError::Singular)?
        }
    };
    if !entries.is_finite() {
        return Err(AmbisonicsError::Singular);
    }
    Ok(DecoderMatrix {
        entries,
        format,
        layout: layout.clone(),
        flavour: options.flavour,
        delays,
    })
}

fn check_format(format: AmbisonicFormat, decoder: &DecoderMatrix, got: usize) -> Result<(), AmbisonicsError> {
    if got != decoder.components() {
        return Err(AmbisonicsError::DimensionMismatch {
            expected: decoder.components(),
            got,
        });
    }
    if format != decoder.format {
        return Err(AmbisonicsError::FormatMismatch);
    }
    Ok(())
}

pub fn decode_frame(frame: &AmbisonicFrame, decoder: &DecoderMatrix) -> Result<Vec<f64>, AmbisonicsError> {
    check_format(frame.format, decoder, frame.components.len())?;
    Ok(decoder.entries.mul_vec(&frame.components))
}

/// Speaker feeds `L = D · components` for every sample of the stream.
/// Compensation delays are not applied here.
pub fn decode(stream: &AmbisonicStream, decoder: &DecoderMatrix) -> Result<Vec<Vec<f64>>, AmbisonicsError> {
    check_format(stream.format, decoder, stream.channels.len())?;
    let n = stream.len();
    let mut out = alloc::vec![alloc::vec![0.0; n]; decoder.speakers()];
    for (i, feed) in out.iter_mut().enumerate() {
        let row = decoder.entries.row(i);
        for (coef, channel) in row.iter().zip(&stream.channels) {
            if *coef == 0.0 {
                continue;
            }
            for (o, &x) in feed.iter_mut().zip(channel) {
                *o += coef * x;
            }
        }
    }
    Ok(out)
}
