use alloc::vec;
use alloc::vec::Vec;

use super::{BinauralError, Convolver, Hrir, HrirSet};
use crate::ambisonics::{encode_coefficients, rotate_z, AmbisonicFormat, AmbisonicStream, DecoderMatrix};
use crate::geometry::{Direction, LoudspeakerLayout};
use crate::linalg::Matrix;

/// Smallest accepted ratio of extreme eigenvalues of `C Cᵀ`.
const MIN_RCOND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterDerivation {
    VirtualSpeakers,
    LeastSquares,
}

/// `2 × K` impulse responses mapping Ambisonic components to the ears.
#[derive(Debug, Clone, PartialEq)]
pub struct BinauralFilterMatrix {
    /// `[ear][component][tap]`.
    responses: [Vec<Vec<f64>>; 2],
    format: AmbisonicFormat,
    derivation: FilterDerivation,
}

impl BinauralFilterMatrix {
    pub fn new(
        responses: [Vec<Vec<f64>>; 2],
        format: AmbisonicFormat,
        derivation: FilterDerivation,
    ) -> Result<Self, BinauralError> {
        let k = format.component_count();
        let taps = responses[0].first().map_or(0, Vec::len);
        for ear in &responses {
            if ear.len() != k {
                return Err(BinauralError::DimensionMismatch {
                    expected: k,
                    got: ear.len(),
                });
            }
            if ear.iter().any(|r| r.len() != taps || r.iter().any(|x| !x.is_finite())) {
                return Err(BinauralError::InvalidHrir(
                    "filter responses must be finite with equal lengths",
                ));
            }
        }
        if taps == 0 {
            return Err(BinauralError::InvalidHrir("empty filter responses"));
        }
        Ok(Self {
            responses,
            format,
            derivation,
        })
    }

    pub fn response(&self, ear: usize, component: usize) -> &[f64] {
        &self.responses[ear][component]
    }

    pub fn format(&self) -> AmbisonicFormat {
        self.format
    }

    pub fn derivation(&self) -> FilterDerivation {
        self.derivation
    }

    pub fn components(&self) -> usize {
        self.responses[0].len()
    }

    pub fn taps(&self) -> usize {
        self.responses[0][0].len()
    }

    /// Right-ear responses from the left ones for a symmetric head:
    /// components odd in azimuth (`Y` at first order) change sign.
    pub fn mirrored_from_left(&self) -> Self {
        let signs = mirror_sign(self.format);
        let right = self.responses[0]
            .iter()
            .zip(&signs)
            .map(|(r, s)| r.iter().map(|x| x * s).collect())
            .collect();
        Self {
            responses: [self.responses[0].clone(), right],
            format: self.format,
            derivation: self.derivation,
        }
    }
}

/// `+1` for components symmetric under `y → -y`, `-1` for the others.
pub fn mirror_sign(format: AmbisonicFormat) -> Vec<f64> {
    format
        .indices()
        .iter()
        .map(|i| if i.sigma() < 0 { -1.0 } else { 1.0 })
        .collect()
}

/// Nearest HRIR for every speaker of a virtual layout.
pub fn virtual_speaker_hrirs(layout: &LoudspeakerLayout, set: &HrirSet) -> Vec<Hrir> {
    layout
        .directions()
        .into_iter()
        .map(|d| set.nearest(d).clone())
        .collect()
}

fn padded(x: &[f64], taps: usize) -> Vec<f64> {
    let mut v = x.to_vec();
    v.resize(taps, 0.0);
    v
}

fn check_channels(decoder: &DecoderMatrix, stream: &AmbisonicStream) -> Result<(), BinauralError> {
    if stream.channels.len() != decoder.components() {
        return Err(BinauralError::DimensionMismatch {
            expected: decoder.components(),
            got: stream.channels.len(),
        });
    }
    Ok(())
}

/// Streaming virtual-loudspeaker renderer: speaker feeds `V = D · frame`,
/// then each ear sums `V_i` filtered by speaker `i`'s HRIR.
#[derive(Debug, Clone)]
pub struct VirtualSpeakerRenderer {
    decoder: DecoderMatrix,
    /// `[speaker][ear]`.
    convolvers: Vec<[Convolver; 2]>,
}

impl VirtualSpeakerRenderer {
    pub fn new(decoder: DecoderMatrix, hrirs: &[Hrir]) -> Result<Self, BinauralError> {
        if hrirs.len() != decoder.speakers() {
            return Err(BinauralError::DimensionMismatch {
                expected: decoder.speakers(),
                got: hrirs.len(),
            });
        }
        let convolvers = hrirs
            .iter()
            .map(|h| [Convolver::new(h.left.clone()), Convolver::new(h.right.clone())])
            .collect();
        Ok(Self { decoder, convolvers })
    }

    pub fn decoder(&self) -> &DecoderMatrix {
        &self.decoder
    }

    /// Renders one block; `block` holds one channel per component.
    pub fn process(&mut self, block: &[Vec<f64>]) -> Result<[Vec<f64>; 2], BinauralError> {
        if block.len() != self.decoder.components() {
            return Err(BinauralError::DimensionMismatch {
                expected: self.decoder.components(),
                got: block.len(),
            });
        }
        let n = block.first().map_or(0, Vec::len);
        let mut out = [vec![0.0; n], vec![0.0; n]];
        let mut feed = vec![0.0; n];
        for (i, convs) in self.convolvers.iter_mut().enumerate() {
            feed.iter_mut().for_each(|x| *x = 0.0);
            for (c, channel) in block.iter().enumerate() {
                let g = self.decoder.matrix()[(i, c)];
                if g != 0.0 {
                    for (f, x) in feed.iter_mut().zip(channel) {
                        *f += g * x;
                    }
                }
            }
            for (ear, conv) in convs.iter_mut().enumerate() {
                conv.process_add(&feed, &mut out[ear]);
            }
        }
        Ok(out)
    }
}

/// Whole-stream virtual-loudspeaker decode, processed in blocks of `block_size`.
pub fn binaural_decode_virtual_speakers(
    stream: &AmbisonicStream,
    decoder: &DecoderMatrix,
    hrirs: &[Hrir],
    block_size: usize,
) -> Result<[Vec<f64>; 2], BinauralError> {
    check_channels(decoder, stream)?;
    if stream.format != decoder.format() {
        return Err(crate::ambisonics::AmbisonicsError::FormatMismatch.into());
    }
    let mut r = VirtualSpeakerRenderer::new(decoder.clone(), hrirs)?;
    run_blocks(stream, block_size, |b| r.process(b))
}

fn run_blocks(
    stream: &AmbisonicStream,
    block_size: usize,
    mut f: impl FnMut(&[Vec<f64>]) -> Result<[Vec<f64>; 2], BinauralError>,
) -> Result<[Vec<f64>; 2], BinauralError> {
    let block_size = block_size.max(1);
    let mut out = [Vec::with_capacity(stream.len()), Vec::with_capacity(stream.len())];
    let mut start = 0;
    while start < stream.len() {
        let end = (start + block_size).min(stream.len());
        let block: Vec<Vec<f64>> = stream.channels.iter().map(|c| c[start..end].to_vec()).collect();
        let [l, r] = f(&block)?;
        out[0].extend(l);
        out[1].extend(r);
        start = end;
    }
    Ok(out)
}

/// `F_{e,k} = Σ_i D_{i,k} · H_{i,e}`.
pub fn precompute_filter_matrix(
    decoder: &DecoderMatrix,
    hrirs: &[Hrir],
) -> Result<BinauralFilterMatrix, BinauralError> {
    if hrirs.len() != decoder.speakers() {
        return Err(BinauralError::DimensionMismatch {
            expected: decoder.speakers(),
            got: hrirs.len(),
        });
    }
    let taps = hrirs.iter().map(Hrir::taps).max().unwrap_or(1).max(1);
    let k = decoder.components();
    let mut responses = [vec![vec![0.0; taps]; k], vec![vec![0.0; taps]; k]];
    for (i, h) in hrirs.iter().enumerate() {
        for (ear, resp) in responses.iter_mut().enumerate() {
            let ir = h.ear(ear);
            for (c, r) in resp.iter_mut().enumerate() {
                let d = decoder.matrix()[(i, c)];
                if d == 0.0 {
                    continue;
                }
                for (t, &x) in ir.iter().enumerate() {
                    r[t] += d * x;
                }
            }
        }
    }
    BinauralFilterMatrix::new(responses, decoder.format(), FilterDerivation::VirtualSpeakers)
}

/// Streaming renderer applying a filter matrix directly to the components.
#[derive(Debug, Clone)]
pub struct FilterRenderer {
    filters: BinauralFilterMatrix,
    /// `[ear][component]`.
    convolvers: [Vec<Convolver>; 2],
}

impl FilterRenderer {
    pub fn new(filters: BinauralFilterMatrix) -> Self {
        let make = |ear: usize| -> Vec<Convolver> {
            (0..filters.components())
                .map(|c| Convolver::new(filters.response(ear, c).to_vec()))
                .collect()
        };
        let convolvers = [make(0), make(1)];
        Self { filters, convolvers }
    }

    pub fn filters(&self) -> &BinauralFilterMatrix {
        &self.filters
    }

    pub fn process(&mut self, block: &[Vec<f64>]) -> Result<[Vec<f64>; 2], BinauralError> {
        if block.len() != self.filters.components() {
            return Err(BinauralError::DimensionMismatch {
                expected: self.filters.components(),
                got: block.len(),
            });
        }
        let n = block.first().map_or(0, Vec::len);
        let mut out = [vec![0.0; n], vec![0.0; n]];
        for (ear, convs) in self.convolvers.iter_mut().enumerate() {
            for (conv, channel) in convs.iter_mut().zip(block) {
                conv.process_add(channel, &mut out[ear]);
            }
        }
        Ok(out)
    }

    /// Whole-stream rendering in blocks of `block_size`.
    pub fn render(&mut self, stream: &AmbisonicStream, block_size: usize) -> Result<[Vec<f64>; 2], BinauralError> {
        if stream.format != self.filters.format {
            return Err(crate::ambisonics::AmbisonicsError::FormatMismatch.into());
        }
        run_blocks(stream, block_size, |b| self.process(b))
    }
}

/// Least-squares filter matrix: per tap and ear, `F = H Cᵀ (C Cᵀ)⁻¹`, where
/// `C` holds the `format` encoding coefficients of each direction. With
/// `symmetric_head` only the left ear is solved and the right ear mirrored.
pub fn solve_filter_least_squares(
    directions: &[Direction],
    hrirs: &[Hrir],
    format: AmbisonicFormat,
    symmetric_head: bool,
) -> Result<BinauralFilterMatrix, BinauralError> {
    format.validate()?;
    let k = format.component_count();
    let n = directions.len();
    if hrirs.len() != n {
        return Err(BinauralError::DimensionMismatch {
            expected: n,
            got: hrirs.len(),
        });
    }
    if n < k {
        return Err(BinauralError::TooFewDirections { needed: k, got: n });
    }
    let mut c = Matrix::zeros(k, n);
    for (j, d) in directions.iter().enumerate() {
        for (i, v) in encode_coefficients(format, *d)?.into_iter().enumerate() {
            c[(i, j)] = v;
        }
    }
    let gram = c.mul(&c.transpose());
    let eig = gram.symmetric_eigenvalues();
    let (lo, hi) = (eig[0], eig[eig.len() - 1]);
    let rcond = if hi > 0.0 { lo / hi } else { 0.0 };
    if !(rcond > MIN_RCOND) {
        return Err(BinauralError::IllConditioned(rcond.max(0.0)));
    }
    let inv = gram.inverse().ok_or(BinauralError::IllConditioned(rcond))?;
    // P = (C Cᵀ)⁻¹ C, so that f_e(t) = P · h_e(t)
    let p = inv.mul(&c);

    let taps = hrirs.iter().map(Hrir::taps).max().unwrap_or(1);
    let solve_ear = |ear: usize| -> Vec<Vec<f64>> {
        let h: Vec<Vec<f64>> = hrirs.iter().map(|x| padded(x.ear(ear), taps)).collect();
        (0..k)
            .map(|comp| {
                (0..taps)
                    .map(|t| (0..n).map(|j| p[(comp, j)] * h[j][t]).sum())
                    .collect()
            })
            .collect()
    };
    let left = solve_ear(0);
    let filters = if symmetric_head {
        BinauralFilterMatrix::new([left.clone(), left], format, FilterDerivation::LeastSquares)?.mirrored_from_left()
    } else {
        BinauralFilterMatrix::new([left, solve_ear(1)], format, FilterDerivation::LeastSquares)?
    };
    Ok(filters)
}

/// Counter-rotates the sound field against a head yaw so the rendered scene
/// stays fixed in the room.
pub fn compensate_head_rotation(stream: &AmbisonicStream, head_yaw: f64) -> Result<AmbisonicStream, BinauralError> {
    Ok(stream.map_frames(|_, f| rotate_z(f, -head_yaw))?)
}
