//! Vector Base Amplitude Panning for speaker pairs (2-D) and triplets (3-D).

use alloc::vec::Vec;

use crate::geometry::{Direction, LoudspeakerLayout, Vec3};
use crate::hull::{ConvexHull, Dimensionality};
use crate::linalg::Matrix;
use crate::math::{self, PI, TAU};
use crate::panning::GainVector;

/// Gains down to this value still count as non-negative; they are clamped to 0.
pub const NEGATIVE_GAIN_TOLERANCE: f64 = -1e-9;
/// Bases whose |det L| falls below this are treated as singular.
const SINGULAR_DET: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VbapError {
    #[error("layout needs at least {needed} speakers for {dims}-D VBAP, got {got}")]
    TooFewSpeakers { needed: usize, got: usize, dims: u8 },
    #[error("speakers must be equidistant from the listener")]
    NotEquidistant,
    #[error("2-D VBAP needs all speakers on the horizontal plane")]
    NotHorizontal,
    #[error("no valid vector base can be formed from this layout")]
    NoValidBase,
    #[error("singular vector base")]
    SingularBase,
    #[error("direction (az {azimuth_deg:.3} deg, el {elevation_deg:.3} deg) is not covered by any vector base")]
    Coverage { azimuth_deg: f64, elevation_deg: f64 },
    #[error("gains are all zero and cannot be normalised")]
    ZeroGains,
    #[error("power level must be positive")]
    InvalidPower,
}

/// A speaker pair or triplet with its direction matrix `L` (rows `l_i`) and
/// cached inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorBase {
    speakers: Vec<usize>,
    matrix: Matrix,
    inverse: Matrix,
}

impl VectorBase {
    pub fn new(speakers: Vec<usize>, unit_vectors: Vec<Vec<f64>>) -> Result<Self, VbapError> {
        let matrix = Matrix::from_rows(&unit_vectors);
        if determinant(&matrix).abs() < SINGULAR_DET {
            return Err(VbapError::SingularBase);
        }
        let inverse = matrix.inverse().ok_or(VbapError::SingularBase)?;
        Ok(Self {
            speakers,
            matrix,
            inverse,
        })
    }

    pub fn speakers(&self) -> &[usize] {
        &self.speakers
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dims(&self) -> usize {
        self.speakers.len()
    }
}

fn determinant(m: &Matrix) -> f64 {
    match m.rows() {
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            let r = |i: usize| Vec3::new(m[(i, 0)], m[(i, 1)], m[(i, 2)]);
            r(0).dot(r(1).cross(r(2)))
        }
        _ => 0.0,
    }
}

/// `g = pᵀ · L⁻¹`, unnormalised.
pub fn solve_gains(base: &VectorBase, p: &[f64]) -> Vec<f64> {
    (0..base.dims())
        .map(|c| (0..base.dims()).map(|r| p[r] * base.inverse[(r, c)]).sum())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseSet {
    bases: Vec<VectorBase>,
    dims: Dimensionality,
    speakers: usize,
}

impl BaseSet {
    pub fn bases(&self) -> &[VectorBase] {
        &self.bases
    }

    pub fn dimensionality(&self) -> Dimensionality {
        self.dims
    }

    pub fn speaker_count(&self) -> usize {
        self.speakers
    }

    /// Target vector in the base set's space (2 or 3 components).
    pub fn target_vector(&self, d: Direction) -> Vec<f64> {
        match self.dims {
            Dimensionality::Two => alloc::vec![math::cos(d.azimuth()), math::sin(d.azimuth())],
            Dimensionality::Three => d.to_unit_vector().to_array().to_vec(),
        }
    }
}

/// Forms the vector bases: adjacent azimuth pairs in 2-D, the triangulated
/// convex hull of the speaker directions in 3-D. Singular candidates
/// (opposite pairs, triplets coplanar with the listener) are skipped.
pub fn build_bases(layout: &LoudspeakerLayout, dims: Dimensionality) -> Result<BaseSet, VbapError> {
    let n = layout.len();
    let needed = dims.as_u8() as usize;
    if n < needed {
        return Err(VbapError::TooFewSpeakers {
            needed,
            got: n,
            dims: dims.as_u8(),
        });
    }
    if !layout.is_equidistant(1e-6) {
        return Err(VbapError::NotEquidistant);
    }
    let dirs = layout.directions();
    let mut bases = Vec::new();
    match dims {
        Dimensionality::Two => {
            if !layout.is_horizontal() {
                return Err(VbapError::NotHorizontal);
            }
            let mut az: Vec<(usize, f64)> = dirs
                .iter()
                .enumerate()
                .map(|(i, d)| (i, math::wrap_positive(d.azimuth())))
                .collect();
            az.sort_by(|a, b| a.1.total_cmp(&b.1));
            for k in 0..az.len() {
                let (a, start) = az[k];
                let (b, end) = az[(k + 1) % az.len()];
                if a == b {
                    continue;
                }
                let span = if k + 1 == az.len() {
                    end + TAU - start
                } else {
                    end - start
                };
                if span >= PI - 1e-9 {
                    continue;
                }
                let rows = [a, b]
                    .iter()
                    .map(|&i| alloc::vec![math::cos(dirs[i].azimuth()), math::sin(dirs[i].azimuth())])
                    .collect();
                if let Ok(base) = VectorBase::new(alloc::vec![a, b], rows) {
                    bases.push(base);
                }
            }
        }
        Dimensionality::Three => {
            let units: Vec<Vec3> = dirs.iter().map(|d| d.to_unit_vector()).collect();
            let triangles: Vec<[usize; 3]> = if n == 3 {
                alloc::vec![[0, 1, 2]]
            } else {
                let hull = ConvexHull::lenient(&units, Dimensionality::Three).map_err(|_| VbapError::NoValidBase)?;
                match hull.rank() {
                    3 => hull.faces().to_vec(),
                    2 => {
                        let ring: Vec<usize> = hull.vertex_indices();
                        (1..ring.len().saturating_sub(1))
                            .map(|i| [ring[0], ring[i], ring[i + 1]])
                            .collect()
                    }
                    _ => Vec::new(),
                }
            };
            for tri in triangles {
                let rows = tri.iter().map(|&i| units[i].to_array().to_vec()).collect();
                if let Ok(base) = VectorBase::new(tri.to_vec(), rows) {
                    bases.push(base);
                }
            }
        }
    }
    if bases.is_empty() {
        return Err(VbapError::NoValidBase);
    }
    Ok(BaseSet {
        bases,
        dims,
        speakers: n,
    })
}

/// Index of the preferred candidate: all gains ≥ −1e-9, maximal smallest
/// gain, lowest index on exact ties.
pub fn pick_candidate(candidates: &[Vec<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, g) in candidates.iter().enumerate() {
        let min = g.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < NEGATIVE_GAIN_TOLERANCE {
            continue;
        }
        if best.is_none_or(|(_, m)| min > m) {
            best = Some((i, min));
        }
    }
    best.map(|(i, _)| i)
}

/// Base covering `p` and its raw gains (negative noise clamped to 0).
pub fn select_base<'a>(bases: &'a BaseSet, p: &[f64]) -> Result<(&'a VectorBase, Vec<f64>), VbapError> {
    let candidates: Vec<Vec<f64>> = bases.bases.iter().map(|b| solve_gains(b, p)).collect();
    let k = pick_candidate(&candidates).ok_or_else(|| {
        let d = if p.len() == 2 {
            Direction::horizontal(math::atan2(p[1], p[0]))
        } else {
            Direction::from_vector(Vec3::new(p[0], p[1], p[2]))
        };
        VbapError::Coverage {
            azimuth_deg: math::deg(d.azimuth()),
            elevation_deg: math::deg(d.elevation()),
        }
    })?;
    let gains = candidates[k].iter().map(|&g| g.max(0.0)).collect();
    Ok((&bases.bases[k], gains))
}

/// `g_norm = √C · g / √(g·gᵀ)`.
pub fn normalize_gains(gains: &[f64], power: f64) -> Result<Vec<f64>, VbapError> {
    if !(power > 0.0) {
        return Err(VbapError::InvalidPower);
    }
    let norm = math::sqrt(gains.iter().map(|g| g * g).sum());
    if norm == 0.0 {
        return Err(VbapError::ZeroGains);
    }
    let scale = math::sqrt(power) / norm;
    Ok(gains.iter().map(|g| g * scale).collect())
}

/// Full-layout gains for a target direction.
pub fn vbap_pan_with(bases: &BaseSet, target: Direction, power: f64) -> Result<GainVector, VbapError> {
    let p = bases.target_vector(target);
    let (base, raw) = select_base(bases, &p)?;
    let g = normalize_gains(&raw, power)?;
    let mut out = GainVector::silent(bases.speakers);
    for (&spk, v) in base.speakers.iter().zip(g) {
        out.gains[spk] = v;
    }
    Ok(out)
}

/// Convenience wrapper building the bases on each call.
pub fn vbap_pan(
    layout: &LoudspeakerLayout,
    dims: Dimensionality,
    target: Direction,
    power: f64,
) -> Result<GainVector, VbapError> {
    vbap_pan_with(&build_bases(layout, dims)?, target, power)
}
