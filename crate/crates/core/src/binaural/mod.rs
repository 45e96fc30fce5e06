//! Binaural rendering: HRIR sets, block convolution, virtual-loudspeaker
//! decoding of Ambisonic signals, filter-matrix derivation and the stereo
//! widener.

mod convolution;
mod filters;
mod hrir;
mod widener;

pub use convolution::Convolver;
pub use filters::{
    binaural_decode_virtual_speakers, compensate_head_rotation, mirror_sign, precompute_filter_matrix,
    solve_filter_least_squares, virtual_speaker_hrirs, BinauralFilterMatrix, FilterDerivation, FilterRenderer,
    VirtualSpeakerRenderer,
};
pub use hrir::{
    synthesize_spherical_head_hrir, synthesize_spherical_head_set, woodworth_itd, DistanceClass, Hrir, HrirSet,
    DEFAULT_HEAD_RADIUS, DEFAULT_HRIR_TAPS,
};
pub use widener::{stereo_widen, StereoWidener, WidenerParams};

use crate::ambisonics::AmbisonicsError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BinauralError {
    #[error("HRIR set is empty")]
    EmptySet,
    #[error("invalid HRIR: {0}")]
    InvalidHrir(&'static str),
    #[error("duplicate HRIR direction (az {azimuth_deg:.3} deg, el {elevation_deg:.3} deg)")]
    DuplicateDirection { azimuth_deg: f64, elevation_deg: f64 },
    #[error("symmetric head set has no mirror entry for (az {azimuth_deg:.3} deg, el {elevation_deg:.3} deg)")]
    MissingMirror { azimuth_deg: f64, elevation_deg: f64 },
    #[error("symmetric head set is not mirror-symmetric at (az {azimuth_deg:.3} deg, el {elevation_deg:.3} deg)")]
    Asymmetric { azimuth_deg: f64, elevation_deg: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("least-squares needs at least {needed} directions, got {got}")]
    TooFewDirections { needed: usize, got: usize },
    #[error("direction set is ill-conditioned (reciprocal condition number {0:.3e})")]
    IllConditioned(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Ambisonics(#[from] AmbisonicsError),
}

/// Index of an ear in two-element arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ear {
    Left = 0,
    Right = 1,
}
