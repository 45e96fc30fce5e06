//! Distance-Based Amplitude Panning.
//!
//! `v_i = k / d_i^a` with `k = 1 / √(Σ 1/d_i^{2a})`, so that `Σ v_i² = 1`.
//! Distances include a spatial blur `r`; sources outside the convex hull of
//! the speakers are moved to the closest hull point first.

use alloc::vec::Vec;

use crate::geometry::{GeometryError, LoudspeakerLayout, Position};
use crate::hull::{ConvexHull, Dimensionality};
use crate::math;
use crate::panning::GainVector;

pub const DEFAULT_ROLLOFF_DB: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DbapError {
    #[error("rolloff must be positive, got {0} dB")]
    InvalidRolloff(f64),
    #[error("spatial blur must be finite and non-negative, got {0}")]
    InvalidBlur(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Rolloff exponent `a = R / (20 log₁₀ 2)` for `R` dB per distance doubling.
pub fn rolloff_exponent(rolloff_db: f64) -> f64 {
    rolloff_db / (20.0 * math::log10(2.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbapConfig {
    layout: LoudspeakerLayout,
    hull: ConvexHull,
    exponent: f64,
    rolloff_db: f64,
    blur: f64,
    /// Apply `1 / (1 + b)^a` for sources a distance `b` outside the hull.
    pub exterior_attenuation: bool,
}

impl DbapConfig {
    /// Dimensionality is inferred: planar when every speaker has `z = 0`.
    pub fn new(layout: LoudspeakerLayout, rolloff_db: f64, blur: f64) -> Result<Self, DbapError> {
        let dims = if layout.speakers.iter().all(|p| p.z == 0.0) {
            Dimensionality::Two
        } else {
            Dimensionality::Three
        };
        Self::with_dimensionality(layout, rolloff_db, blur, dims)
    }

    pub fn with_dimensionality(
        layout: LoudspeakerLayout,
        rolloff_db: f64,
        blur: f64,
        dims: Dimensionality,
    ) -> Result<Self, DbapError> {
        if !(rolloff_db > 0.0) || !rolloff_db.is_finite() {
            return Err(DbapError::InvalidRolloff(rolloff_db));
        }
        if !(blur >= 0.0) || !blur.is_finite() {
            return Err(DbapError::InvalidBlur(blur));
        }
        if layout.is_empty() {
            return Err(GeometryError::EmptyLayout.into());
        }
        let hull = ConvexHull::lenient(&layout.speakers, dims)?;
        Ok(Self {
            layout,
            hull,
            exponent: rolloff_exponent(rolloff_db),
            rolloff_db,
            blur,
            exterior_attenuation: false,
        })
    }

    /// Overrides the rolloff exponent `a` directly.
    pub fn with_exponent(mut self, a: f64) -> Result<Self, DbapError> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(DbapError::InvalidRolloff(a * 20.0 * math::log10(2.0)));
        }
        self.exponent = a;
        self.rolloff_db = a * 20.0 * math::log10(2.0);
        Ok(self)
    }

    pub fn with_exterior_attenuation(mut self, on: bool) -> Self {
        self.exterior_attenuation = on;
        self
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn rolloff_db(&self) -> f64 {
        self.rolloff_db
    }

    pub fn blur(&self) -> f64 {
        self.blur
    }

    pub fn layout(&self) -> &LoudspeakerLayout {
        &self.layout
    }

    pub fn hull(&self) -> &ConvexHull {
        &self.hull
    }
}

/// `√(|speaker − source|² + r²)`.
pub fn blurred_distance(speaker: Position, source: Position, blur: f64) -> f64 {
    let d = speaker - source;
    math::sqrt(d.dot(d) + blur * blur)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbapGains {
    pub gains: GainVector,
    /// Set when the source coincides with this speaker and the blur is zero;
    /// the one-hot limit vector is returned.
    pub coincident_speaker: Option<usize>,
}

/// Unit-intensity amplitudes from blurred distances and exponent `a`.
pub fn gains_from_distances(distances: &[f64], exponent: f64) -> DbapGains {
    if let Some(j) = distances.iter().position(|&d| d == 0.0) {
        let mut g = GainVector::silent(distances.len());
        g.gains[j] = 1.0;
        return DbapGains {
            gains: g,
            coincident_speaker: Some(j),
        };
    }
    // scale by the nearest distance so tiny distances do not overflow
    let d_min = distances.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = distances.iter().map(|&d| math::powf(d_min / d, exponent)).collect();
    let k = 1.0 / math::sqrt(w.iter().map(|x| x * x).sum());
    DbapGains {
        gains: GainVector::from_gains(w.iter().map(|x| x * k).collect()),
        coincident_speaker: None,
    }
}

pub fn dbap_gains(source: Position, cfg: &DbapConfig) -> DbapGains {
    let d: Vec<f64> = cfg
        .layout
        .speakers
        .iter()
        .map(|&s| blurred_distance(s, source, cfg.blur))
        .collect();
    gains_from_distances(&d, cfg.exponent)
}

/// Moves an exterior source to the closest hull point; returns the effective
/// position and how far outside the hull the source was.
pub fn project_exterior_source(source: Position, cfg: &DbapConfig) -> (Position, f64) {
    cfg.hull.closest_point(source)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbapOutput {
    pub gains: GainVector,
    pub effective_position: Position,
    /// Distance outside the hull; a hook for distance effects (Doppler,
    /// reverb) that are not rendered here.
    pub exterior_distance: f64,
    pub coincident_speaker: Option<usize>,
}

pub fn dbap_pan(source: Position, cfg: &DbapConfig) -> DbapOutput {
    let (effective, exterior) = project_exterior_source(source, cfg);
    let DbapGains {
        mut gains,
        coincident_speaker,
    } = dbap_gains(effective, cfg);
    if cfg.exterior_attenuation && exterior > 0.0 {
        let att = 1.0 / math::powf(1.0 + exterior, cfg.exponent);
        gains = gains.scaled(att);
    }
    DbapOutput {
        gains,
        effective_position: effective,
        exterior_distance: exterior,
        coincident_speaker,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LayoutCategory, Vec3};
    use alloc::vec;

    fn square() -> LoudspeakerLayout {
        LoudspeakerLayout::new(
            "square",
            LayoutCategory::Regular,
            vec![
                Vec3::new(1.0, 1.0, 0.0),
                Vec3::new(-1.0, 1.0, 0.0),
                Vec3::new(-1.0, -1.0, 0.0),
                Vec3::new(1.0, -1.0, 0.0),
            ],
        )
    }

    #[test]
    fn blurred_distance_examples() {
        assert_eq!(blurred_distance(Vec3::ZERO, Vec3::ZERO, 0.0), 0.0);
        assert_eq!(blurred_distance(Vec3::ZERO, Vec3::ZERO, 0.5), 0.5);
        assert_eq!(blurred_distance(Vec3::new(3.0, 4.0, 0.0), Vec3::ZERO, 0.0), 5.0);
    }

    #[test]
    fn centre_of_square_is_balanced() {
        let cfg = DbapConfig::new(square(), 6.0, 0.0).unwrap();
        let g = dbap_gains(Vec3::ZERO, &cfg);
        for v in &g.gains.gains {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn two_speaker_example() {
        let g = gains_from_distances(&[1.0, 2.0], 1.0);
        assert!((g.gains.gains[0] - 2.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((g.gains.gains[1] - 1.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rolloff_for_free_field() {
        assert!((rolloff_exponent(6.0) - 6.0 / (20.0 * 2f64.log10())).abs() < 1e-15);
        assert!((rolloff_exponent(6.0) - 0.99657).abs() < 1e-5);
    }

    #[test]
    fn coincident_source_returns_limit() {
        let cfg = DbapConfig::new(square(), 6.0, 0.0).unwrap();
        let g = dbap_gains(Vec3::new(-1.0, 1.0, 0.0), &cfg);
        assert_eq!(g.coincident_speaker, Some(1));
        assert_eq!(g.gains.gains, vec![0.0, 1.0, 0.0, 0.0]);
        // blur keeps every speaker active
        let cfg = DbapConfig::new(square(), 6.0, 0.2).unwrap();
        let g = dbap_gains(Vec3::new(-1.0, 1.0, 0.0), &cfg);
        assert!(g.coincident_speaker.is_none());
        assert!(g.gains.gains.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn exterior_projection() {
        let cfg = DbapConfig::new(square(), 6.0, 0.1).unwrap();
        let (p, d) = project_exterior_source(Vec3::new(3.0, 0.0, 0.0), &cfg);
        assert!((p - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        assert!((d - 2.0).abs() < 1e-12);
        let inner = Vec3::new(0.2, -0.3, 0.0);
        assert_eq!(project_exterior_source(inner, &cfg), (inner, 0.0));
        assert_eq!(dbap_pan(inner, &cfg).gains, dbap_gains(inner, &cfg).gains);
    }

    #[test]
    fn attenuation_decreases_with_distance() {
        let cfg = DbapConfig::new(square(), 6.0, 0.1)
            .unwrap()
            .with_exterior_attenuation(true);
        let mut last = f64::INFINITY;
        for k in 1..20 {
            let out = dbap_pan(Vec3::new(1.0 + k as f64, 0.3, 0.0), &cfg);
            let p = out.gains.power();
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(
            DbapConfig::new(square(), 0.0, 0.0),
            Err(DbapError::InvalidRolloff(_))
        ));
        assert!(matches!(
            DbapConfig::new(square(), 6.0, -1.0),
            Err(DbapError::InvalidBlur(_))
        ));
    }
}
