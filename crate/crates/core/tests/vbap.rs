mod oracles;

use proptest::prelude::*;
use spatium_core::math::{deg, rad};
use spatium_core::vbap::{build_bases, pick_candidate, vbap_pan, vbap_pan_with, VbapError};
use spatium_core::{Dimensionality, Direction, LoudspeakerLayout};
use std::f64::consts::PI;

#[test]
fn stereo_ratios_follow_tangent_law() {
    let stereo = LoudspeakerLayout::preset("stereo").unwrap();
    let phi = rad(30.0);
    for k in -300..=300 {
        let theta = rad(k as f64 / 10.0);
        let g = vbap_pan(&stereo, Dimensionality::Two, Direction::horizontal(theta), 1.0).unwrap();
        let (g1, g2) = (g.gains[0], g.gains[1]);
        let (o1, o2) = oracles::tangent_law_bisection(theta, phi);
        assert!(((g1 - g2) / (g1 + g2) - theta.tan() / phi.tan()).abs() < 1e-9);
        assert!((g1 - o1).abs() < 1e-9 && (g2 - o2).abs() < 1e-9);
    }
}

#[test]
fn tie_break_prefers_larger_minimum_gain() {
    assert_eq!(pick_candidate(&[vec![0.1, 0.9, 0.9], vec![0.2, 0.3, 0.3]]), Some(1));
    assert_eq!(pick_candidate(&[vec![0.2, 0.3, 0.3], vec![0.1, 0.9, 0.9]]), Some(0));
    assert_eq!(pick_candidate(&[vec![-0.1, 1.0, 1.0]]), None);
}

#[test]
fn octagon_selects_enclosing_pair() {
    let layout = LoudspeakerLayout::preset("octagon").unwrap();
    let az: Vec<f64> = layout.directions().iter().map(|d| deg(d.azimuth())).collect();
    let bases = build_bases(&layout, Dimensionality::Two).unwrap();
    for t in 0..3600 {
        let target = t as f64 / 10.0;
        let g = vbap_pan_with(&bases, Direction::from_degrees(target, 0.0), 1.0).unwrap();
        let active: Vec<usize> = (0..8).filter(|&i| g.gains[i] > 1e-12).collect();
        let pairs = oracles::enclosing_pairs(&az, target);
        assert!(
            pairs.iter().any(|&(a, b)| active.iter().all(|&i| i == a || i == b)),
            "{target}"
        );
    }
}

#[test]
fn cube_gains_reconstruct_direction() {
    let layout = LoudspeakerLayout::preset("cube").unwrap();
    let bases = build_bases(&layout, Dimensionality::Three).unwrap();
    let dirs = layout.directions();
    let mut rng = oracles::rng(3);
    use rand::Rng;
    for _ in 0..1000 {
        let d = Direction::new(rng.gen_range(-PI..PI), rng.gen_range(-1.5..1.5));
        let g = vbap_pan_with(&bases, d, 1.0).unwrap();
        assert!(g.gains.iter().filter(|&&x| x > 1e-12).count() <= 3);
        let mut v = [0.0; 3];
        for (gi, s) in g.gains.iter().zip(&dirs) {
            let u = s.to_unit_vector().to_array();
            for k in 0..3 {
                v[k] += gi * u[k];
            }
        }
        let got = Direction::from_vector(spatium_core::Vec3::new(v[0], v[1], v[2]));
        assert!(got.angle_to(&d) < 1e-9);
    }
}

#[test]
fn gap_in_coverage_is_reported() {
    // a dome has no speakers below the horizon
    let dome = LoudspeakerLayout::from_degrees(
        "dome",
        spatium_core::LayoutCategory::Irregular,
        &[(0.0, 0.0, 1.0), (120.0, 0.0, 1.0), (-120.0, 0.0, 1.0), (0.0, 90.0, 1.0)],
    );
    let r = vbap_pan(&dome, Dimensionality::Three, Direction::from_degrees(0.0, -60.0), 1.0);
    assert!(matches!(r, Err(VbapError::Coverage { .. })), "{r:?}");
}

#[test]
fn gains_are_deterministic_and_unit_power() {
    let layout = LoudspeakerLayout::preset("cube").unwrap();
    let bases = build_bases(&layout, Dimensionality::Three).unwrap();
    for k in 0..720 {
        let d = Direction::from_degrees(k as f64 * 0.5, 20.0);
        let a = vbap_pan_with(&bases, d, 1.0).unwrap();
        let b = vbap_pan_with(&bases, d, 1.0).unwrap();
        assert_eq!(a, b);
        assert!((a.power() - 1.0).abs() < 1e-12);
        assert!(a.gains.iter().all(|&g| g >= 0.0));
    }
}

#[test]
fn unequal_distances_are_rejected() {
    let layout = LoudspeakerLayout::from_degrees(
        "uneven",
        spatium_core::LayoutCategory::Irregular,
        &[(30.0, 0.0, 1.0), (-30.0, 0.0, 2.0)],
    );
    assert!(matches!(
        vbap_pan(&layout, Dimensionality::Two, Direction::default(), 2.0),
        Err(VbapError::NotEquidistant)
    ));
}

proptest! {
    #[test]
    fn ring_gains_have_power_c(n in 3usize..12, az in -180.0f64..180.0, c in 0.1f64..4.0) {
        let layout = LoudspeakerLayout::ring("r", n, 2.0, 0.1);
        let g = vbap_pan(&layout, Dimensionality::Two, Direction::from_degrees(az, 0.0), c).unwrap();
        prop_assert!((g.power() - c).abs() < 1e-12);
        prop_assert!(g.gains.iter().all(|&x| x >= 0.0));
    }
}
