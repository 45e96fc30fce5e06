mod oracles;

use proptest::prelude::*;
use rand::Rng;
use spatium_core::dbap::{dbap_gains, dbap_pan, gains_from_distances, rolloff_exponent, DbapConfig};
use spatium_core::{ConvexHull, Dimensionality, LayoutCategory, LoudspeakerLayout, Position};

fn random_planar_layout(rng: &mut impl Rng, n: usize) -> LoudspeakerLayout {
    let speakers = (0..n)
        .map(|_| Position::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), 0.0))
        .collect();
    LoudspeakerLayout::new("random", LayoutCategory::Irregular, speakers)
}

#[test]
fn rolloff_exponent_for_six_db() {
    let a = rolloff_exponent(6.0);
    assert!((a - 6.0 / (20.0 * 2f64.log10())).abs() < 1e-12);
    assert!((a - 0.99657842).abs() < 1e-8);
}

#[test]
fn gains_have_unit_intensity() {
    let mut rng = oracles::rng(4);
    for r in [3.0, 4.0, 5.0, 6.0] {
        for _ in 0..500 {
            let n = rng.gen_range(3..10);
            let layout = random_planar_layout(&mut rng, n);
            let cfg = DbapConfig::new(layout, r, rng.gen_range(0.0..0.5)).unwrap();
            let src = Position::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), 0.0);
            let g = dbap_pan(src, &cfg).gains;
            assert!((g.power() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn gains_follow_distance_ratios() {
    // v_i / v_j = (d_j / d_i)^a
    let d = [1.0, 2.0, 4.0];
    let a = rolloff_exponent(6.0);
    let g = gains_from_distances(&d, a).gains.gains;
    assert!((g[0] / g[1] - 2f64.powf(a)).abs() < 1e-12);
    assert!((g[0] / g[2] - 4f64.powf(a)).abs() < 1e-12);
}

#[test]
fn approaches_one_hot_at_a_speaker() {
    let layout = LoudspeakerLayout::preset("quad").unwrap();
    let cfg = DbapConfig::new(layout.clone(), 6.0, 0.0).unwrap();
    for j in 0..layout.len() {
        let s = layout.speakers[j];
        let mut last = f64::INFINITY;
        for eps in [1e-2, 1e-4, 1e-6] {
            let g = dbap_gains(
                s + Position::new(eps, 0.0, 0.0) * 0.6 + Position::new(0.0, eps, 0.0) * 0.8,
                &cfg,
            );
            let others = (0..layout.len())
                .filter(|&i| i != j)
                .map(|i| g.gains.gains[i])
                .fold(0.0, f64::max);
            assert!(others < last);
            assert!(others < 2.0 * eps);
            last = others;
        }
        let exact = dbap_gains(s, &cfg);
        assert_eq!(exact.coincident_speaker, Some(j));
        assert_eq!(exact.gains.gains[j], 1.0);
    }
}

#[test]
fn blur_keeps_gains_finite_at_a_speaker() {
    let layout = LoudspeakerLayout::preset("quad").unwrap();
    let cfg = DbapConfig::new(layout.clone(), 6.0, 0.2).unwrap();
    let g = dbap_gains(layout.speakers[0], &cfg);
    assert!(g.coincident_speaker.is_none());
    assert!(g.gains.gains.iter().all(|&x| x > 0.0 && x < 1.0));
}

#[test]
fn planar_projection_matches_oracle() {
    let mut rng = oracles::rng(5);
    for _ in 0..2000 {
        let n = rng.gen_range(3..9);
        let layout = random_planar_layout(&mut rng, n);
        let pts: Vec<[f64; 3]> = layout.speakers.iter().map(|p| p.to_array()).collect();
        let cfg = DbapConfig::new(layout, 6.0, 0.0).unwrap();
        let src = Position::new(rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0), 0.0);
        let want = oracles::planar_hull_distance(&pts, src.to_array());
        let out = dbap_pan(src, &cfg);
        assert!(
            (out.exterior_distance - want).abs() < 1e-6,
            "{} vs {want}: {pts:?} {src:?}",
            out.exterior_distance
        );
        assert!((out.effective_position.distance_to(src) - want).abs() < 1e-6);
    }
}

#[test]
fn solid_projection_matches_oracle() {
    let mut rng = oracles::rng(6);
    for _ in 0..200 {
        let pts: Vec<[f64; 3]> = (0..rng.gen_range(4..9))
            .map(|_| {
                [
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                ]
            })
            .collect();
        let positions: Vec<Position> = pts.iter().map(|p| Position::new(p[0], p[1], p[2])).collect();
        let hull = ConvexHull::lenient(&positions, Dimensionality::Three).unwrap();
        if hull.rank() < 3 {
            continue;
        }
        let faces = oracles::supporting_triangles(&pts);
        for _ in 0..10 {
            let p = [
                rng.gen_range(-6.0..6.0),
                rng.gen_range(-6.0..6.0),
                rng.gen_range(-6.0..6.0),
            ];
            let want = oracles::solid_hull_distance(&pts, &faces, p);
            let (q, d) = hull.closest_point(Position::new(p[0], p[1], p[2]));
            assert!((d - want).abs() < 1e-6, "{d} vs {want}");
            assert!(hull.max_violation(q) < 1e-9);
        }
    }
}

#[test]
fn exterior_attenuation_is_optional() {
    let layout = LoudspeakerLayout::preset("quad").unwrap();
    let far = Position::new(10.0, 0.0, 0.0);
    let plain = dbap_pan(far, &DbapConfig::new(layout.clone(), 6.0, 0.0).unwrap());
    let att = dbap_pan(
        far,
        &DbapConfig::new(layout, 6.0, 0.0)
            .unwrap()
            .with_exterior_attenuation(true),
    );
    assert!((plain.gains.power() - 1.0).abs() < 1e-12);
    assert!(att.gains.power() < plain.gains.power());
    assert_eq!(plain.effective_position, att.effective_position);
}

#[test]
fn blur_makes_gains_lipschitz_through_a_speaker() {
    let layout = LoudspeakerLayout::preset("quad").unwrap();
    let s = layout.speakers[0];
    for r in [0.05, 0.2, 1.0] {
        let cfg = DbapConfig::new(layout.clone(), 6.0, r).unwrap();
        let step = 1e-4;
        let mut prev = dbap_gains(s + Position::new(-0.5, 0.0, 0.0), &cfg).gains.gains;
        for i in 1..=10000 {
            let p = s + Position::new(-0.5 + i as f64 * step, 0.0, 0.0);
            let g = dbap_gains(p, &cfg).gains.gains;
            let jump = g.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(jump < 10.0 * step / r, "r {r}: jump {jump}");
            prev = g;
        }
    }
}

#[test]
fn exterior_sources_with_one_projection_share_gains() {
    let layout = LoudspeakerLayout::preset("quad").unwrap();
    let cfg = DbapConfig::new(layout, 6.0, 0.1).unwrap();
    // the front edge of the quad is x = √2
    let edge = 2f64.sqrt();
    let mut rng = oracles::rng(11);
    for _ in 0..200 {
        let y = rng.gen_range(-1.0..1.0);
        let a = dbap_pan(Position::new(edge + rng.gen_range(0.1..5.0), y, 0.0), &cfg);
        let b = dbap_pan(Position::new(edge + rng.gen_range(0.1..5.0), y, 0.0), &cfg);
        assert!((a.effective_position.distance_to(b.effective_position)) < 1e-12);
        for (x, z) in a.gains.gains.iter().zip(&b.gains.gains) {
            assert!((x - z).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn intensity_is_conserved(
        r in 0.5f64..12.0,
        blur in 0.0f64..1.0,
        x in -6.0f64..6.0,
        y in -6.0f64..6.0,
        z in -2.0f64..2.0,
    ) {
        let layout = LoudspeakerLayout::preset("cube").unwrap();
        let cfg = DbapConfig::new(layout, r, blur).unwrap();
        let g = dbap_pan(Position::new(x, y, z), &cfg).gains;
        prop_assert!((g.power() - 1.0).abs() < 1e-9);
        prop_assert!(g.gains.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn nearer_speakers_are_louder(x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let layout = LoudspeakerLayout::preset("quad").unwrap();
        let cfg = DbapConfig::new(layout.clone(), 6.0, 0.0).unwrap();
        let src = Position::new(x, y, 0.0);
        let g = dbap_gains(src, &cfg).gains.gains;
        for i in 0..4 {
            for j in 0..4 {
                if layout.speakers[i].distance_to(src) < layout.speakers[j].distance_to(src) - 1e-9 {
                    prop_assert!(g[i] >= g[j]);
                }
            }
        }
    }
}
