#![allow(clippy::needless_range_loop)]

mod oracles;

use proptest::prelude::*;
use spatium_core::ambisonics::DecoderFlavour;
use spatium_core::binaural::synthesize_spherical_head_set;
use spatium_core::math::rad;
use spatium_core::panning::Normalization;
use spatium_core::render::{render, RenderError, Renderer};
use spatium_core::scene::{
    validate_scene, Algorithm, Interpolation, Keyframe, Location, Scene, Source, SourceSignal, YawKey,
};
use spatium_core::vbap::vbap_pan;
use spatium_core::{Dimensionality, Direction, LoudspeakerLayout, Position};

fn vbap_octagon() -> Scene {
    Scene::new(
        48000,
        0.25,
        Algorithm::Vbap {
            dimensionality: Dimensionality::Two,
            power: 1.0,
        },
        LoudspeakerLayout::preset("octagon").unwrap(),
    )
}

fn moving(name: &str, signal: SourceSignal, from: f64, to: f64, duration: f64) -> Source {
    Source {
        name: name.into(),
        signal,
        keyframes: vec![
            Keyframe {
                time: 0.0,
                location: Location::Direction(Direction::from_degrees(from, 0.0)),
                gain: 1.0,
            },
            Keyframe {
                time: duration,
                location: Location::Direction(Direction::from_degrees(to, 0.0)),
                gain: 0.5,
            },
        ],
        interpolation: Interpolation::Linear,
    }
}

fn all_algorithms() -> Vec<(Algorithm, LoudspeakerLayout)> {
    vec![
        (
            Algorithm::StereoTangent {
                normalization: Normalization::UnitPower,
            },
            LoudspeakerLayout::preset("stereo").unwrap(),
        ),
        (
            Algorithm::StereoDelay { max_delay: 0.002 },
            LoudspeakerLayout::preset("stereo").unwrap(),
        ),
        (Algorithm::RingPairwise, LoudspeakerLayout::preset("hexagon").unwrap()),
        (
            Algorithm::Ambisonics {
                horizontal_order: 2,
                periphonic_order: 0,
                flavour: DecoderFlavour::Projection,
                delay_compensation: false,
            },
            LoudspeakerLayout::preset("octagon").unwrap(),
        ),
        (
            Algorithm::Vbap {
                dimensionality: Dimensionality::Three,
                power: 1.0,
            },
            LoudspeakerLayout::preset("cube").unwrap(),
        ),
        (
            Algorithm::Dbap {
                rolloff_db: 6.0,
                blur: 0.1,
                exterior_attenuation: true,
            },
            LoudspeakerLayout::preset("5.0").unwrap(),
        ),
    ]
}

#[test]
fn mixing_is_linear_for_every_algorithm() {
    for (algorithm, layout) in all_algorithms() {
        let mut scene = Scene::new(48000, 0.1, algorithm.clone(), layout);
        let a = moving("a", SourceSignal::Noise { seed: 1 }, -20.0, 25.0, 0.1);
        let b = moving("b", SourceSignal::Sine { frequency: 440.0 }, 10.0, -5.0, 0.1);
        scene.sources = vec![a.clone()];
        let ra = render(&scene).unwrap();
        scene.sources = vec![b.clone()];
        let rb = render(&scene).unwrap();
        scene.sources = vec![a, b];
        let both = render(&scene).unwrap();
        for ch in 0..both.len() {
            for i in 0..both[ch].len() {
                assert!(
                    (both[ch][i] - ra[ch][i] - rb[ch][i]).abs() < 1e-12,
                    "{}",
                    algorithm.name()
                );
            }
        }
    }
}

#[test]
fn moving_source_gains_follow_block_centres() {
    let mut scene = vbap_octagon();
    scene.block_size = 128;
    scene.sources = vec![moving("dc", SourceSignal::Samples(vec![1.0; 12000]), 0.0, 90.0, 0.25)];
    let out = render(&scene).unwrap();
    let layout = scene.layout.clone();
    let n = scene.block_size;
    for b in 0..(12000 / n) {
        let t = (b * n) as f64 / 48000.0 + n as f64 / 2.0 / 48000.0;
        let (loc, gain) = scene.sources[0].state_at(t);
        let want = vbap_pan(&layout, Dimensionality::Two, loc.direction(), 1.0).unwrap();
        let last = (b + 1) * n - 1;
        for ch in 0..8 {
            assert!(
                (out[ch][last] - gain * want.gains[ch]).abs() < 1e-12,
                "block {b}, channel {ch}"
            );
        }
    }
}

#[test]
fn block_rendering_stays_within_crossfade_bound() {
    let mut scene = vbap_octagon();
    scene.sources = vec![moving(
        "dc",
        SourceSignal::Samples(vec![1.0; 12000]),
        -170.0,
        170.0,
        0.25,
    )];
    scene.precise = true;
    let exact = render(&scene).unwrap();
    // largest per-sample change of any channel gain
    let slope = exact
        .iter()
        .flat_map(|ch| ch.windows(2).map(|w| (w[1] - w[0]).abs()))
        .fold(0.0, f64::max);
    scene.precise = false;
    let mut outputs = Vec::new();
    for n in [256, 128] {
        scene.block_size = n;
        let out = render(&scene).unwrap();
        // the crossfade trails the trajectory by about half a block
        for (a, b) in out.iter().zip(&exact) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() <= n as f64 * slope, "block {n}");
            }
        }
        outputs.push(out);
    }
    for (a, b) in outputs[0].iter().zip(&outputs[1]) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= 2.0 * 256.0 * slope);
        }
    }
}

#[test]
fn output_is_deterministic_and_bounded() {
    for (algorithm, layout) in all_algorithms() {
        let mut scene = Scene::new(48000, 0.05, algorithm.clone(), layout);
        scene.sources = vec![
            moving("a", SourceSignal::Noise { seed: 21 }, -25.0, 25.0, 0.05),
            moving("b", SourceSignal::Sine { frequency: 100.0 }, 20.0, -20.0, 0.05),
        ];
        let a = render(&scene).unwrap();
        assert_eq!(a, render(&scene).unwrap());
        if !matches!(algorithm, spatium_core::scene::Algorithm::Ambisonics { .. }) {
            let peak = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(peak <= 2.0, "{} peak {peak}", algorithm.name());
        }
    }
}

#[test]
fn precise_mode_evaluates_every_sample() {
    let mut scene = vbap_octagon();
    scene.precise = true;
    scene.sources = vec![moving("dc", SourceSignal::Samples(vec![1.0; 12000]), 0.0, 90.0, 0.25)];
    let out = render(&scene).unwrap();
    for i in (0..12000).step_by(997) {
        let (loc, gain) = scene.sources[0].state_at(i as f64 / 48000.0);
        let want = vbap_pan(&scene.layout, Dimensionality::Two, loc.direction(), 1.0).unwrap();
        for ch in 0..8 {
            assert!((out[ch][i] - gain * want.gains[ch]).abs() < 1e-12);
        }
    }
}

#[test]
fn static_scene_is_block_size_invariant() {
    for (algorithm, layout) in all_algorithms() {
        let mut scene = Scene::new(48000, 0.05, algorithm, layout);
        scene.sources = vec![Source::fixed(
            "s",
            SourceSignal::Noise { seed: 3 },
            Location::Direction(Direction::from_degrees(12.0, 0.0)),
            0.8,
        )];
        scene.block_size = 2400;
        let reference = render(&scene).unwrap();
        for block in [1, 64, 1000] {
            scene.block_size = block;
            let out = render(&scene).unwrap();
            for (a, b) in out.iter().zip(&reference) {
                for (x, y) in a.iter().zip(b) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn head_yaw_counter_rotates_the_scene() {
    let source = |az: f64| {
        vec![Source::fixed(
            "s",
            SourceSignal::Noise { seed: 4 },
            Location::Direction(Direction::from_degrees(az, 0.0)),
            1.0,
        )]
    };
    let mut scene = vbap_octagon();
    scene.duration = 0.02;
    scene.binaural = Some(synthesize_spherical_head_set(rad(45.0), &[0.0], 0.0875, 48000.0, 64).unwrap());
    scene.sources = source(45.0);
    scene.head_yaw = Some(vec![YawKey {
        time: 0.0,
        yaw: rad(45.0),
    }]);
    let turned = render(&scene).unwrap();
    scene.sources = source(0.0);
    scene.head_yaw = None;
    let ahead = render(&scene).unwrap();
    for (a, b) in turned.iter().zip(&ahead) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn binaural_output_has_two_channels() {
    let mut scene = Scene::new(
        48000,
        0.05,
        Algorithm::Ambisonics {
            horizontal_order: 1,
            periphonic_order: 0,
            flavour: DecoderFlavour::Projection,
            delay_compensation: false,
        },
        LoudspeakerLayout::preset("octagon").unwrap(),
    );
    scene.binaural = Some(synthesize_spherical_head_set(rad(45.0), &[0.0], 0.0875, 48000.0, 64).unwrap());
    scene.sources = vec![Source::fixed(
        "left",
        SourceSignal::Noise { seed: 9 },
        Location::Direction(Direction::from_degrees(90.0, 0.0)),
        1.0,
    )];
    let out = render(&scene).unwrap();
    assert_eq!(out.len(), 2);
    let e = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    assert!(e(&out[0]) > e(&out[1]));
}

#[test]
fn coverage_failure_names_source_and_time() {
    let dome = LoudspeakerLayout::from_degrees(
        "dome",
        spatium_core::LayoutCategory::Irregular,
        &[(0.0, 0.0, 1.0), (120.0, 0.0, 1.0), (-120.0, 0.0, 1.0), (0.0, 90.0, 1.0)],
    );
    let mut scene = Scene::new(
        48000,
        0.1,
        Algorithm::Vbap {
            dimensionality: Dimensionality::Three,
            power: 1.0,
        },
        dome,
    );
    scene.sources = vec![Source::fixed(
        "low",
        SourceSignal::Impulse,
        Location::Direction(Direction::from_degrees(0.0, -45.0)),
        1.0,
    )];
    match render(&scene) {
        Err(RenderError::Coverage { source_name, .. }) => assert_eq!(source_name, "low"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn validation_collects_every_issue() {
    let mut scene = vbap_octagon();
    scene.sample_rate = 12345;
    scene.duration = -1.0;
    scene.block_size = 0;
    scene.sources = vec![Source {
        name: "bad".into(),
        signal: SourceSignal::Impulse,
        keyframes: vec![],
        interpolation: Interpolation::Linear,
    }];
    let report = validate_scene(&scene);
    assert!(report.issues.len() >= 4, "{report}");
    assert!(matches!(Renderer::new(scene), Err(RenderError::Invalid(_))));
}

#[test]
fn dbap_positions_render() {
    let mut scene = Scene::new(
        48000,
        0.01,
        Algorithm::Dbap {
            rolloff_db: 6.0,
            blur: 0.0,
            exterior_attenuation: false,
        },
        LoudspeakerLayout::preset("quad").unwrap(),
    );
    let s0 = scene.layout.speakers[0];
    scene.sources = vec![Source::fixed("at", SourceSignal::Impulse, Location::Position(s0), 1.0)];
    let out = render(&scene).unwrap();
    assert_eq!(out[0][0], 1.0);
    let _ = Position::ZERO;
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn streaming_matches_one_shot(block in 1usize..700, seed in 0u64..100) {
        let mut scene = vbap_octagon();
        scene.duration = 0.03;
        scene.sources = vec![moving("m", SourceSignal::Noise { seed }, -100.0, 100.0, 0.03)];
        scene.block_size = block;
        let whole = render(&scene).unwrap();
        let mut r = Renderer::new(scene).unwrap();
        let mut streamed = vec![Vec::new(); 8];
        while let Some(b) = r.next_block().unwrap() {
            for (s, c) in streamed.iter_mut().zip(b) {
                s.extend(c);
            }
        }
        prop_assert_eq!(streamed, whole);
    }
}
