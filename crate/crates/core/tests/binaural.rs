#![allow(clippy::needless_range_loop)]

mod oracles;

use proptest::prelude::*;
use rand::Rng;
use spatium_core::ambisonics::{
    build_decoder_with, encode_coefficients, AmbisonicFormat, AmbisonicStream, DecoderOptions,
};
use spatium_core::binaural::{
    binaural_decode_virtual_speakers, precompute_filter_matrix, solve_filter_least_squares, stereo_widen,
    synthesize_spherical_head_hrir, synthesize_spherical_head_set, virtual_speaker_hrirs, woodworth_itd, Convolver,
    FilterRenderer, Hrir, HrirSet, WidenerParams, DEFAULT_HEAD_RADIUS,
};
use spatium_core::{Direction, LoudspeakerLayout};

const SR: f64 = 48000.0;

fn noise_stream(seed: u64, format: AmbisonicFormat, len: usize) -> AmbisonicStream {
    let mut rng = oracles::rng(seed);
    let channels = (0..format.component_count())
        .map(|_| oracles::noise(&mut rng, len))
        .collect();
    AmbisonicStream::new(format, channels).unwrap()
}

#[test]
fn convolver_matches_direct_form_for_any_block_size() {
    let mut rng = oracles::rng(7);
    let x = oracles::noise(&mut rng, 1000);
    let h = oracles::noise(&mut rng, 37);
    let want = oracles::naive_convolve(&x, &h);
    for block in [1, 3, 36, 37, 64, 1000] {
        let mut c = Convolver::new(h.clone());
        let mut got = Vec::new();
        for chunk in x.chunks(block) {
            got.extend(c.process_vec(chunk));
        }
        got.extend(c.flush());
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn filter_matrix_equals_virtual_speaker_path() {
    let layout = LoudspeakerLayout::preset("octagon").unwrap();
    let decoder = build_decoder_with(&layout, AmbisonicFormat::FUMA, DecoderOptions::default()).unwrap();
    let set =
        synthesize_spherical_head_set(spatium_core::math::rad(45.0), &[0.0], DEFAULT_HEAD_RADIUS, SR, 64).unwrap();
    let hrirs = virtual_speaker_hrirs(&layout, &set);
    let stream = noise_stream(8, AmbisonicFormat::FUMA, 4800);
    let filters = precompute_filter_matrix(&decoder, &hrirs).unwrap();
    let reference = binaural_decode_virtual_speakers(&stream, &decoder, &hrirs, 4800).unwrap();
    for block in [1, 64, 100, 4800] {
        let a = binaural_decode_virtual_speakers(&stream, &decoder, &hrirs, block).unwrap();
        let b = FilterRenderer::new(filters.clone()).render(&stream, block).unwrap();
        for ear in 0..2 {
            assert_eq!(a[ear], reference[ear]);
            for (x, y) in a[ear].iter().zip(&b[ear]) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn block_sizes_agree_and_median_plane_is_symmetric() {
    let layout = LoudspeakerLayout::preset("octagon").unwrap();
    let decoder = build_decoder_with(&layout, AmbisonicFormat::FUMA, DecoderOptions::default()).unwrap();
    let set =
        synthesize_spherical_head_set(spatium_core::math::rad(45.0), &[0.0], DEFAULT_HEAD_RADIUS, SR, 64).unwrap();
    assert!(set.symmetric_head());
    let filters = precompute_filter_matrix(&decoder, &virtual_speaker_hrirs(&layout, &set)).unwrap();
    let mut rng = oracles::rng(12);
    let mono = oracles::noise(&mut rng, 8192);
    for az in [0.0, 180.0] {
        let stream =
            AmbisonicStream::encode_mono(AmbisonicFormat::FUMA, &mono, Direction::from_degrees(az, 0.0)).unwrap();
        let reference = FilterRenderer::new(filters.clone()).render(&stream, 4096).unwrap();
        for (l, r) in reference[0].iter().zip(&reference[1]) {
            assert!((l - r).abs() < 1e-9);
        }
        for block in [64, 256] {
            let out = FilterRenderer::new(filters.clone()).render(&stream, block).unwrap();
            for ear in 0..2 {
                for (x, y) in out[ear].iter().zip(&reference[ear]) {
                    assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn binaural_decode_is_shift_invariant() {
    let layout = LoudspeakerLayout::preset("octagon").unwrap();
    let decoder = build_decoder_with(&layout, AmbisonicFormat::FUMA, DecoderOptions::default()).unwrap();
    let set =
        synthesize_spherical_head_set(spatium_core::math::rad(45.0), &[0.0], DEFAULT_HEAD_RADIUS, SR, 32).unwrap();
    let hrirs = virtual_speaker_hrirs(&layout, &set);
    let stream = noise_stream(13, AmbisonicFormat::FUMA, 500);
    let shift = 37;
    let delayed = AmbisonicStream::new(
        AmbisonicFormat::FUMA,
        stream
            .channels
            .iter()
            .map(|c| std::iter::repeat_n(0.0, shift).chain(c.iter().copied()).collect())
            .collect(),
    )
    .unwrap();
    let a = binaural_decode_virtual_speakers(&stream, &decoder, &hrirs, 64).unwrap();
    let b = binaural_decode_virtual_speakers(&delayed, &decoder, &hrirs, 64).unwrap();
    for ear in 0..2 {
        assert!(b[ear][..shift].iter().all(|x| *x == 0.0));
        for i in 0..500 {
            assert!((a[ear][i] - b[ear][i + shift]).abs() < 1e-12);
        }
    }
}

#[test]
fn least_squares_recovers_known_filter() {
    let format = AmbisonicFormat::FUMA;
    let taps = 32;
    let mut rng = oracles::rng(9);
    let truth: Vec<Vec<Vec<f64>>> = (0..2)
        .map(|_| (0..4).map(|_| oracles::noise(&mut rng, taps)).collect())
        .collect();
    let dirs: Vec<Direction> = (0..8)
        .map(|i| Direction::from_degrees(45.0 * i as f64, if i % 2 == 0 { 35.0 } else { -35.0 }))
        .collect();
    let hrirs: Vec<Hrir> = dirs
        .iter()
        .map(|&d| {
            let c = encode_coefficients(format, d).unwrap();
            let ear = |e: usize| (0..taps).map(|t| (0..4).map(|k| truth[e][k][t] * c[k]).sum()).collect();
            Hrir::new(ear(0), ear(1), d).unwrap()
        })
        .collect();
    let f = solve_filter_least_squares(&dirs, &hrirs, format, false).unwrap();
    for e in 0..2 {
        for k in 0..4 {
            for t in 0..taps {
                assert!((f.response(e, k)[t] - truth[e][k][t]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn spherical_head_itd_and_symmetry() {
    assert_eq!(woodworth_itd(0.0, DEFAULT_HEAD_RADIUS), 0.0);
    let side = woodworth_itd(std::f64::consts::FRAC_PI_2, DEFAULT_HEAD_RADIUS);
    assert!((side - DEFAULT_HEAD_RADIUS / 343.0 * (std::f64::consts::FRAC_PI_2 + 1.0)).abs() < 1e-15);
    let left = synthesize_spherical_head_hrir(Direction::from_degrees(60.0, 0.0), DEFAULT_HEAD_RADIUS, SR, 64);
    let right = synthesize_spherical_head_hrir(Direction::from_degrees(-60.0, 0.0), DEFAULT_HEAD_RADIUS, SR, 64);
    assert_eq!(left.left, right.right);
    assert_eq!(left.right, right.left);
    // the near ear leads
    let onset = |h: &[f64]| h.iter().position(|x| x.abs() > 1e-3).unwrap();
    assert!(onset(&left.left) < onset(&left.right));
    let front = synthesize_spherical_head_hrir(Direction::default(), DEFAULT_HEAD_RADIUS, SR, 64);
    assert_eq!(front.left, front.right);
}

#[test]
fn symmetric_set_requires_mirrors() {
    let d = Direction::from_degrees(30.0, 0.0);
    let h = synthesize_spherical_head_hrir(d, DEFAULT_HEAD_RADIUS, SR, 16);
    assert!(HrirSet::new(vec![h.clone()], true).is_err());
    assert!(HrirSet::new(vec![h.clone()], false).is_ok());
    assert!(HrirSet::new(vec![h.clone(), h.mirrored()], true).is_ok());
    assert!(HrirSet::new(vec![h.clone(), h], false).is_err());
}

#[test]
fn widener_identity_is_bit_exact() {
    let mut rng = oracles::rng(10);
    let l = oracles::noise(&mut rng, 5000);
    let r = oracles::noise(&mut rng, 5000);
    let (a, b) = stereo_widen(&l, &r, WidenerParams::IDENTITY, SR).unwrap();
    assert_eq!(a, l);
    assert_eq!(b, r);
}

#[test]
fn widener_side_gain_scales_anti_phase() {
    let l: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.01).sin()).collect();
    let r: Vec<f64> = l.iter().map(|x| -x).collect();
    let p = WidenerParams {
        side_gain: 2.0,
        ..WidenerParams::IDENTITY
    };
    let (a, b) = stereo_widen(&l, &r, p, SR).unwrap();
    for i in 0..1000 {
        assert!((a[i] - 2.0 * l[i]).abs() < 1e-12);
        assert!((b[i] - 2.0 * r[i]).abs() < 1e-12);
    }
    // a mono signal has no side component
    let (a, b) = stereo_widen(&l, &l, p, SR).unwrap();
    assert_eq!(a, l);
    assert_eq!(b, l);
}

#[test]
fn widener_rejects_bad_parameters() {
    let l = [0.0; 4];
    let bad = WidenerParams {
        crossfeed_cutoff: -5.0,
        ..WidenerParams::default()
    };
    assert!(stereo_widen(&l, &l, bad, SR).is_err());
    let bad = WidenerParams {
        reflection_delay: -1.0,
        ..WidenerParams::default()
    };
    assert!(stereo_widen(&l, &l, bad, SR).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_is_linear(seed in 0u64..1000, a in -3.0f64..3.0, block in 1usize..50) {
        let mut rng = oracles::rng(seed);
        let taps = rng.gen_range(1..20);
        let h = oracles::noise(&mut rng, taps);
        let x = oracles::noise(&mut rng, 200);
        let y = oracles::noise(&mut rng, 200);
        let run = |s: &[f64]| {
            let mut c = Convolver::new(h.clone());
            s.chunks(block).flat_map(|b| c.process_vec(b)).collect::<Vec<f64>>()
        };
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
        let (rx, ry, rm) = (run(&x), run(&y), run(&mix));
        for i in 0..200 {
            prop_assert!((rm[i] - (a * rx[i] + ry[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn lateral_hrirs_mirror(az in -179.0f64..179.0, el in -80.0f64..80.0) {
        let a = synthesize_spherical_head_hrir(Direction::from_degrees(az, el), DEFAULT_HEAD_RADIUS, SR, 32);
        let b = synthesize_spherical_head_hrir(Direction::from_degrees(-az, el), DEFAULT_HEAD_RADIUS, SR, 32);
        for t in 0..32 {
            prop_assert!((a.left[t] - b.right[t]).abs() < 1e-12);
            prop_assert!((a.right[t] - b.left[t]).abs() < 1e-12);
        }
    }
}
