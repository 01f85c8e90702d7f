use std::f64::consts::PI;

use hft_saliency::quaternion::{qmul, PureUnitAxis, Quaternion, QuaternionImage};
use hft_saliency::spectral::{hft_forward, hft_inverse, polar_compose, polar_decompose};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_qimage(rng: &mut impl Rng, h: usize, w: usize) -> QuaternionImage {
    QuaternionImage::from_fn(h, w, |_, _| {
        Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
    })
}

/// Left-sided double sum, straight from the definition.
fn brute_force_hft(img: &QuaternionImage, axis: PureUnitAxis) -> QuaternionImage {
    let (h, w) = img.dim();
    let scale = 1.0 / ((h * w) as f64).sqrt();
    QuaternionImage::from_fn(h, w, |u, v| {
        let mut acc = Quaternion::default();
        for r in 0..h {
            for c in 0..w {
                let theta = -2.0 * PI * ((r * u) as f64 / h as f64 + (c * v) as f64 / w as f64);
                acc = acc + qmul(Quaternion::exp_axis(axis, theta), img.get(r, c));
            }
        }
        acc.scale(scale)
    })
}

fn energy(img: &QuaternionImage) -> f64 {
    img.norm_sqr().sum()
}

fn axes() -> Vec<PureUnitAxis> {
    vec![
        PureUnitAxis::luminance(),
        PureUnitAxis::new(1.0, 0.0, 0.0).unwrap(),
        PureUnitAxis::from_direction(0.3, -0.8, 0.5).unwrap(),
    ]
}

#[test]
fn forward_matches_double_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for axis in axes() {
        for &(h, w) in &[(8, 8), (5, 7), (6, 4)] {
            let img = random_qimage(&mut rng, h, w);
            let fast = hft_forward(&img, axis).unwrap();
            let slow = brute_force_hft(&img, axis);
            assert!(fast.max_abs_diff(&slow) < 1e-9, "{h}x{w}: {}", fast.max_abs_diff(&slow));
        }
    }
}

#[test]
fn roundtrip_and_parseval() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let axis = PureUnitAxis::luminance();
    for _ in 0..20 {
        let img = random_qimage(&mut rng, 32, 24);
        let spec = hft_forward(&img, axis).unwrap();
        assert!(hft_inverse(&spec, axis).unwrap().max_abs_diff(&img) < 1e-9);
        let (a, b) = (energy(&img), energy(&spec));
        assert!((a - b).abs() / a < 1e-9);
    }
}

#[test]
fn transform_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let axis = PureUnitAxis::luminance();
    let (x, y) = (random_qimage(&mut rng, 8, 8), random_qimage(&mut rng, 8, 8));
    let sum = QuaternionImage::from_fn(8, 8, |r, c| x.get(r, c).scale(2.0) + y.get(r, c));
    let fx = hft_forward(&x, axis).unwrap();
    let fy = hft_forward(&y, axis).unwrap();
    let expected = QuaternionImage::from_fn(8, 8, |r, c| fx.get(r, c).scale(2.0) + fy.get(r, c));
    assert!(hft_forward(&sum, axis).unwrap().max_abs_diff(&expected) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn polar_form_roundtrips(seed in any::<u64>(), h in 2usize..12, w in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let img = random_qimage(&mut rng, h, w);
        let axis = PureUnitAxis::luminance();
        let spec = hft_forward(&img, axis).unwrap();
        let polar = polar_decompose(&spec, axis);
        prop_assert!(polar.amplitude.iter().all(|a| *a >= 0.0));
        prop_assert!(polar.phase.iter().all(|p| (0.0..=PI).contains(p)));
        prop_assert!(polar_compose(&polar).unwrap().max_abs_diff(&spec) < 1e-9);
    }

    #[test]
    fn inverse_undoes_forward(seed in any::<u64>(), h in 1usize..10, w in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let img = random_qimage(&mut rng, h, w);
        let axis = PureUnitAxis::from_direction(rng.random_range(-1.0..1.0), 0.5, rng.random_range(-1.0..1.0)).unwrap();
        let back = hft_inverse(&hft_forward(&img, axis).unwrap(), axis).unwrap();
        prop_assert!(back.max_abs_diff(&img) < 1e-9);
    }
}
