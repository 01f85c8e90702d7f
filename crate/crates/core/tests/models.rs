use hft_saliency::evaluation::{roc_auc, GroundTruth};
use hft_saliency::models::{
    hft_analyze, pqft_saliency, run_model, saliency_at_scale, ModelConfig, ModelKind, RunInputs,
};
use hft_saliency::patterns::natural_corpus;
use hft_saliency::plane::{argmax, pearson};
use hft_saliency::RgbImage;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_rgb(rng: &mut impl Rng, h: usize, w: usize, top: f64) -> RgbImage {
    let mut p = || Array2::from_shape_fn((h, w), |_| rng.random_range(0.0..top));
    RgbImage::new(p(), p(), p()).unwrap()
}

fn inputs(cfg: &ModelConfig) -> RunInputs<'_> {
    RunInputs { cfg, gt: None, seed: 0 }
}

#[test]
fn argmax_survives_intensity_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cfg = ModelConfig::default();
    for _ in 0..3 {
        // values stay below 0.5 so doubling never clips
        let img = random_rgb(&mut rng, 96, 80, 0.5);
        for kind in [ModelKind::Hft, ModelKind::Pqft, ModelKind::Pft] {
            let base = argmax(&run_model(kind, &img, inputs(&cfg)).unwrap().values);
            for c in [0.5, 2.0] {
                let scaled = run_model(kind, &img.scaled(c), inputs(&cfg)).unwrap();
                assert_eq!(argmax(&scaled.values), base, "{kind} at c = {c}");
            }
        }
    }
}

#[test]
fn flat_layer_equals_pqft() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = ModelConfig::default();
    for _ in 0..5 {
        let img = random_rgb(&mut rng, 100, 140, 1.0);
        let a = hft_analyze(&img, &cfg).unwrap();
        let flat = Array2::from_elem(a.spectrum.dim(), 3.7);
        let s = saliency_at_scale(&flat, &a.spectrum, &cfg).unwrap();
        let p = pqft_saliency(&img, &cfg).unwrap();
        // a constant amplitude c scales the map by c²
        let err = s
            .values
            .iter()
            .zip(p.values.iter())
            .map(|(x, y)| (x / (3.7 * 3.7) - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }
}

#[test]
fn extreme_images_give_finite_nonnegative_maps() {
    let cfg = ModelConfig::default();
    for gray in [0.0, 1.0] {
        let img = RgbImage::filled(70, 90, [gray; 3]);
        for kind in ModelKind::ALL {
            let gt = GroundTruth::region(Array2::from_shape_fn((70, 90), |(r, _)| r < 10)).unwrap();
            let map = run_model(
                kind,
                &img,
                RunInputs {
                    cfg: &cfg,
                    gt: Some(&gt),
                    seed: 3,
                },
            )
            .unwrap();
            assert!(
                map.values.iter().all(|v| v.is_finite() && *v >= 0.0),
                "{kind} on gray {gray}"
            );
        }
    }
}

#[test]
fn oracle_needs_ground_truth() {
    let img = RgbImage::filled(32, 32, [0.2, 0.4, 0.6]);
    assert!(run_model(ModelKind::HftStar, &img, inputs(&ModelConfig::default())).is_err());
}

#[test]
fn oracle_scale_is_at_least_as_good_as_full() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let cfg = ModelConfig::default();
    let img = random_rgb(&mut rng, 128, 128, 1.0);
    let gt = GroundTruth::region(Array2::from_shape_fn((128, 128), |(r, c)| {
        (40..70).contains(&r) && c < 50
    }))
    .unwrap();
    let run = |kind| {
        run_model(
            kind,
            &img,
            RunInputs {
                cfg: &cfg,
                gt: Some(&gt),
                seed: 0,
            },
        )
        .unwrap()
        .values
    };
    let star = roc_auc(&run(ModelKind::HftStar), &gt).unwrap().auc;
    for kind in [ModelKind::Hft, ModelKind::HftE] {
        assert!(star >= roc_auc(&run(kind), &gt).unwrap().auc - 1e-12);
    }
}

#[test]
fn noise_diagnostic_is_stable_across_seeds() {
    let cfg = ModelConfig::default();
    let corpus = natural_corpus();
    let corr: Vec<f64> = corpus
        .iter()
        .map(|img| {
            let a = run_model(
                ModelKind::NoiseDiagnostic,
                img,
                RunInputs {
                    cfg: &cfg,
                    gt: None,
                    seed: 1,
                },
            )
            .unwrap();
            let b = run_model(
                ModelKind::NoiseDiagnostic,
                img,
                RunInputs {
                    cfg: &cfg,
                    gt: None,
                    seed: 2,
                },
            )
            .unwrap();
            assert_ne!(a.values, b.values);
            pearson(&a.values, &b.values)
        })
        .collect();
    let mean = corr.iter().sum::<f64>() / corr.len() as f64;
    eprintln!(
        "seed-to-seed correlation: mean {mean:.4}, min {:.4}",
        corr.iter().cloned().fold(1.0, f64::min)
    );
    assert!(mean >= 0.9, "{mean}");
}
