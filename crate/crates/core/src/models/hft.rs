use ndarray::Array2;
use rayon::prelude::*;

use super::{ModelConfig, Provenance, SaliencyMap};
use crate::error::Result;
use crate::evaluation::GroundTruth;
use crate::image::{rgb_to_features, FeatureMaps, RgbImage};
use crate::plane::gaussian_blur;
use crate::quaternion::{PureUnitAxis, QuaternionImage};
use crate::scale_space::{build_scale_space, SpectrumScaleSpace};
use crate::selection::{select_scale, CriterionRow};
use crate::spectral::{
    compose_with_amplitude, hft_forward, hft_inverse, mask_spectral_zeros, polar_decompose, Spectrum,
    SPECTRAL_ZERO_RELATIVE,
};

/// `f = w1·0 + w2·I·i + w3·RG·j + w4·BY·k`; the scalar (motion) channel is
/// always empty for still images.
pub fn build_hypercomplex(features: &FeatureMaps, cfg: &ModelConfig) -> QuaternionImage {
    let [_, w2, w3, w4] = cfg.weights;
    QuaternionImage {
        a: Array2::zeros(features.intensity.dim()),
        b: &features.intensity * w2,
        c: &features.red_green * w3,
        d: &features.blue_yellow * w4,
    }
}

/// Intermediate products of the hypercomplex pipeline up to the
/// scale-space.
#[derive(Debug, Clone)]
pub struct HftAnalysis {
    pub input: QuaternionImage,
    pub spectrum: Spectrum,
    pub scale_space: SpectrumScaleSpace,
}

/// Resize, features, quaternion image, transform, polar form and
/// scale-space.
pub fn hft_analyze(img: &RgbImage, cfg: &ModelConfig) -> Result<HftAnalysis> {
    cfg.validate()?;
    let (h, w) = cfg.resolution;
    let resized = img.resize(h, w);
    let input = build_hypercomplex(&rgb_to_features(&resized), cfg);
    let freq = hft_forward(&input, cfg.axis)?;
    let spectrum = polar_decompose(&freq, cfg.axis);
    let scale_space = build_scale_space(&spectrum.amplitude, cfg.domain, cfg.t0)?;
    Ok(HftAnalysis {
        input,
        spectrum,
        scale_space,
    })
}

/// `‖F_H⁻¹{Λ·e^{X·P}}‖²` for a linear amplitude plane `Λ`, before
/// post-smoothing. Bins where the original spectrum vanishes have no phase
/// and contribute nothing.
pub fn reconstruct_at_scale(amplitude: &Array2<f64>, spectrum: &Spectrum, axis: PureUnitAxis) -> Result<Array2<f64>> {
    let amplitude = mask_spectral_zeros(amplitude, &spectrum.amplitude);
    let freq = compose_with_amplitude(spectrum, &amplitude)?;
    Ok(hft_inverse(&freq, axis)?.norm_sqr())
}

/// Post-smoothed per-scale map for a linear amplitude layer.
pub fn saliency_at_scale(amplitude: &Array2<f64>, spectrum: &Spectrum, cfg: &ModelConfig) -> Result<SaliencyMap> {
    let raw = reconstruct_at_scale(amplitude, spectrum, cfg.axis)?;
    let sigma = cfg.post_sigma(raw.ncols());
    Ok(SaliencyMap::new(
        gaussian_blur(&raw, sigma),
        Provenance {
            model: "hft".into(),
            scale: None,
            post_sigma: sigma,
        },
    ))
}

#[derive(Debug, Clone)]
pub struct HftResult {
    /// Map at the selected scale.
    pub map: SaliencyMap,
    /// Selected scale index, 1-based.
    pub k: usize,
    /// Post-smoothed candidates, one per scale.
    pub maps: Vec<SaliencyMap>,
    /// Candidates before post-smoothing.
    pub raw_maps: Vec<Array2<f64>>,
    pub trace: Vec<CriterionRow>,
}

pub fn hft_saliency(img: &RgbImage, cfg: &ModelConfig) -> Result<HftResult> {
    hft_saliency_with_gt(img, cfg, None)
}

/// Full pipeline; `gt` is only consulted by the oracle selection mode.
pub fn hft_saliency_with_gt(img: &RgbImage, cfg: &ModelConfig, gt: Option<&GroundTruth>) -> Result<HftResult> {
    let analysis = hft_analyze(img, cfg)?;
    let spectrum = &analysis.spectrum;
    let ss = &analysis.scale_space;
    let raw_maps = (1..=ss.len())
        .into_par_iter()
        .map(|k| reconstruct_at_scale(&ss.amplitude_layer(k), spectrum, cfg.axis))
        .collect::<Result<Vec<_>>>()?;
    let sigma = cfg.post_sigma(cfg.resolution.1);
    let maps: Vec<SaliencyMap> = raw_maps
        .par_iter()
        .enumerate()
        .map(|(i, raw)| {
            SaliencyMap::new(
                gaussian_blur(raw, sigma),
                Provenance {
                    model: "hft".into(),
                    scale: Some(i + 1),
                    post_sigma: sigma,
                },
            )
        })
        .collect();
    let values: Vec<Array2<f64>> = maps.iter().map(|m| m.values.clone()).collect();
    let outcome = select_scale(&values, &cfg.criterion(), gt)?;
    Ok(HftResult {
        map: maps[outcome.k - 1].clone(),
        k: outcome.k,
        maps,
        raw_maps,
        trace: outcome.trace,
    })
}

/// Phase-only quaternion reconstruction before post-smoothing: every
/// spectral bin is replaced by its unit-modulus version `F/‖F‖`; numerical
/// zeros stay zero.
pub fn pqft_raw(img: &RgbImage, cfg: &ModelConfig) -> Result<Array2<f64>> {
    cfg.validate()?;
    let (h, w) = cfg.resolution;
    let input = build_hypercomplex(&rgb_to_features(&img.resize(h, w)), cfg);
    let mut freq = hft_forward(&input, cfg.axis)?;
    let peak = freq.iter().map(|q| q.norm()).fold(0.0, f64::max);
    let floor = peak * SPECTRAL_ZERO_RELATIVE;
    for r in 0..h {
        for c in 0..w {
            let q = freq.get(r, c);
            let n = q.norm();
            let unit = if n > floor {
                q.scale(1.0 / n)
            } else {
                Default::default()
            };
            freq.set(r, c, unit);
        }
    }
    Ok(hft_inverse(&freq, cfg.axis)?.norm_sqr())
}

pub fn pqft_saliency(img: &RgbImage, cfg: &ModelConfig) -> Result<SaliencyMap> {
    let raw = pqft_raw(img, cfg)?;
    let sigma = cfg.post_sigma(raw.ncols());
    Ok(SaliencyMap::new(
        gaussian_blur(&raw, sigma),
        Provenance {
            model: "pqft".into(),
            scale: None,
            post_sigma: sigma,
        },
    ))
}
