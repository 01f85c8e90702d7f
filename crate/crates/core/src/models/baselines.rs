//! Single-channel baselines: spectral residual, phase-only Fourier,
//! Laplacian-plus-smoothing and the white-noise amplitude diagnostic.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Provenance, SaliencyMap};
use crate::error::Result;
use crate::plane::{filter3x3_replicate, gaussian_blur, resize_bilinear};
use crate::scale_space::LOG_EPSILON;
use crate::spectral::{dft2, dft2_in_place, to_complex, Direction, SPECTRAL_ZERO_RELATIVE};

/// Working side length of SR, PFT and the noise diagnostic.
pub const SPECTRAL_RESOLUTION: usize = 64;
/// Working side length of G&S.
pub const GS_RESOLUTION: usize = 128;

const LAPLACIAN: [[f64; 3]; 3] = [[0.0, -1.0, 0.0], [-1.0, 4.0, -1.0], [0.0, -1.0, 0.0]];

struct ComplexSpectrum {
    spectrum: Array2<Complex64>,
    log_amplitude: Array2<f64>,
    floor: f64,
}

fn analyze(gray: &Array2<f64>, side: usize) -> ComplexSpectrum {
    let resized = resize_bilinear(gray, side, side);
    let spectrum = dft2(&to_complex(&resized), Direction::Forward);
    let peak = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let log_amplitude = spectrum.mapv(|z| (z.norm() + LOG_EPSILON).ln());
    ComplexSpectrum {
        spectrum,
        log_amplitude,
        floor: peak * SPECTRAL_ZERO_RELATIVE,
    }
}

/// `|F⁻¹[exp(L′)·e^{iP}]|²` where `L′` replaces the log amplitude. Bins
/// that are numerically zero in the original spectrum stay zero.
fn reconstruct(s: &ComplexSpectrum, log_amplitude: &Array2<f64>) -> Array2<f64> {
    let mut freq = Array2::zeros(s.spectrum.dim());
    ndarray::Zip::from(&mut freq)
        .and(&s.spectrum)
        .and(log_amplitude)
        .for_each(|out, z, &l| {
            let n = z.norm();
            *out = if n > s.floor {
                z / n * l.exp()
            } else {
                Complex64::default()
            };
        });
    dft2_in_place(&mut freq, Direction::Inverse);
    freq.mapv(|z| z.norm_sqr())
}

fn finish(raw: Array2<f64>, model: &str, post_smoothing: f64) -> SaliencyMap {
    let sigma = post_smoothing * raw.ncols() as f64;
    SaliencyMap::new(
        gaussian_blur(&raw, sigma),
        Provenance {
            model: model.into(),
            scale: None,
            post_sigma: sigma,
        },
    )
}

/// Log-amplitude minus its 3×3 circular local average. Bins that are
/// numerically zero carry no information and are left out of their
/// neighbours' averages; otherwise `ln ε` would dominate every average
/// next to an exact spectral null.
fn spectral_residual(s: &ComplexSpectrum) -> Array2<f64> {
    let (h, w) = s.spectrum.dim();
    let valid = s.spectrum.mapv(|z| z.norm() > s.floor);
    Array2::from_shape_fn((h, w), |(r, c)| {
        let (mut sum, mut n) = (0.0, 0usize);
        for dr in [h - 1, 0, 1] {
            for dc in [w - 1, 0, 1] {
                let idx = ((r + dr) % h, (c + dc) % w);
                if valid[idx] {
                    sum += s.log_amplitude[idx];
                    n += 1;
                }
            }
        }
        if n == 0 {
            0.0
        } else {
            s.log_amplitude[[r, c]] - sum / n as f64
        }
    })
}

pub fn sr_raw(gray: &Array2<f64>) -> Result<Array2<f64>> {
    let s = analyze(gray, SPECTRAL_RESOLUTION);
    let residual = spectral_residual(&s);
    Ok(reconstruct(&s, &residual))
}

/// Spectral residual model at 64×64.
pub fn sr_saliency(gray: &Array2<f64>, post_smoothing: f64) -> Result<SaliencyMap> {
    Ok(finish(sr_raw(gray)?, "sr", post_smoothing))
}

pub fn pft_raw(gray: &Array2<f64>) -> Result<Array2<f64>> {
    let s = analyze(gray, SPECTRAL_RESOLUTION);
    let zero = Array2::zeros(s.spectrum.dim());
    Ok(reconstruct(&s, &zero))
}

/// Phase-only Fourier model at 64×64.
pub fn pft_saliency(gray: &Array2<f64>, post_smoothing: f64) -> Result<SaliencyMap> {
    Ok(finish(pft_raw(gray)?, "pft", post_smoothing))
}

pub fn gs_raw(gray: &Array2<f64>) -> Result<Array2<f64>> {
    let resized = resize_bilinear(gray, GS_RESOLUTION, GS_RESOLUTION);
    Ok(filter3x3_replicate(&resized, &LAPLACIAN).mapv(|g| g * g))
}

/// Laplacian response squared and smoothed, at 128×128.
pub fn gs_saliency(gray: &Array2<f64>, post_smoothing: f64) -> Result<SaliencyMap> {
    Ok(finish(gs_raw(gray)?, "gs", post_smoothing))
}

/// Uniform noise affinely mapped to the mean and maximum of `target`.
fn matched_noise(target: &Array2<f64>, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Array2<f64> = Array2::from_shape_simple_fn(target.dim(), || rng.random::<f64>());
    let n = target.len() as f64;
    let (t_mean, t_max) = (target.sum() / n, target.iter().cloned().fold(f64::MIN, f64::max));
    let (u_mean, u_max) = (noise.sum() / n, noise.iter().cloned().fold(f64::MIN, f64::max));
    let span = u_max - u_mean;
    if !(span > 0.0) {
        return Array2::from_elem(target.dim(), t_mean);
    }
    let gain = (t_max - t_mean) / span;
    noise.mapv(|u| t_mean + (u - u_mean) * gain)
}

pub fn noise_amplitude_raw(gray: &Array2<f64>, seed: u64) -> Result<Array2<f64>> {
    let s = analyze(gray, SPECTRAL_RESOLUTION);
    let residual = spectral_residual(&s);
    let noise = matched_noise(&residual, seed);
    Ok(reconstruct(&s, &noise))
}

/// Spectral residual replaced by white noise with the same mean and
/// maximum.
pub fn noise_amplitude_saliency(gray: &Array2<f64>, seed: u64, post_smoothing: f64) -> Result<SaliencyMap> {
    Ok(finish(
        noise_amplitude_raw(gray, seed)?,
        "noise-diagnostic",
        post_smoothing,
    ))
}
