//! Gaussian kernel family, circular convolution and the spectrum
//! scale-space.
//!
//! Kernels are sampled from `g(u,v;k) = 1/(√(2π)·σ_k) · exp(-(u²+v²)/(2σ_k²))`
//! with `σ_k = 2^{k-1}·t0`, truncated, then renormalized to unit sum.
//! Convolution wraps around because the unshifted DFT amplitude plane is
//! periodic.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{dft2_in_place, Direction};

/// Base scale of the kernel family.
pub const DEFAULT_T0: f64 = 0.5;

/// Offset added before taking the log of an amplitude plane.
pub const LOG_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    k: u32,
    t0: f64,
}

impl KernelSpec {
    pub fn new(k: u32, t0: f64) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter(format!("scale index k must be >= 1, got {k}")));
        }
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::InvalidParameter(format!("t0 must be positive, got {t0}")));
        }
        Ok(Self { k, t0 })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// `σ = 2^{k-1}·t0`.
    pub fn sigma(&self) -> f64 {
        2f64.powi(self.k as i32 - 1) * self.t0
    }

    /// Continuous kernel value at lattice offset `(u, v)`, before any
    /// discrete renormalization.
    pub fn continuous(&self, u: f64, v: f64) -> f64 {
        let sigma = self.sigma();
        (-(u * u + v * v) / (2.0 * sigma * sigma)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sigma)
    }

    /// Radius that keeps the kernel within a field of `len` samples along
    /// one axis: `min(⌈3σ⌉, ⌊(len-1)/2⌋)`.
    pub fn radius_for(&self, len: usize) -> usize {
        let full = (3.0 * self.sigma()).ceil() as usize;
        full.min(len.saturating_sub(1) / 2)
    }
}

/// Square kernel of side `2·radius + 1`, unit sum.
pub fn gaussian_kernel(spec: KernelSpec, truncation_radius: usize) -> Array2<f64> {
    rect_kernel(spec, truncation_radius, truncation_radius)
}

/// Kernel truncated per axis so that it fits a `dim` field.
pub fn kernel_for_field(spec: KernelSpec, dim: (usize, usize)) -> Array2<f64> {
    rect_kernel(spec, spec.radius_for(dim.0), spec.radius_for(dim.1))
}

fn rect_kernel(spec: KernelSpec, ry: usize, rx: usize) -> Array2<f64> {
    let mut kernel = Array2::from_shape_fn((2 * ry + 1, 2 * rx + 1), |(r, c)| {
        spec.continuous(r as f64 - ry as f64, c as f64 - rx as f64)
    });
    let sum = kernel.sum();
    kernel.mapv_inplace(|x| x / sum);
    kernel
}

/// Circular convolution of `field` with a centered, odd-sized `kernel`.
///
/// Evaluated through the DFT, which is exact for wrap-around convolution.
pub fn convolve2_circular(field: &Array2<f64>, kernel: &Array2<f64>) -> Result<Array2<f64>> {
    let (h, w) = field.dim();
    let (kh, kw) = kernel.dim();
    if kh > h || kw > w {
        return Err(Error::KernelTooLarge {
            kernel: (kh, kw),
            field: (h, w),
        });
    }
    let (cy, cx) = (kh / 2, kw / 2);
    let mut kspec = Array2::<Complex64>::zeros((h, w));
    for ((r, c), &v) in kernel.indexed_iter() {
        let rr = (r + h - cy) % h;
        let cc = (c + w - cx) % w;
        kspec[[rr, cc]] += Complex64::new(v, 0.0);
    }
    let mut fspec = field.mapv(|x| Complex64::new(x, 0.0));
    dft2_in_place(&mut fspec, Direction::Forward);
    dft2_in_place(&mut kspec, Direction::Forward);
    let scale = ((h * w) as f64).sqrt();
    fspec.zip_mut_with(&kspec, |a, b| *a = *a * *b * scale);
    dft2_in_place(&mut fspec, Direction::Inverse);
    Ok(fspec.mapv(|z| z.re))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothingDomain {
    Amplitude,
    #[default]
    LogAmplitude,
}

/// The family of smoothed amplitude spectra, one layer per scale index.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumScaleSpace {
    /// `layers[k-1]` is the layer for scale index `k`.
    pub layers: Vec<Array2<f64>>,
    pub domain: SmoothingDomain,
    pub kernels: Vec<KernelSpec>,
}

impl SpectrumScaleSpace {
    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Layer `k` (1-based) as a linear amplitude plane.
    pub fn amplitude_layer(&self, k: usize) -> Array2<f64> {
        let layer = &self.layers[k - 1];
        match self.domain {
            SmoothingDomain::Amplitude => layer.clone(),
            SmoothingDomain::LogAmplitude => layer.mapv(f64::exp),
        }
    }
}

/// `K = ⌈log2 min(H, W)⌉ + 1`.
pub fn scale_count(height: usize, width: usize) -> usize {
    let m = height.min(width).max(1);
    (m as f64).log2().ceil() as usize + 1
}

pub fn build_scale_space(amplitude: &Array2<f64>, domain: SmoothingDomain, t0: f64) -> Result<SpectrumScaleSpace> {
    if let Some(((r, c), &value)) = amplitude.indexed_iter().find(|(_, &v)| !(v >= 0.0)) {
        return Err(Error::NegativeAmplitude { value, at: (r, c) });
    }
    let (h, w) = amplitude.dim();
    let base = match domain {
        SmoothingDomain::Amplitude => amplitude.clone(),
        SmoothingDomain::LogAmplitude => amplitude.mapv(|a| (a + LOG_EPSILON).ln()),
    };
    let kernels = (1..=scale_count(h, w) as u32)
        .map(|k| KernelSpec::new(k, t0))
        .collect::<Result<Vec<_>>>()?;
    let layers = kernels
        .par_iter()
        .map(|spec| convolve2_circular(&base, &kernel_for_field(*spec, (h, w))))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumScaleSpace {
        layers,
        domain,
        kernels,
    })
}

/// Spike sharpness `‖X − X⋆h‖_∞`.
pub fn spectrum_sharpness(amplitude: &Array2<f64>, h_m: KernelSpec) -> Result<f64> {
    let smoothed = convolve2_circular(amplitude, &kernel_for_field(h_m, amplitude.dim()))?;
    Ok(amplitude
        .iter()
        .zip(smoothed.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::roll;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct wrap-around double sum.
    fn naive_circular(field: &Array2<f64>, kernel: &Array2<f64>) -> Array2<f64> {
        let (h, w) = field.dim();
        let (kh, kw) = kernel.dim();
        let (cy, cx) = ((kh / 2) as isize, (kw / 2) as isize);
        Array2::from_shape_fn((h, w), |(r, c)| {
            let mut acc = 0.0;
            for i in 0..kh {
                for j in 0..kw {
                    let rr = (r as isize - (i as isize - cy)).rem_euclid(h as isize) as usize;
                    let cc = (c as isize - (j as isize - cx)).rem_euclid(w as isize) as usize;
                    acc += kernel[[i, j]] * field[[rr, cc]];
                }
            }
            acc
        })
    }

    #[test]
    fn continuous_peak_value() {
        let spec = KernelSpec::new(1, 0.5).unwrap();
        let expected = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * 0.5);
        assert!((spec.continuous(0.0, 0.0) - expected).abs() < 1e-15);
        assert!((expected - 0.797_884_560_8).abs() < 1e-10);
    }

    #[test]
    fn kernels_sum_to_one_and_are_symmetric() {
        for k in 1..=8 {
            let spec = KernelSpec::new(k, DEFAULT_T0).unwrap();
            for radius in [1, 3, 10] {
                let g = gaussian_kernel(spec, radius);
                assert!((g.sum() - 1.0).abs() < 1e-12);
                let n = 2 * radius;
                assert_eq!(crate::plane::argmax(&g), (radius, radius));
                for r in 0..=n {
                    for c in 0..=n {
                        assert_eq!(g[[r, c]], g[[n - r, n - c]]);
                        assert_eq!(g[[r, c]], g[[c, r]]);
                    }
                }
            }
        }
    }

    #[test]
    fn sigma_doubles_with_k() {
        for k in 1..8 {
            let a = KernelSpec::new(k, DEFAULT_T0).unwrap();
            let b = KernelSpec::new(k + 1, DEFAULT_T0).unwrap();
            assert_eq!(b.sigma(), 2.0 * a.sigma());
            // g(x; k+1) = g(x/2; k) / 2
            for x in [0.0, 0.7, 3.0] {
                assert!((b.continuous(x, 0.0) - a.continuous(x / 2.0, 0.0) / 2.0).abs() < 1e-15);
            }
        }
        assert!(KernelSpec::new(0, 0.5).is_err());
        assert!(KernelSpec::new(1, 0.0).is_err());
    }

    #[test]
    fn convolution_fixed_point_and_impulse() {
        let g = gaussian_kernel(KernelSpec::new(2, DEFAULT_T0).unwrap(), 3);
        let flat = Array2::from_elem((10, 12), -1.25);
        let out = convolve2_circular(&flat, &g).unwrap();
        assert!(out.iter().all(|&v| (v + 1.25).abs() < 1e-12));

        let mut impulse = Array2::zeros((10, 12));
        impulse[[0, 0]] = 1.0;
        let out = convolve2_circular(&impulse, &g).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let r = (i + 10 - 3) % 10;
                let c = (j + 12 - 3) % 12;
                assert!((out[[r, c]] - g[[i, j]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let field = Array2::from_shape_fn((16, 16), |_| rng.random_range(-1.0..1.0));
        let kernel = Array2::from_shape_fn((5, 7), |_| rng.random_range(0.0..1.0));
        let fast = convolve2_circular(&field, &kernel).unwrap();
        let slow = naive_circular(&field, &kernel);
        let err = fast
            .iter()
            .zip(slow.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn convolution_commutes_with_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let field = Array2::from_shape_fn((9, 14), |_| rng.random_range(-1.0..1.0));
        let g = gaussian_kernel(KernelSpec::new(2, DEFAULT_T0).unwrap(), 3);
        let a = convolve2_circular(&roll(&field, 4, 9), &g).unwrap();
        let b = roll(&convolve2_circular(&field, &g).unwrap(), 4, 9);
        assert!(a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn rejects_large_kernel() {
        let g = gaussian_kernel(KernelSpec::new(3, DEFAULT_T0).unwrap(), 6);
        assert!(matches!(
            convolve2_circular(&Array2::zeros((8, 20)), &g),
            Err(Error::KernelTooLarge { .. })
        ));
    }

    #[test]
    fn scale_count_formula() {
        assert_eq!(scale_count(128, 128), 8);
        assert_eq!(scale_count(64, 200), 7);
        assert_eq!(scale_count(100, 120), 8);
        for n in 1..10 {
            assert_eq!(scale_count(1 << n, 1 << n), n + 1);
        }
    }

    #[test]
    fn constant_amplitude_layers_are_constant() {
        let amp = Array2::from_elem((32, 32), 3.0);
        for domain in [SmoothingDomain::Amplitude, SmoothingDomain::LogAmplitude] {
            let ss = build_scale_space(&amp, domain, DEFAULT_T0).unwrap();
            assert_eq!(ss.len(), 6);
            for k in 1..=ss.len() {
                assert!(ss.amplitude_layer(k).iter().all(|&v| (v - 3.0).abs() < 1e-9));
            }
        }
    }

    #[test]
    fn spike_peak_decays_with_scale() {
        let mut amp = Array2::from_elem((128, 128), 1.0);
        amp[[0, 0]] = 500.0;
        let ss = build_scale_space(&amp, SmoothingDomain::Amplitude, DEFAULT_T0).unwrap();
        assert_eq!(ss.len(), 8);
        let peaks: Vec<f64> = ss.layers.iter().map(|l| crate::plane::min_max(l).1).collect();
        for w in peaks.windows(2) {
            assert!(w[1] < w[0], "{peaks:?}");
        }
        // brute-force check of the first layer
        let g = kernel_for_field(ss.kernels[0], (128, 128));
        let direct = naive_circular(&amp, &g);
        let err = direct
            .iter()
            .zip(ss.layers[0].iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9);
    }

    #[test]
    fn rejects_negative_amplitude() {
        let mut amp = Array2::from_elem((8, 8), 1.0);
        amp[[2, 3]] = -0.1;
        assert!(matches!(
            build_scale_space(&amp, SmoothingDomain::Amplitude, DEFAULT_T0),
            Err(Error::NegativeAmplitude { at: (2, 3), .. })
        ));
    }

    #[test]
    fn sharpness_of_constant_is_zero() {
        let amp = Array2::from_elem((16, 16), 0.8);
        let g = spectrum_sharpness(&amp, KernelSpec::new(2, DEFAULT_T0).unwrap()).unwrap();
        assert!(g < 1e-12);
    }

    #[test]
    fn narrower_spike_is_sharper() {
        // same energy, narrower support
        let h = KernelSpec::new(2, DEFAULT_T0).unwrap();
        let mut wide = Array2::zeros((32, 32));
        for r in 14..18 {
            for c in 14..18 {
                wide[[r, c]] = 1.0;
            }
        }
        let mut narrow = Array2::zeros((32, 32));
        narrow[[16, 16]] = 4.0;
        assert!(spectrum_sharpness(&narrow, h).unwrap() > spectrum_sharpness(&wide, h).unwrap());
    }
}
