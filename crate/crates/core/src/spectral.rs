//! Unitary 2-D DFT, the hypercomplex Fourier transform and its polar form.

use std::cell::RefCell;
use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::quaternion::{symplectic_merge, symplectic_split, PureUnitAxis, QuaternionImage, SymplecticPair};

/// Below this modulus the vector part of a spectral bin is treated as zero.
pub const DEGENERATE_VECTOR_NORM: f64 = 1e-12;

/// Bins whose modulus is below this fraction of the spectrum's peak carry
/// rounding noise only; their phase is meaningless.
pub const SPECTRAL_ZERO_RELATIVE: f64 = 1e-12;

/// Tolerance for the eigenaxis unit-norm check in [`polar_compose`].
const EIGENAXIS_TOLERANCE: f64 = 1e-6;

pub type ComplexImage = Array2<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl From<Direction> for FftDirection {
    fn from(d: Direction) -> Self {
        match d {
            Direction::Forward => FftDirection::Forward,
            Direction::Inverse => FftDirection::Inverse,
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// 2-D DFT with `1/√(MN)` scaling in both directions.
///
/// Any size is accepted; rustfft picks mixed-radix, Rader or Bluestein
/// algorithms as needed.
pub fn dft2(img: &ComplexImage, direction: Direction) -> ComplexImage {
    let mut out = img.to_owned();
    dft2_in_place(&mut out, direction);
    out
}

pub fn dft2_in_place(img: &mut ComplexImage, direction: Direction) {
    let (h, w) = img.dim();
    if h == 0 || w == 0 {
        return;
    }
    let dir: FftDirection = direction.into();
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let row_fft = planner.plan_fft(w, dir);
        let col_fft = planner.plan_fft(h, dir);

        let mut scratch =
            vec![Complex64::default(); row_fft.get_inplace_scratch_len().max(col_fft.get_inplace_scratch_len())];
        let mut line = vec![Complex64::default(); w.max(h)];

        for mut row in img.axis_iter_mut(Axis(0)) {
            let buf = &mut line[..w];
            for (dst, src) in buf.iter_mut().zip(row.iter()) {
                *dst = *src;
            }
            row_fft.process_with_scratch(buf, &mut scratch);
            for (dst, src) in row.iter_mut().zip(buf.iter()) {
                *dst = *src;
            }
        }
        for mut col in img.axis_iter_mut(Axis(1)) {
            let buf = &mut line[..h];
            for (dst, src) in buf.iter_mut().zip(col.iter()) {
                *dst = *src;
            }
            col_fft.process_with_scratch(buf, &mut scratch);
            for (dst, src) in col.iter_mut().zip(buf.iter()) {
                *dst = *src;
            }
        }
    });
    let norm = 1.0 / ((h * w) as f64).sqrt();
    img.mapv_inplace(|z| z * norm);
}

/// Wraps a real plane as a complex image.
pub fn to_complex(plane: &Array2<f64>) -> ComplexImage {
    plane.mapv(|x| Complex64::new(x, 0.0))
}

fn hft(img: &QuaternionImage, axis: PureUnitAxis, direction: Direction) -> Result<QuaternionImage> {
    let SymplecticPair {
        mut simplex,
        mut perplex,
    } = symplectic_split(img, axis);
    dft2_in_place(&mut simplex, direction);
    dft2_in_place(&mut perplex, direction);
    symplectic_merge(&SymplecticPair { simplex, perplex }, axis)
}

/// Left-sided hypercomplex Fourier transform
/// `F[u,v] = 1/√(MN) Σ e^{-μ2π(mv/M + nu/N)} f(n,m)`.
pub fn hft_forward(img: &QuaternionImage, axis: PureUnitAxis) -> Result<QuaternionImage> {
    hft(img, axis, Direction::Forward)
}

/// Inverse of [`hft_forward`] for the same axis.
pub fn hft_inverse(spec: &QuaternionImage, axis: PureUnitAxis) -> Result<QuaternionImage> {
    hft(spec, axis, Direction::Inverse)
}

/// Polar form of a quaternion spectrum: `F = A·(cos P + X·sin P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Elementwise modulus, nonnegative.
    pub amplitude: Array2<f64>,
    /// Angle between scalar and vector parts, in `[0, π]`.
    pub phase: Array2<f64>,
    /// Unit pure quaternion field `[b, c, d]`.
    pub eigenaxis: [Array2<f64>; 3],
}

impl Spectrum {
    pub fn dim(&self) -> (usize, usize) {
        self.amplitude.dim()
    }
}

/// Splits a quaternion spectrum into amplitude, phase and eigenaxis.
///
/// Bins whose vector part has modulus below [`DEGENERATE_VECTOR_NORM`] get
/// `default_axis` as eigenaxis and a phase of 0 or π by the sign of the
/// scalar part.
pub fn polar_decompose(spec: &QuaternionImage, default_axis: PureUnitAxis) -> Spectrum {
    let dim = spec.dim();
    let mut amplitude = Array2::zeros(dim);
    let mut phase = Array2::zeros(dim);
    let mut xb = Array2::zeros(dim);
    let mut xc = Array2::zeros(dim);
    let mut xd = Array2::zeros(dim);
    let [db, dc, dd] = default_axis.components();
    for ((r, c), amp) in amplitude.indexed_iter_mut() {
        let q = spec.get(r, c);
        *amp = q.norm();
        let v = q.vector();
        let vn = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if vn < DEGENERATE_VECTOR_NORM {
            phase[[r, c]] = if q.a < 0.0 { PI } else { 0.0 };
            xb[[r, c]] = db;
            xc[[r, c]] = dc;
            xd[[r, c]] = dd;
        } else {
            phase[[r, c]] = vn.atan2(q.a);
            xb[[r, c]] = v[0] / vn;
            xc[[r, c]] = v[1] / vn;
            xd[[r, c]] = v[2] / vn;
        }
    }
    Spectrum {
        amplitude,
        phase,
        eigenaxis: [xb, xc, xd],
    }
}

/// `A·(cos P + X·sin P)` with the amplitude taken from `amplitude`.
///
/// Used both as the left inverse of [`polar_decompose`] and to rebuild a
/// spectrum from a replacement amplitude plane.
pub fn compose_with_amplitude(spectrum: &Spectrum, amplitude: &Array2<f64>) -> Result<QuaternionImage> {
    let dim = spectrum.dim();
    for plane in [
        amplitude,
        &spectrum.phase,
        &spectrum.eigenaxis[0],
        &spectrum.eigenaxis[1],
        &spectrum.eigenaxis[2],
    ] {
        if plane.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: plane.dim(),
            });
        }
    }
    let mut out = QuaternionImage::zeros(dim.0, dim.1);
    let [xb, xc, xd] = &spectrum.eigenaxis;
    for r in 0..dim.0 {
        for c in 0..dim.1 {
            let x = [xb[[r, c]], xc[[r, c]], xd[[r, c]]];
            let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if (norm - 1.0).abs() > EIGENAXIS_TOLERANCE {
                return Err(Error::NonUnitEigenaxis { norm, at: (r, c) });
            }
        }
    }
    for r in 0..dim.0 {
        for c in 0..dim.1 {
            let (sin, cos) = spectrum.phase[[r, c]].sin_cos();
            let amp = amplitude[[r, c]];
            let vs = amp * sin;
            out.a[[r, c]] = amp * cos;
            out.b[[r, c]] = vs * xb[[r, c]];
            out.c[[r, c]] = vs * xc[[r, c]];
            out.d[[r, c]] = vs * xd[[r, c]];
        }
    }
    Ok(out)
}

/// Zeroes `amplitude` wherever `reference` is a numerical spectral zero.
pub fn mask_spectral_zeros(amplitude: &Array2<f64>, reference: &Array2<f64>) -> Array2<f64> {
    let peak = reference.iter().cloned().fold(0.0, f64::max);
    let floor = peak * SPECTRAL_ZERO_RELATIVE;
    let mut out = amplitude.clone();
    out.zip_mut_with(reference, |a, &r| {
        if r <= floor {
            *a = 0.0;
        }
    });
    out
}

pub fn polar_compose(spectrum: &Spectrum) -> Result<QuaternionImage> {
    compose_with_amplitude(spectrum, &spectrum.amplitude)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::Quaternion;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_complex(rng: &mut impl Rng, h: usize, w: usize) -> ComplexImage {
        Array2::from_shape_fn((h, w), |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    /// Direct O(N⁴) unitary DFT.
    fn naive_dft2(img: &ComplexImage, sign: f64) -> ComplexImage {
        let (h, w) = img.dim();
        let norm = 1.0 / ((h * w) as f64).sqrt();
        Array2::from_shape_fn((h, w), |(u, v)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..h {
                for c in 0..w {
                    let theta = 2.0 * PI * ((u * r) as f64 / h as f64 + (v * c) as f64 / w as f64);
                    acc += img[[r, c]] * Complex64::from_polar(1.0, sign * theta);
                }
            }
            acc * norm
        })
    }

    fn max_abs(a: &ComplexImage, b: &ComplexImage) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn constant_image_concentrates_at_dc() {
        let c = 0.7;
        let img = Array2::from_elem((4, 4), Complex64::new(c, 0.0));
        let oracle = naive_dft2(&img, -1.0);
        let out = dft2(&img, Direction::Forward);
        assert!(max_abs(&out, &oracle) < 1e-12);
        assert!((out[[0, 0]] - Complex64::new(c * 4.0, 0.0)).norm() < 1e-12);
        for ((r, cc), z) in out.indexed_iter() {
            if (r, cc) != (0, 0) {
                assert!(z.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn impulse_gives_flat_spectrum() {
        let n = 5;
        let mut img = Array2::zeros((n, n));
        img[[0, 0]] = Complex64::new(1.0, 0.0);
        let out = dft2(&img, Direction::Forward);
        let oracle = naive_dft2(&img, -1.0);
        assert!(max_abs(&out, &oracle) < 1e-12);
        for z in out.iter() {
            assert!((z - Complex64::new(1.0 / n as f64, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn matches_naive_on_odd_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (h, w) in [(1, 1), (3, 7), (6, 5), (8, 8), (11, 4)] {
            let img = random_complex(&mut rng, h, w);
            assert!(max_abs(&dft2(&img, Direction::Forward), &naive_dft2(&img, -1.0)) < 1e-10);
            assert!(max_abs(&dft2(&img, Direction::Inverse), &naive_dft2(&img, 1.0)) < 1e-10);
        }
    }

    #[test]
    fn unitary_roundtrip_and_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let img = random_complex(&mut rng, 32, 32);
        let f = dft2(&img, Direction::Forward);
        let back = dft2(&f, Direction::Inverse);
        assert!(max_abs(&img, &back) < 1e-10);
        let e0: f64 = img.iter().map(|z| z.norm_sqr()).sum();
        let e1: f64 = f.iter().map(|z| z.norm_sqr()).sum();
        assert!((e0 - e1).abs() / e0 < 1e-10);
    }

    #[test]
    fn hft_of_zero_is_zero() {
        let z = QuaternionImage::zeros(4, 6);
        let f = hft_forward(&z, PureUnitAxis::luminance()).unwrap();
        assert_eq!(f.max_abs_diff(&z), 0.0);
        let back = hft_inverse(&z, PureUnitAxis::luminance()).unwrap();
        assert_eq!(back.max_abs_diff(&z), 0.0);
    }

    #[test]
    fn polar_examples() {
        let axis = PureUnitAxis::luminance();
        let mut spec = QuaternionImage::zeros(1, 3);
        spec.set(0, 0, Quaternion::new(1.0, 0.0, 0.0, 0.0));
        spec.set(0, 1, Quaternion::new(0.0, 1.0, 0.0, 0.0));
        spec.set(0, 2, Quaternion::new(-2.0, 0.0, 0.0, 0.0));
        let s = polar_decompose(&spec, axis);
        let x = |c: usize| [s.eigenaxis[0][[0, c]], s.eigenaxis[1][[0, c]], s.eigenaxis[2][[0, c]]];

        assert_eq!(s.amplitude[[0, 0]], 1.0);
        assert_eq!(s.phase[[0, 0]], 0.0);
        assert_eq!(x(0), axis.components());

        assert_eq!(s.amplitude[[0, 1]], 1.0);
        assert!((s.phase[[0, 1]] - PI / 2.0).abs() < 1e-15);
        assert_eq!(x(1), [1.0, 0.0, 0.0]);

        assert_eq!(s.amplitude[[0, 2]], 2.0);
        assert_eq!(s.phase[[0, 2]], PI);
        assert_eq!(x(2), axis.components());

        let back = polar_compose(&s).unwrap();
        assert!(back.max_abs_diff(&spec) < 1e-15);
    }

    #[test]
    fn compose_examples() {
        let s = Spectrum {
            amplitude: Array2::from_elem((1, 2), 1.0),
            phase: ndarray::arr2(&[[0.0, PI / 2.0]]),
            eigenaxis: [
                ndarray::arr2(&[[1.0, 0.0]]),
                ndarray::arr2(&[[0.0, 1.0]]),
                ndarray::arr2(&[[0.0, 0.0]]),
            ],
        };
        let mut s3 = s.clone();
        s3.amplitude[[0, 1]] = 3.0;
        let q = polar_compose(&s3).unwrap();
        assert_eq!(q.get(0, 0), Quaternion::ONE);
        let q1 = q.get(0, 1);
        assert!((q1 - Quaternion::new(0.0, 0.0, 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn compose_rejects_non_unit_axis() {
        let s = Spectrum {
            amplitude: Array2::from_elem((1, 1), 1.0),
            phase: Array2::zeros((1, 1)),
            eigenaxis: [
                Array2::from_elem((1, 1), 0.5),
                Array2::zeros((1, 1)),
                Array2::zeros((1, 1)),
            ],
        };
        assert!(matches!(polar_compose(&s), Err(Error::NonUnitEigenaxis { .. })));
    }

    #[test]
    fn polar_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let axis = PureUnitAxis::luminance();
        for _ in 0..20 {
            let q = QuaternionImage::from_fn(8, 8, |_, _| {
                Quaternion::new(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                )
            });
            let s = polar_decompose(&q, axis);
            assert!(s.amplitude.iter().all(|&a| a >= 0.0));
            assert!(s.phase.iter().all(|&p| (0.0..=PI).contains(&p)));
            let back = polar_compose(&s).unwrap();
            assert!(back.max_abs_diff(&q) < 1e-9);
        }
    }
}
