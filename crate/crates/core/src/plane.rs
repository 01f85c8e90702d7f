//! Spatial helpers on real planes: Gaussian blur with replicated borders,
//! resampling, normalization and simple statistics.

use ndarray::{Array2, Axis};

/// Truncation radius used for spatial Gaussian blurs.
pub fn blur_radius(sigma: f64) -> usize {
    ((3.0 * sigma).ceil() as usize).max(1)
}

/// Sampled 1-D Gaussian of radius `radius`, normalized to unit sum.
pub fn gaussian_1d(sigma: f64, radius: usize) -> Vec<f64> {
    let mut taps: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let x = i as f64 - radius as f64;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

fn convolve_rows_replicate(src: &Array2<f64>, taps: &[f64]) -> Array2<f64> {
    let (h, w) = src.dim();
    let radius = (taps.len() / 2) as isize;
    let mut out = Array2::zeros((h, w));
    for (row_in, mut row_out) in src.axis_iter(Axis(0)).zip(out.axis_iter_mut(Axis(0))) {
        for (c, o) in row_out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (t, &tap) in taps.iter().enumerate() {
                let cc = (c as isize + t as isize - radius).clamp(0, w as isize - 1) as usize;
                acc += tap * row_in[cc];
            }
            *o = acc;
        }
    }
    out
}

/// Isotropic Gaussian blur, border pixels replicated. `sigma <= 0` is the
/// identity.
pub fn gaussian_blur(src: &Array2<f64>, sigma: f64) -> Array2<f64> {
    if !(sigma > 0.0) || src.is_empty() {
        return src.clone();
    }
    let taps = gaussian_1d(sigma, blur_radius(sigma));
    let rows = convolve_rows_replicate(src, &taps);
    let t = rows.t().to_owned();
    convolve_rows_replicate(&t, &taps).t().to_owned()
}

/// 3×3 correlation with replicated borders.
pub fn filter3x3_replicate(src: &Array2<f64>, kernel: &[[f64; 3]; 3]) -> Array2<f64> {
    let (h, w) = src.dim();
    Array2::from_shape_fn((h, w), |(r, c)| {
        let mut acc = 0.0;
        for (dr, krow) in kernel.iter().enumerate() {
            let rr = (r as isize + dr as isize - 1).clamp(0, h as isize - 1) as usize;
            for (dc, &k) in krow.iter().enumerate() {
                let cc = (c as isize + dc as isize - 1).clamp(0, w as isize - 1) as usize;
                acc += k * src[[rr, cc]];
            }
        }
        acc
    })
}

/// Bilinear resampling with pixel-center alignment.
pub fn resize_bilinear(src: &Array2<f64>, height: usize, width: usize) -> Array2<f64> {
    let (h, w) = src.dim();
    if (h, w) == (height, width) {
        return src.clone();
    }
    let sy = h as f64 / height as f64;
    let sx = w as f64 / width as f64;
    let coord = |i: usize, scale: f64, n: usize| {
        let x = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (n - 1) as f64);
        let x0 = x.floor() as usize;
        let x1 = (x0 + 1).min(n - 1);
        (x0, x1, x - x0 as f64)
    };
    let cols: Vec<_> = (0..width).map(|c| coord(c, sx, w)).collect();
    Array2::from_shape_fn((height, width), |(r, c)| {
        let (y0, y1, fy) = coord(r, sy, h);
        let (x0, x1, fx) = cols[c];
        let top = src[[y0, x0]] * (1.0 - fx) + src[[y0, x1]] * fx;
        let bottom = src[[y1, x0]] * (1.0 - fx) + src[[y1, x1]] * fx;
        top * (1.0 - fy) + bottom * fy
    })
}

/// Nearest-neighbour resampling; keeps binary masks binary.
pub fn resize_nearest<T: Clone>(src: &Array2<T>, height: usize, width: usize) -> Array2<T> {
    let (h, w) = src.dim();
    Array2::from_shape_fn((height, width), |(r, c)| {
        let rr = (((r as f64 + 0.5) * h as f64 / height as f64) as usize).min(h - 1);
        let cc = (((c as f64 + 0.5) * w as f64 / width as f64) as usize).min(w - 1);
        src[[rr, cc]].clone()
    })
}

pub fn min_max(src: &Array2<f64>) -> (f64, f64) {
    src.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}

/// Maps the plane onto `[0, 1]`; a constant plane maps to all zeros.
pub fn normalize_min_max(src: &Array2<f64>) -> Array2<f64> {
    let (lo, hi) = min_max(src);
    let span = hi - lo;
    if !(span > 0.0) {
        return Array2::zeros(src.dim());
    }
    src.mapv(|x| (x - lo) / span)
}

/// Row-major position of the largest value (first on ties).
pub fn argmax(src: &Array2<f64>) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_v = f64::NEG_INFINITY;
    for ((r, c), &v) in src.indexed_iter() {
        if v > best_v {
            best_v = v;
            best = (r, c);
        }
    }
    best
}

/// Pearson correlation coefficient; 0 when either input is constant.
pub fn pearson(x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let n = x.len() as f64;
    let mx = x.sum() / n;
    let my = y.sum() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y.iter()) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Cyclic shift by `(dr, dc)`.
pub fn roll(src: &Array2<f64>, dr: usize, dc: usize) -> Array2<f64> {
    let (h, w) = src.dim();
    Array2::from_shape_fn((h, w), |(r, c)| src[[(r + h - dr % h) % h, (c + w - dc % w) % w]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blur_keeps_constants_and_mass_center() {
        let flat = Array2::from_elem((9, 7), 2.5);
        let out = gaussian_blur(&flat, 1.7);
        assert!(out.iter().all(|&v| (v - 2.5).abs() < 1e-12));

        let mut spike = Array2::zeros((21, 21));
        spike[[10, 10]] = 1.0;
        let out = gaussian_blur(&spike, 2.0);
        assert_eq!(argmax(&out), (10, 10));
        assert!((out.sum() - 1.0).abs() < 1e-12);
        assert_eq!(out[[10, 8]], out[[10, 12]]);
        assert_eq!(out[[8, 10]], out[[12, 10]]);
    }

    #[test]
    fn tiny_sigma_is_near_identity() {
        let src = Array2::from_shape_fn((5, 5), |(r, c)| (r * 5 + c) as f64);
        let out = gaussian_blur(&src, 0.01);
        assert!(src.iter().zip(out.iter()).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn resize_identity_and_constant() {
        let src = Array2::from_shape_fn((4, 6), |(r, c)| (r + c) as f64);
        assert_eq!(resize_bilinear(&src, 4, 6), src);
        let flat = Array2::from_elem((5, 5), 0.3);
        let up = resize_bilinear(&flat, 13, 8);
        assert!(up.iter().all(|&v| (v - 0.3).abs() < 1e-15));
        let mask = Array2::from_shape_fn((4, 4), |(r, _)| r < 2);
        let big = resize_nearest(&mask, 8, 8);
        assert_eq!(big.iter().filter(|&&m| m).count(), 32);
        assert!(big[[3, 0]] && !big[[4, 0]]);
    }

    #[test]
    fn pearson_basics() {
        let x = Array2::from_shape_fn((3, 3), |(r, c)| (r * 3 + c) as f64);
        let y = x.mapv(|v| 2.0 * v + 1.0);
        assert!((pearson(&x, &y) - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &y.mapv(|v| -v)) + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&x, &Array2::from_elem((3, 3), 1.0)), 0.0);
    }

    #[test]
    fn laplacian_on_constant_is_zero() {
        let k = [[0.0, -1.0, 0.0], [-1.0, 4.0, -1.0], [0.0, -1.0, 0.0]];
        let out = filter3x3_replicate(&Array2::from_elem((6, 6), 0.4), &k);
        assert!(out.iter().all(|&v| v.abs() < 1e-15));
    }
}
