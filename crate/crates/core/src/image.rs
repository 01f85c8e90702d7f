//! Color image container and opponent-color features.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::plane::resize_bilinear;

/// RGB image with channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub r: Array2<f64>,
    pub g: Array2<f64>,
    pub b: Array2<f64>,
}

impl RgbImage {
    /// Builds an image from three planes; values are clamped to `[0, 1]`.
    pub fn new(r: Array2<f64>, g: Array2<f64>, b: Array2<f64>) -> Result<Self> {
        let dim = r.dim();
        for p in [&g, &b] {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: p.dim(),
                });
            }
        }
        if dim.0 == 0 || dim.1 == 0 {
            return Err(Error::InvalidParameter("empty image".into()));
        }
        let clamp = |p: Array2<f64>| -> Result<Array2<f64>> {
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("image has non-finite values".into()));
            }
            Ok(p.mapv(|v| v.clamp(0.0, 1.0)))
        };
        Ok(Self {
            r: clamp(r)?,
            g: clamp(g)?,
            b: clamp(b)?,
        })
    }

    pub fn from_gray(gray: Array2<f64>) -> Result<Self> {
        Self::new(gray.clone(), gray.clone(), gray)
    }

    pub fn filled(height: usize, width: usize, rgb: [f64; 3]) -> Self {
        Self {
            r: Array2::from_elem((height, width), rgb[0].clamp(0.0, 1.0)),
            g: Array2::from_elem((height, width), rgb[1].clamp(0.0, 1.0)),
            b: Array2::from_elem((height, width), rgb[2].clamp(0.0, 1.0)),
        }
    }

    /// Interleaved 8-bit RGB, row-major.
    pub fn from_rgb8(height: usize, width: usize, data: &[u8]) -> Result<Self> {
        if data.len() != height * width * 3 {
            return Err(Error::Decode(format!(
                "expected {} RGB bytes, got {}",
                height * width * 3,
                data.len()
            )));
        }
        let channel =
            |k: usize| Array2::from_shape_fn((height, width), |(r, c)| data[(r * width + c) * 3 + k] as f64 / 255.0);
        Self::new(channel(0), channel(1), channel(2))
    }

    pub fn to_rgb8(&self) -> Vec<u8> {
        let q = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        self.r
            .iter()
            .zip(self.g.iter())
            .zip(self.b.iter())
            .flat_map(|((&r, &g), &b)| [q(r), q(g), q(b)])
            .collect()
    }

    pub fn height(&self) -> usize {
        self.r.nrows()
    }

    pub fn width(&self) -> usize {
        self.r.ncols()
    }

    pub fn dim(&self) -> (usize, usize) {
        self.r.dim()
    }

    pub fn get(&self, r: usize, c: usize) -> [f64; 3] {
        [self.r[[r, c]], self.g[[r, c]], self.b[[r, c]]]
    }

    pub fn set(&mut self, r: usize, c: usize, rgb: [f64; 3]) {
        self.r[[r, c]] = rgb[0];
        self.g[[r, c]] = rgb[1];
        self.b[[r, c]] = rgb[2];
    }

    /// Mean of the three channels.
    pub fn intensity(&self) -> Array2<f64> {
        (&self.r + &self.g + &self.b) / 3.0
    }

    pub fn resize(&self, height: usize, width: usize) -> Self {
        Self {
            r: resize_bilinear(&self.r, height, width),
            g: resize_bilinear(&self.g, height, width),
            b: resize_bilinear(&self.b, height, width),
        }
    }

    /// Multiplies every channel by `s`, clamping to `[0, 1]`.
    pub fn scaled(&self, s: f64) -> Self {
        let f = |p: &Array2<f64>| p.mapv(|v| (v * s).clamp(0.0, 1.0));
        Self {
            r: f(&self.r),
            g: f(&self.g),
            b: f(&self.b),
        }
    }
}

/// Intensity and the two opponent-color channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMaps {
    pub intensity: Array2<f64>,
    pub red_green: Array2<f64>,
    pub blue_yellow: Array2<f64>,
}

/// `I = (r+g+b)/3`, `RG = R − G ∈ [−1.5, 1.5]`, `BY = B − Y ∈ [−2, 2]`
/// (extremes at pure blue and yellow) with broadly tuned
/// channels `R = r − (g+b)/2`, `G = g − (r+b)/2`, `B = b − (r+g)/2`,
/// `Y = (r+g)/2 − |r−g|/2 − b`.
pub fn rgb_to_features(img: &RgbImage) -> FeatureMaps {
    let dim = img.dim();
    let mut intensity = Array2::zeros(dim);
    let mut red_green = Array2::zeros(dim);
    let mut blue_yellow = Array2::zeros(dim);
    for ((idx, i), (rg, by)) in intensity
        .indexed_iter_mut()
        .zip(red_green.iter_mut().zip(blue_yellow.iter_mut()))
    {
        let (r, g, b) = (img.r[idx], img.g[idx], img.b[idx]);
        let big_r = r - (g + b) / 2.0;
        let big_g = g - (r + b) / 2.0;
        let big_b = b - (r + g) / 2.0;
        let big_y = (r + g) / 2.0 - (r - g).abs() / 2.0 - b;
        *i = (r + g + b) / 3.0;
        *rg = big_r - big_g;
        *by = big_b - big_y;
    }
    FeatureMaps {
        intensity,
        red_green,
        blue_yellow,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pixel(rgb: [f64; 3]) -> [f64; 3] {
        let f = rgb_to_features(&RgbImage::filled(1, 1, rgb));
        [f.intensity[[0, 0]], f.red_green[[0, 0]], f.blue_yellow[[0, 0]]]
    }

    #[test]
    fn opponent_examples() {
        let [i, rg, by] = pixel([0.4, 0.4, 0.4]);
        assert!((i - 0.4).abs() < 1e-15 && rg.abs() < 1e-15 && by.abs() < 1e-15);
        let [i, rg, by] = pixel([1.0, 0.0, 0.0]);
        assert!((i - 1.0 / 3.0).abs() < 1e-15);
        assert!((rg - 1.5).abs() < 1e-15);
        assert!((by + 0.5).abs() < 1e-15);
        let [i, rg, by] = pixel([0.0, 0.0, 1.0]);
        assert!((i - 1.0 / 3.0).abs() < 1e-15);
        assert!(rg.abs() < 1e-15);
        assert!((by - 2.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn feature_ranges(r in 0.0..=1.0f64, g in 0.0..=1.0f64, b in 0.0..=1.0f64) {
            let [i, rg, by] = pixel([r, g, b]);
            prop_assert!((0.0..=1.0).contains(&i));
            prop_assert!((-1.5..=1.5).contains(&rg));
            prop_assert!((-2.0..=2.0).contains(&by));
        }
    }

    #[test]
    fn clamps_and_validates() {
        let img = RgbImage::new(
            Array2::from_elem((1, 1), 1.7),
            Array2::from_elem((1, 1), -0.2),
            Array2::from_elem((1, 1), 0.5),
        )
        .unwrap();
        assert_eq!(img.get(0, 0), [1.0, 0.0, 0.5]);
        assert!(RgbImage::new(Array2::zeros((1, 2)), Array2::zeros((1, 1)), Array2::zeros((1, 1))).is_err());
    }

    #[test]
    fn rgb8_roundtrip() {
        let data: Vec<u8> = (0..2 * 3 * 3).map(|i| (i * 13) as u8).collect();
        let img = RgbImage::from_rgb8(2, 3, &data).unwrap();
        assert_eq!(img.to_rgb8(), data);
    }
}
