//! Choosing the best map out of a per-scale family.
//!
//! The default criterion minimizes `H2D(S_k) / λ_k`, where `H2D` is the
//! histogram entropy of the Gaussian-smoothed map and `λ_k` is the mass of
//! the normalized map under a centered Gaussian window.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{roc_auc, GroundTruth};
use crate::plane::{gaussian_blur, normalize_min_max};

pub const DEFAULT_BINS: usize = 256;
pub const DEFAULT_ENTROPY_FACTOR: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    /// `argmin λ⁻¹·H2D`.
    #[default]
    Full,
    /// `argmin H2D`.
    EntropyOnly,
    /// `argmax AUC` against a ground-truth mask.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionCriterion {
    pub mode: SelectionMode,
    /// Entropy smoothing scale as a fraction of the map width.
    pub entropy_factor: f64,
    pub bins: usize,
}

impl Default for SelectionCriterion {
    fn default() -> Self {
        Self {
            mode: SelectionMode::Full,
            entropy_factor: DEFAULT_ENTROPY_FACTOR,
            bins: DEFAULT_BINS,
        }
    }
}

impl SelectionCriterion {
    pub fn validate(&self) -> Result<()> {
        if self.bins < 2 {
            return Err(Error::InvalidParameter(format!(
                "histogram needs >= 2 bins, got {}",
                self.bins
            )));
        }
        if !(self.entropy_factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "entropy smoothing factor must be positive, got {}",
                self.entropy_factor
            )));
        }
        Ok(())
    }
}

/// Shannon entropy (bits) of the min-max normalized values, binned into
/// `bins` equal cells. Constant maps have entropy 0.
pub fn histogram_entropy(map: &Array2<f64>, bins: usize) -> f64 {
    let bins = bins.max(1);
    let norm = normalize_min_max(map);
    let mut counts = vec![0usize; bins];
    for &v in norm.iter() {
        let idx = ((v * bins as f64) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = norm.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of the map after a Gaussian blur of scale `sigma` (pixels).
pub fn entropy2d(map: &Array2<f64>, sigma: f64, bins: usize) -> f64 {
    histogram_entropy(&gaussian_blur(map, sigma), bins)
}

/// Centered Gaussian window with `σ_w = W/4`, `σ_h = H/4`, unit sum.
pub fn center_mask(height: usize, width: usize) -> Array2<f64> {
    let (cy, cx) = ((height as f64 - 1.0) / 2.0, (width as f64 - 1.0) / 2.0);
    let (sy, sx) = (height as f64 / 4.0, width as f64 / 4.0);
    let mut mask = Array2::from_shape_fn((height, width), |(r, c)| {
        let dy = (r as f64 - cy) / sy;
        let dx = (c as f64 - cx) / sx;
        (-0.5 * (dx * dx + dy * dy)).exp()
    });
    let sum = mask.sum();
    mask.mapv_inplace(|v| v / sum);
    mask
}

fn is_degenerate(map: &Array2<f64>) -> bool {
    let sum = map.sum();
    !(sum > 0.0 && sum.is_finite())
}

/// `λ = Σ K·N(S)`, where `N` normalizes the map to unit sum. A map with no
/// positive mass gets `1/(H·W)`.
pub fn border_weight_lambda(map: &Array2<f64>) -> f64 {
    border_weight_with_mask(map, &center_mask(map.nrows(), map.ncols()))
}

fn border_weight_with_mask(map: &Array2<f64>, mask: &Array2<f64>) -> f64 {
    if is_degenerate(map) {
        return 1.0 / map.len() as f64;
    }
    let sum = map.sum();
    map.iter().zip(mask.iter()).map(|(s, k)| k * s / sum).sum()
}

/// One row of a criterion trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionRow {
    pub k: usize,
    pub entropy: f64,
    pub lambda: f64,
    /// Value that the selector optimizes: `H2D/λ`, `H2D`, or AUC for the
    /// oracle.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    /// 1-based scale index.
    pub k: usize,
    pub trace: Vec<CriterionRow>,
}

/// Picks the best scale; ties go to the smallest `k`. Maps without positive
/// mass only win when every map is degenerate.
pub fn select_scale(
    maps: &[Array2<f64>],
    criterion: &SelectionCriterion,
    gt: Option<&GroundTruth>,
) -> Result<SelectionOutcome> {
    criterion.validate()?;
    if maps.is_empty() {
        return Err(Error::InvalidParameter("no candidate maps".into()));
    }
    if criterion.mode == SelectionMode::Oracle && gt.is_none() {
        return Err(Error::MissingGroundTruth);
    }
    let (h, w) = maps[0].dim();
    let mask = center_mask(h, w);
    let sigma = criterion.entropy_factor * w as f64;

    let mut trace = Vec::with_capacity(maps.len());
    for (i, map) in maps.iter().enumerate() {
        if map.dim() != (h, w) {
            return Err(Error::DimensionMismatch {
                expected: (h, w),
                actual: map.dim(),
            });
        }
        let degenerate = is_degenerate(map);
        let entropy = if degenerate {
            0.0
        } else {
            entropy2d(map, sigma, criterion.bins)
        };
        let lambda = border_weight_with_mask(map, &mask);
        let score = match criterion.mode {
            SelectionMode::Full => entropy / lambda,
            SelectionMode::EntropyOnly => entropy,
            SelectionMode::Oracle => {
                let gt = gt.expect("checked above").resized(h, w);
                roc_auc(map, &gt)?.auc
            }
        };
        trace.push((
            degenerate,
            CriterionRow {
                k: i + 1,
                entropy,
                lambda,
                score,
            },
        ));
    }

    let all_degenerate = trace.iter().all(|(d, _)| *d);
    let better = |a: f64, b: f64| match criterion.mode {
        SelectionMode::Oracle => a > b,
        _ => a < b,
    };
    let mut best: Option<&CriterionRow> = None;
    for (degenerate, row) in &trace {
        if *degenerate && !all_degenerate {
            continue;
        }
        match best {
            Some(b) if !better(row.score, b.score) => {}
            _ => best = Some(row),
        }
    }
    let k = best.map(|r| r.k).unwrap_or(1);
    Ok(SelectionOutcome {
        k,
        trace: trace.into_iter().map(|(_, r)| r).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::argmax;

    #[test]
    fn entropy_examples() {
        assert_eq!(histogram_entropy(&Array2::from_elem((4, 4), 3.0), 256), 0.0);
        let uniform = Array2::from_shape_fn((16, 16), |(r, c)| (r * 16 + c) as f64);
        assert!((histogram_entropy(&uniform, 256) - 8.0).abs() < 1e-12);
        let coin = Array2::from_shape_fn((4, 4), |(r, _)| if r < 2 { 0.0 } else { 5.0 });
        assert!((histogram_entropy(&coin, 256) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_affine_invariance() {
        let m = Array2::from_shape_fn((8, 8), |(r, c)| ((r * 7 + c * 3) % 11) as f64);
        let e = histogram_entropy(&m, 256);
        assert!((histogram_entropy(&m.mapv(|v| 3.5 * v + 2.0), 256) - e).abs() < 1e-12);
    }

    #[test]
    fn entropy2d_small_sigma_limit() {
        let m = Array2::from_shape_fn((16, 16), |(r, c)| ((r * 5 + c * 3) % 13) as f64);
        assert!((entropy2d(&m, 0.01, 256) - histogram_entropy(&m, 256)).abs() < 1e-9);
        assert_eq!(entropy2d(&Array2::from_elem((5, 5), 1.0), 2.0, 256), 0.0);
    }

    #[test]
    fn lambda_examples() {
        let (h, w) = (9, 11);
        let k = center_mask(h, w);
        assert!((k.sum() - 1.0).abs() < 1e-12);
        let kmax = k[[4, 5]];
        assert_eq!(argmax(&k), (4, 5));

        let mut center = Array2::zeros((h, w));
        center[[4, 5]] = 7.0;
        assert!((border_weight_lambda(&center) - kmax).abs() < 1e-15);

        let uniform = Array2::from_elem((h, w), 0.3);
        assert!((border_weight_lambda(&uniform) - 1.0 / (h * w) as f64).abs() < 1e-15);

        let mut corner = Array2::zeros((h, w));
        corner[[0, 0]] = 7.0;
        assert!(border_weight_lambda(&corner) < border_weight_lambda(&center));

        assert_eq!(border_weight_lambda(&Array2::zeros((h, w))), 1.0 / (h * w) as f64);
        // scale invariance
        let m = Array2::from_shape_fn((h, w), |(r, c)| (r + 2 * c) as f64);
        assert!((border_weight_lambda(&m) - border_weight_lambda(&(&m * 4.0))).abs() < 1e-15);
    }

    #[test]
    fn select_examples() {
        let crit = SelectionCriterion::default();
        let flat = Array2::from_elem((32, 32), 1.0);
        assert_eq!(select_scale(std::slice::from_ref(&flat), &crit, None).unwrap().k, 1);

        let noisy = Array2::from_shape_fn((32, 32), |(r, c)| ((r * 31 + c * 17) % 23) as f64);
        let mut centered = Array2::zeros((32, 32));
        centered[[16, 16]] = 1.0;
        let out = select_scale(&[noisy.clone(), centered.clone()], &crit, None).unwrap();
        assert_eq!(out.k, 2);
        assert_eq!(out.trace.len(), 2);

        let same = select_scale(&[centered.clone(), centered.clone(), centered], &crit, None).unwrap();
        assert_eq!(same.k, 1);
    }

    #[test]
    fn degenerate_maps_do_not_win() {
        let crit = SelectionCriterion::default();
        let zero = Array2::zeros((16, 16));
        let m = Array2::from_shape_fn((16, 16), |(r, c)| ((r * 3 + c) % 5) as f64);
        assert_eq!(select_scale(&[zero.clone(), m], &crit, None).unwrap().k, 2);
        assert_eq!(select_scale(&[zero.clone(), zero], &crit, None).unwrap().k, 1);
    }

    #[test]
    fn oracle_needs_ground_truth() {
        let crit = SelectionCriterion {
            mode: SelectionMode::Oracle,
            ..Default::default()
        };
        let m = Array2::from_elem((8, 8), 1.0);
        assert!(matches!(
            select_scale(&[m], &crit, None),
            Err(Error::MissingGroundTruth)
        ));
    }

    #[test]
    fn oracle_picks_best_auc() {
        let crit = SelectionCriterion {
            mode: SelectionMode::Oracle,
            ..Default::default()
        };
        let mask = Array2::from_shape_fn((8, 8), |(r, c)| r < 4 && c < 4);
        let gt = GroundTruth::region(mask.clone()).unwrap();
        let good = mask.mapv(|b| if b { 1.0 } else { 0.0 });
        let bad = good.mapv(|v| 1.0 - v);
        let out = select_scale(&[bad, good], &crit, Some(&gt)).unwrap();
        assert_eq!(out.k, 2);
        assert_eq!(out.trace[1].score, 1.0);
    }
}
