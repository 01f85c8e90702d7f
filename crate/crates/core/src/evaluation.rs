//! Ground-truth scoring (ROC/AUC, Dice/PoDSC) and post-processing
//! calibration: smoothing sweep, border cut and center bias.

use std::path::{Path, PathBuf};

use ndarray::{s, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::plane::{gaussian_blur, normalize_min_max, resize_nearest};

/// Number of binarization thresholds in a Dice curve.
pub const DSC_STEPS: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub enum GroundTruth {
    /// Binary region mask with at least one positive pixel.
    Region(Array2<bool>),
    /// Fixation points `(x, y)` = `(column, row)` on a `dim` canvas.
    Fixations {
        dim: (usize, usize),
        points: Vec<(usize, usize)>,
    },
}

impl GroundTruth {
    pub fn region(mask: Array2<bool>) -> Result<Self> {
        if !mask.iter().any(|&m| m) {
            return Err(Error::EmptyGroundTruth);
        }
        Ok(GroundTruth::Region(mask))
    }

    pub fn fixations(dim: (usize, usize), points: Vec<(usize, usize)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyGroundTruth);
        }
        if let Some(&(x, y)) = points.iter().find(|&&(x, y)| y >= dim.0 || x >= dim.1) {
            return Err(Error::InvalidParameter(format!(
                "fixation ({x}, {y}) outside {}x{} canvas",
                dim.1, dim.0
            )));
        }
        Ok(GroundTruth::Fixations { dim, points })
    }

    pub fn dim(&self) -> (usize, usize) {
        match self {
            GroundTruth::Region(m) => m.dim(),
            GroundTruth::Fixations { dim, .. } => *dim,
        }
    }

    /// The region mask, if this is region ground truth.
    pub fn mask(&self) -> Option<&Array2<bool>> {
        match self {
            GroundTruth::Region(m) => Some(m),
            GroundTruth::Fixations { .. } => None,
        }
    }

    /// Number of positive pixels.
    pub fn positive_count(&self) -> usize {
        self.positives().iter().filter(|&&m| m).count()
    }

    /// Positive pixels as a mask.
    pub fn positives(&self) -> Array2<bool> {
        match self {
            GroundTruth::Region(m) => m.clone(),
            GroundTruth::Fixations { dim, points } => {
                let mut m = Array2::from_elem(*dim, false);
                for &(x, y) in points {
                    m[[y, x]] = true;
                }
                m
            }
        }
    }

    /// Rescales to `height × width`: masks by nearest neighbour, fixations by
    /// coordinate scaling.
    pub fn resized(&self, height: usize, width: usize) -> Self {
        if self.dim() == (height, width) {
            return self.clone();
        }
        match self {
            GroundTruth::Region(m) => GroundTruth::Region(resize_nearest(m, height, width)),
            GroundTruth::Fixations { dim, points } => {
                let points = points
                    .iter()
                    .map(|&(x, y)| {
                        (
                            ((x as f64 + 0.5) * width as f64 / dim.1 as f64) as usize,
                            ((y as f64 + 0.5) * height as f64 / dim.0 as f64) as usize,
                        )
                    })
                    .map(|(x, y)| (x.min(width - 1), y.min(height - 1)))
                    .collect();
                GroundTruth::Fixations {
                    dim: (height, width),
                    points,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(FPR, TPR)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

fn check_dims(map: &Array2<f64>, dim: (usize, usize)) -> Result<()> {
    if map.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: map.dim(),
        });
    }
    Ok(())
}

/// ROC curve over every distinct map value; pixels scoring at least the
/// threshold are predicted salient. Ties produce diagonal segments, so the
/// trapezoidal area equals the Mann–Whitney statistic.
pub fn roc_auc(map: &Array2<f64>, gt: &GroundTruth) -> Result<RocCurve> {
    check_dims(map, gt.dim())?;
    let labels = gt.positives();
    let mut scored: Vec<(f64, bool)> = map.iter().copied().zip(labels.iter().copied()).collect();
    let positives = scored.iter().filter(|(_, l)| *l).count();
    let negatives = scored.len() - positives;
    if positives == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    if negatives == 0 {
        return Err(Error::InvalidParameter("ground truth has no negative pixels".into()));
    }
    if scored.iter().any(|(v, _)| v.is_nan()) {
        return Err(Error::InvalidParameter("map contains NaN".into()));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let (p, n) = (positives as f64, negatives as f64);
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < scored.len() {
        let v = scored[i].0;
        while i < scored.len() && scored[i].0 == v {
            if scored[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n, tp as f64 / p));
    }
    let auc = trapezoid(&points);
    Ok(RocCurve { points, auc })
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DscCurve {
    /// `(threshold, DSC)` on the min-max normalized map.
    pub points: Vec<(f64, f64)>,
    pub podsc: f64,
}

/// Dice coefficient between `{map_norm ≥ t}` and the mask for
/// `t = i/255, i = 0..=255`.
pub fn dsc_curve(map: &Array2<f64>, mask: &Array2<bool>) -> Result<DscCurve> {
    check_dims(map, mask.dim())?;
    let m = mask.iter().filter(|&&b| b).count();
    if m == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    let norm = normalize_min_max(map);
    let step = |i: usize| i as f64 / (DSC_STEPS - 1) as f64;
    // bucket every pixel at the highest threshold it reaches, then count
    // from the top; the comparisons are the same `v >= t` as a direct scan
    let mut hits = vec![(0usize, 0usize); DSC_STEPS];
    for (&v, &g) in norm.iter().zip(mask.iter()) {
        if !(v >= 0.0) {
            continue;
        }
        let mut i = ((v * (DSC_STEPS - 1) as f64) as usize).min(DSC_STEPS - 1);
        while i + 1 < DSC_STEPS && v >= step(i + 1) {
            i += 1;
        }
        while i > 0 && v < step(i) {
            i -= 1;
        }
        hits[i].0 += 1;
        hits[i].1 += g as usize;
    }
    let mut points = vec![(0.0, 0.0); DSC_STEPS];
    let (mut b, mut both) = (0usize, 0usize);
    for i in (0..DSC_STEPS).rev() {
        b += hits[i].0;
        both += hits[i].1;
        points[i] = (step(i), 2.0 * both as f64 / (b + m) as f64);
    }
    let podsc = points.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(DscCurve { points, podsc })
}

/// Drops a `width`-pixel frame from the map and the ground truth.
pub fn border_cut(map: &Array2<f64>, gt: &GroundTruth, width: usize) -> Result<(Array2<f64>, GroundTruth)> {
    check_dims(map, gt.dim())?;
    if width == 0 {
        return Ok((map.clone(), gt.clone()));
    }
    let (h, w) = map.dim();
    if 2 * width >= h || 2 * width >= w {
        return Err(Error::InvalidParameter(format!(
            "border cut {width} leaves nothing of a {w}x{h} map"
        )));
    }
    let inner = map.slice(s![width..h - width, width..w - width]).to_owned();
    let gt = match gt {
        GroundTruth::Region(m) => GroundTruth::region(m.slice(s![width..h - width, width..w - width]).to_owned())?,
        GroundTruth::Fixations { points, .. } => {
            let points = points
                .iter()
                .filter(|&&(x, y)| x >= width && x < w - width && y >= width && y < h - width)
                .map(|&(x, y)| (x - width, y - width))
                .collect();
            GroundTruth::fixations((h - 2 * width, w - 2 * width), points)?
        }
    };
    Ok((inner, gt))
}

/// Centered Gaussian with peak 1 and standard deviations
/// `sigma_factor·(H, W)`.
pub fn center_gaussian(height: usize, width: usize, sigma_factor: f64) -> Array2<f64> {
    let (cy, cx) = ((height as f64 - 1.0) / 2.0, (width as f64 - 1.0) / 2.0);
    let (sy, sx) = (sigma_factor * height as f64, sigma_factor * width as f64);
    Array2::from_shape_fn((height, width), |(r, c)| {
        let dy = (r as f64 - cy) / sy;
        let dx = (c as f64 - cx) / sx;
        (-0.5 * (dx * dx + dy * dy)).exp()
    })
}

/// `S·(α + (1−α)·G_c)`.
pub fn apply_center_bias(map: &Array2<f64>, alpha: f64, sigma_factor: f64) -> Array2<f64> {
    let g = center_gaussian(map.nrows(), map.ncols(), sigma_factor);
    let mut out = map.clone();
    out.zip_mut_with(&g, |s, &gc| *s *= alpha + (1.0 - alpha) * gc);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Post-smoothing σ candidates as fractions of the map width.
    pub smoothing_factors: Vec<f64>,
    pub border_cut: usize,
    pub center_bias: bool,
    pub bias_alphas: Vec<f64>,
    /// Center-bias σ candidates as fractions of the map size.
    pub bias_sigma_factors: Vec<f64>,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            smoothing_factors: (1..=12).map(|i| i as f64 / 100.0).collect(),
            border_cut: 0,
            center_bias: true,
            bias_alphas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            bias_sigma_factors: vec![0.125, 0.25, 0.5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingPoint {
    pub sigma_factor: f64,
    pub auc: f64,
    /// Mean PoDSC over region ground truths; `None` when there are none.
    pub podsc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterBiasPoint {
    pub alpha: f64,
    pub sigma_factor: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub border_cut: usize,
    pub smoothing: Vec<SmoothingPoint>,
    pub best_smoothing: SmoothingPoint,
    pub center_bias: Vec<CenterBiasPoint>,
    pub best_center_bias: Option<CenterBiasPoint>,
}

/// Scores of one map against one ground truth after resizing and border
/// cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub auc: f64,
    pub podsc: Option<f64>,
}

pub fn score_map(map: &Array2<f64>, gt: &GroundTruth, border: usize) -> Result<Scores> {
    let gt = gt.resized(map.nrows(), map.ncols());
    let (map, gt) = border_cut(map, &gt, border)?;
    let auc = roc_auc(&map, &gt)?.auc;
    let podsc = match &gt {
        GroundTruth::Region(m) => Some(dsc_curve(&map, m)?.podsc),
        GroundTruth::Fixations { .. } => None,
    };
    Ok(Scores { auc, podsc })
}

/// Mean of per-image scores; PoDSC averages only region ground truths.
pub fn mean_scores(scores: &[Scores]) -> Scores {
    let n = scores.len().max(1) as f64;
    let auc = scores.iter().map(|s| s.auc).sum::<f64>() / n;
    let pod: Vec<f64> = scores.iter().filter_map(|s| s.podsc).collect();
    let podsc = (!pod.is_empty()).then(|| pod.iter().sum::<f64>() / pod.len() as f64);
    Scores { auc, podsc }
}

/// Runs the calibration sweep on unsmoothed maps (one per ground truth).
pub fn calibrate_maps(
    raw: &[Array2<f64>],
    gts: &[GroundTruth],
    opts: &CalibrationOptions,
) -> Result<CalibrationReport> {
    if raw.is_empty() {
        return Err(Error::InvalidParameter("empty image set".into()));
    }
    if raw.len() != gts.len() {
        return Err(Error::InvalidParameter(format!(
            "{} maps but {} ground truths",
            raw.len(),
            gts.len()
        )));
    }
    if opts.smoothing_factors.is_empty() {
        return Err(Error::InvalidParameter("empty smoothing grid".into()));
    }
    if opts.center_bias && (opts.bias_alphas.is_empty() || opts.bias_sigma_factors.is_empty()) {
        return Err(Error::InvalidParameter("empty center-bias grid".into()));
    }

    let smooth_all = |factor: f64| -> Vec<Array2<f64>> {
        raw.par_iter()
            .map(|m| gaussian_blur(m, factor * m.ncols() as f64))
            .collect()
    };
    let score_all = |maps: &[Array2<f64>]| -> Result<Scores> {
        let scores = maps
            .par_iter()
            .zip(gts.par_iter())
            .map(|(m, gt)| score_map(m, gt, opts.border_cut))
            .collect::<Result<Vec<_>>>()?;
        Ok(mean_scores(&scores))
    };
    let auc_all = |maps: &[Array2<f64>]| -> Result<f64> {
        let aucs = maps
            .par_iter()
            .zip(gts.par_iter())
            .map(|(m, gt)| {
                let gt = gt.resized(m.nrows(), m.ncols());
                let (m, gt) = border_cut(m, &gt, opts.border_cut)?;
                Ok(roc_auc(&m, &gt)?.auc)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
    };

    let mut smoothing = Vec::with_capacity(opts.smoothing_factors.len());
    for &factor in &opts.smoothing_factors {
        let s = score_all(&smooth_all(factor))?;
        smoothing.push(SmoothingPoint {
            sigma_factor: factor,
            auc: s.auc,
            podsc: s.podsc,
        });
    }
    let best_smoothing = *smoothing
        .iter()
        .fold(None::<&SmoothingPoint>, |best, p| match best {
            Some(b) if b.auc >= p.auc => Some(b),
            _ => Some(p),
        })
        .expect("nonempty grid");

    let mut center_bias = Vec::new();
    if opts.center_bias {
        let smoothed = smooth_all(best_smoothing.sigma_factor);
        for &sigma_factor in &opts.bias_sigma_factors {
            for &alpha in &opts.bias_alphas {
                let biased: Vec<_> = smoothed
                    .par_iter()
                    .map(|m| apply_center_bias(m, alpha, sigma_factor))
                    .collect();
                center_bias.push(CenterBiasPoint {
                    alpha,
                    sigma_factor,
                    auc: auc_all(&biased)?,
                });
            }
        }
    }
    let best_center_bias = center_bias.iter().fold(None::<CenterBiasPoint>, |best, p| match best {
        Some(b) if b.auc >= p.auc => Some(b),
        _ => Some(*p),
    });

    Ok(CalibrationReport {
        border_cut: opts.border_cut,
        smoothing,
        best_smoothing,
        center_bias,
        best_center_bias,
    })
}

/// Runs `runner` on every image (in parallel) and calibrates the results.
/// The runner must return maps without post-smoothing.
pub fn calibrate<R>(
    runner: R,
    images: &[RgbImage],
    gts: &[GroundTruth],
    opts: &CalibrationOptions,
) -> Result<CalibrationReport>
where
    R: Fn(&RgbImage) -> Result<Array2<f64>> + Sync,
{
    if images.len() != gts.len() {
        return Err(Error::InvalidParameter(format!(
            "{} images but {} ground truths",
            images.len(),
            gts.len()
        )));
    }
    let raw = images.par_iter().map(&runner).collect::<Result<Vec<_>>>()?;
    calibrate_maps(&raw, gts, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GtKind {
    Mask,
    Fixations,
}

/// One image / ground-truth pair of an evaluation manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub gt: PathBuf,
    pub gt_kind: GtKind,
    /// Image category tag, 1 to 6.
    pub category: u8,
}

/// Reads a JSON manifest; relative paths resolve against its directory.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut entries: Vec<ManifestEntry> = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    for e in &mut entries {
        if !(1..=6).contains(&e.category) {
            return Err(Error::InvalidParameter(format!(
                "{}: category {} outside 1..=6",
                e.image.display(),
                e.category
            )));
        }
        if e.image.is_relative() {
            e.image = base.join(&e.image);
        }
        if e.gt.is_relative() {
            e.gt = base.join(&e.gt);
        }
    }
    Ok(entries)
}

/// Parses a fixation list: one `x y` or `x,y` pair per line, `#` comments.
pub fn parse_fixations(text: &str, dim: (usize, usize)) -> Result<GroundTruth> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("fixation line {}: bad number {s:?}", lineno + 1)))
        };
        if fields.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "fixation line {}: expected two values",
                lineno + 1
            )));
        }
        let (x, y) = (parse(fields[0])?, parse(fields[1])?);
        if x < 0.0 || y < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "fixation line {}: negative coordinate",
                lineno + 1
            )));
        }
        points.push((x.round() as usize, y.round() as usize));
    }
    GroundTruth::fixations(dim, points)
}
