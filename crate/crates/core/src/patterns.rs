//! Synthetic stimuli: pop-out patterns with exact target masks, noise
//! injection, the binary "chaos" sequence used to probe the 2-D entropy, and
//! a corpus of images with 1/f amplitude spectra.
//!
//! Tokens are rendered hard-edged by testing pixel centers, so a target mask
//! is exactly the bounding box of the pixels the deviant token painted.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::GroundTruth;
use crate::image::RgbImage;
use crate::plane::{argmax, resize_nearest};
use crate::spectral::{dft2_in_place, to_complex, Direction};

pub const RED: [f64; 3] = [1.0, 0.0, 0.0];
pub const GREEN: [f64; 3] = [0.0, 0.8, 0.0];
pub const WHITE: [f64; 3] = [1.0, 1.0, 1.0];
pub const BLACK: [f64; 3] = [0.0, 0.0, 0.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternKind {
    OddColorBar,
    OddOrientationBar,
    OddShape,
    AsymmetricItem,
    MissingItem,
    SizeSeries,
    RepeatedDistractor,
}

impl PatternKind {
    pub const ALL: [PatternKind; 7] = [
        PatternKind::OddColorBar,
        PatternKind::OddOrientationBar,
        PatternKind::OddShape,
        PatternKind::AsymmetricItem,
        PatternKind::MissingItem,
        PatternKind::SizeSeries,
        PatternKind::RepeatedDistractor,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PatternKind::OddColorBar => "odd-color-bar",
            PatternKind::OddOrientationBar => "odd-orientation-bar",
            PatternKind::OddShape => "odd-shape",
            PatternKind::AsymmetricItem => "asymmetric-item",
            PatternKind::MissingItem => "missing-item",
            PatternKind::SizeSeries => "size-series",
            PatternKind::RepeatedDistractor => "repeated-distractor",
        }
    }

    /// Manifest category tag: color/orientation 1, shape 2, asymmetry 3,
    /// missing item 4, size series 5, repeated distractors 6.
    pub fn category(&self) -> u8 {
        match self {
            PatternKind::OddColorBar | PatternKind::OddOrientationBar => 1,
            PatternKind::OddShape => 2,
            PatternKind::AsymmetricItem => 3,
            PatternKind::MissingItem => 4,
            PatternKind::SizeSeries => 5,
            PatternKind::RepeatedDistractor => 6,
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PatternKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PatternKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidPattern(format!("unknown pattern kind {s:?}")))
    }
}

/// Token outline in pixels, centered on its anchor. Angles are degrees
/// counter-clockwise from horizontal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "shape")]
pub enum Shape {
    Bar {
        length: f64,
        width: f64,
        angle: f64,
    },
    Square {
        side: f64,
    },
    Disc {
        radius: f64,
    },
    Ring {
        radius: f64,
        thickness: f64,
    },
    /// Ring with a short stroke through its lower-right rim ("Q").
    RingWithTail {
        radius: f64,
        thickness: f64,
    },
    Plus {
        size: f64,
        thickness: f64,
    },
    /// Vertical stroke with a foot to the right.
    Ell {
        size: f64,
        thickness: f64,
    },
    /// Vertical stroke with a bar across the top.
    Tee {
        size: f64,
        thickness: f64,
    },
}

impl Shape {
    /// Does the offset `(dx, dy)` from the anchor (y pointing down) fall
    /// inside the shape?
    pub fn contains(&self, dx: f64, dy: f64) -> bool {
        match *self {
            Shape::Bar { length, width, angle } => in_bar(dx, dy, length, width, angle),
            Shape::Square { side } => dx.abs() <= side / 2.0 && dy.abs() <= side / 2.0,
            Shape::Disc { radius } => dx * dx + dy * dy <= radius * radius,
            Shape::Ring { radius, thickness } => in_ring(dx, dy, radius, thickness),
            Shape::RingWithTail { radius, thickness } => {
                let (cx, cy) = (
                    radius * std::f64::consts::FRAC_1_SQRT_2,
                    radius * std::f64::consts::FRAC_1_SQRT_2,
                );
                in_ring(dx, dy, radius, thickness) || in_bar(dx - cx, dy - cy, radius, thickness, -45.0)
            }
            Shape::Plus { size, thickness } => {
                let h = size / 2.0;
                let t = thickness / 2.0;
                (dx.abs() <= h && dy.abs() <= t) || (dx.abs() <= t && dy.abs() <= h)
            }
            Shape::Ell { size, thickness } => {
                let h = size / 2.0;
                (dx.abs() <= h && dy.abs() <= h) && ((dx <= -h + thickness) || (dy >= h - thickness))
            }
            Shape::Tee { size, thickness } => {
                let h = size / 2.0;
                let t = thickness / 2.0;
                (dx.abs() <= h && dy.abs() <= h) && ((dy <= -h + thickness) || dx.abs() <= t)
            }
        }
    }

    /// Half-extent of an axis-aligned box that encloses the shape.
    pub fn reach(&self) -> f64 {
        match *self {
            Shape::Bar { length, width, .. } => 0.5 * (length * length + width * width).sqrt(),
            Shape::Square { side } => side / 2.0 * std::f64::consts::SQRT_2,
            Shape::Disc { radius } | Shape::Ring { radius, .. } => radius,
            Shape::RingWithTail { radius, thickness } => {
                radius * std::f64::consts::FRAC_1_SQRT_2 + 0.5 * (radius * radius + thickness * thickness).sqrt()
            }
            Shape::Plus { size, .. } | Shape::Ell { size, .. } | Shape::Tee { size, .. } => {
                size / 2.0 * std::f64::consts::SQRT_2
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let dims: Vec<f64> = match *self {
            Shape::Bar { length, width, angle } => {
                if !angle.is_finite() {
                    return Err(Error::InvalidPattern("bar angle must be finite".into()));
                }
                vec![length, width]
            }
            Shape::Square { side } => vec![side],
            Shape::Disc { radius } => vec![radius],
            Shape::Ring { radius, thickness } | Shape::RingWithTail { radius, thickness } => {
                if thickness > radius {
                    return Err(Error::InvalidPattern("ring thicker than its radius".into()));
                }
                vec![radius, thickness]
            }
            Shape::Plus { size, thickness } | Shape::Ell { size, thickness } | Shape::Tee { size, thickness } => {
                if thickness > size {
                    return Err(Error::InvalidPattern("stroke thicker than the token".into()));
                }
                vec![size, thickness]
            }
        };
        if dims.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidPattern(format!(
                "token dimensions must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

fn in_bar(dx: f64, dy: f64, length: f64, width: f64, angle: f64) -> bool {
    let (s, c) = angle.to_radians().sin_cos();
    // y points down, so counter-clockwise on screen flips the sine
    let u = dx * c - dy * s;
    let v = dx * s + dy * c;
    u.abs() <= length / 2.0 && v.abs() <= width / 2.0
}

fn in_ring(dx: f64, dy: f64, radius: f64, thickness: f64) -> bool {
    let r2 = dx * dx + dy * dy;
    let inner = radius - thickness;
    r2 <= radius * radius && r2 >= inner * inner
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Token {
    #[serde(flatten)]
    pub shape: Shape,
    pub color: [f64; 3],
}

impl Token {
    pub fn new(shape: Shape, color: [f64; 3]) -> Self {
        Self { shape, color }
    }
}

/// A grid of distractor tokens with one deviant (or one gap).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub kind: PatternKind,
    /// `(height, width)` in pixels.
    pub canvas: (usize, usize),
    /// `(rows, cols)`.
    pub grid: (usize, usize),
    /// `(row, col)` of the deviant, 0-based.
    pub target_cell: (usize, usize),
    pub background: [f64; 3],
    pub distractor: Token,
    /// The deviant token; `None` leaves the target cell empty.
    pub target: Option<Token>,
    /// Maximum per-token position jitter in pixels.
    pub jitter: usize,
    pub seed: u64,
}

impl PatternSpec {
    /// Default stimulus of each kind on a 120×120 canvas with a 5×5 grid.
    pub fn preset(kind: PatternKind) -> Self {
        let bar = |angle, color| {
            Token::new(
                Shape::Bar {
                    length: 16.0,
                    width: 4.0,
                    angle,
                },
                color,
            )
        };
        let (distractor, target) = match kind {
            PatternKind::OddColorBar => (bar(90.0, GREEN), Some(bar(90.0, RED))),
            PatternKind::OddOrientationBar => (bar(90.0, GREEN), Some(bar(0.0, GREEN))),
            PatternKind::OddShape => (
                Token::new(Shape::Square { side: 12.0 }, WHITE),
                Some(Token::new(Shape::Disc { radius: 7.0 }, WHITE)),
            ),
            PatternKind::AsymmetricItem => (
                Token::new(
                    Shape::Ring {
                        radius: 7.0,
                        thickness: 2.0,
                    },
                    WHITE,
                ),
                Some(Token::new(
                    Shape::RingWithTail {
                        radius: 7.0,
                        thickness: 2.0,
                    },
                    WHITE,
                )),
            ),
            PatternKind::MissingItem => (bar(90.0, WHITE), None),
            PatternKind::SizeSeries => (
                Token::new(Shape::Square { side: 4.0 }, GREEN),
                Some(Token::new(Shape::Square { side: 24.0 }, RED)),
            ),
            PatternKind::RepeatedDistractor => (
                Token::new(
                    Shape::Ell {
                        size: 12.0,
                        thickness: 3.0,
                    },
                    WHITE,
                ),
                Some(Token::new(
                    Shape::Plus {
                        size: 12.0,
                        thickness: 3.0,
                    },
                    WHITE,
                )),
            ),
        };
        let grid = if kind == PatternKind::RepeatedDistractor {
            (7, 7)
        } else {
            (5, 5)
        };
        Self {
            kind,
            canvas: (120, 120),
            grid,
            target_cell: (1, 3),
            background: BLACK,
            distractor,
            target,
            jitter: 0,
            seed: 0,
        }
    }

    /// Size-series stimulus: a red square of the given side among small
    /// green squares; distractors overlapping the target are dropped.
    pub fn size_series(side: usize) -> Self {
        Self {
            target: Some(Token::new(Shape::Square { side: side as f64 }, RED)),
            target_cell: (1, 1),
            ..Self::preset(PatternKind::SizeSeries)
        }
    }

    fn cell_size(&self) -> (f64, f64) {
        (
            self.canvas.0 as f64 / self.grid.0 as f64,
            self.canvas.1 as f64 / self.grid.1 as f64,
        )
    }

    fn cell_center(&self, r: usize, c: usize) -> (f64, f64) {
        let (ch, cw) = self.cell_size();
        ((r as f64 + 0.5) * ch, (c as f64 + 0.5) * cw)
    }

    pub fn validate(&self) -> Result<()> {
        let (h, w) = self.canvas;
        let (rows, cols) = self.grid;
        if h == 0 || w == 0 || rows == 0 || cols == 0 {
            return Err(Error::InvalidPattern("empty canvas or grid".into()));
        }
        if self.target_cell.0 >= rows || self.target_cell.1 >= cols {
            return Err(Error::InvalidPattern(format!(
                "target cell {:?} outside a {rows}x{cols} grid",
                self.target_cell
            )));
        }
        for color in [self.background, self.distractor.color]
            .into_iter()
            .chain(self.target.map(|t| t.color))
        {
            if color.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidPattern(format!("color {color:?} outside [0,1]")));
            }
        }
        self.distractor.shape.validate()?;
        let (ch, cw) = self.cell_size();
        let room = ch.min(cw) / 2.0 - self.jitter as f64;
        if self.distractor.shape.reach() > room {
            return Err(Error::InvalidPattern(format!(
                "distractor (reach {:.1} px) does not fit a {ch:.1}x{cw:.1} px cell with jitter {}",
                self.distractor.shape.reach(),
                self.jitter
            )));
        }
        match (self.kind, self.target) {
            (PatternKind::MissingItem, Some(_)) => {
                return Err(Error::InvalidPattern(
                    "missing-item pattern cannot have a target token".into(),
                ))
            }
            (PatternKind::MissingItem, None) => {}
            (_, None) => {
                return Err(Error::InvalidPattern(format!(
                    "{} pattern needs a target token",
                    self.kind
                )))
            }
            (kind, Some(target)) => {
                target.shape.validate()?;
                if target == self.distractor {
                    return Err(Error::InvalidPattern("target is identical to the distractors".into()));
                }
                if kind == PatternKind::SizeSeries {
                    let (cy, cx) = self.cell_center(self.target_cell.0, self.target_cell.1);
                    let r = target.shape.reach() / std::f64::consts::SQRT_2;
                    if cy - r < 0.0 || cx - r < 0.0 || cy + r > h as f64 || cx + r > w as f64 {
                        return Err(Error::InvalidPattern("size-series target leaves the canvas".into()));
                    }
                } else if target.shape.reach() > room {
                    return Err(Error::InvalidPattern(format!(
                        "target (reach {:.1} px) does not fit its cell",
                        target.shape.reach()
                    )));
                }
                if kind == PatternKind::OddOrientationBar {
                    match (self.distractor.shape, target.shape) {
                        (
                            Shape::Bar {
                                angle: a,
                                length: l1,
                                width: w1,
                            },
                            Shape::Bar {
                                angle: b,
                                length: l2,
                                width: w2,
                            },
                        ) => {
                            if (a - b).rem_euclid(180.0) == 0.0 {
                                return Err(Error::InvalidPattern(
                                    "odd-orientation target shares the distractor orientation".into(),
                                ));
                            }
                            if l1 != l2 || w1 != w2 || self.distractor.color != target.color {
                                return Err(Error::InvalidPattern(
                                    "odd-orientation target must differ from the distractors only in angle".into(),
                                ));
                            }
                        }
                        _ => return Err(Error::InvalidPattern("odd-orientation pattern needs bar tokens".into())),
                    }
                }
                if kind == PatternKind::OddColorBar && self.distractor.color == target.color {
                    return Err(Error::InvalidPattern(
                        "odd-color target shares the distractor color".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

struct Canvas {
    img: RgbImage,
}

impl Canvas {
    /// Paints `shape` at `(cy, cx)`; returns the painted bounding box as
    /// `(r0, r1, c0, c1)` with exclusive ends, or `None` if nothing was drawn.
    fn paint(&mut self, token: &Token, cy: f64, cx: f64) -> Option<(usize, usize, usize, usize)> {
        let (h, w) = self.img.dim();
        let reach = token.shape.reach().ceil() + 1.0;
        let r0 = (cy - reach).floor().max(0.0) as usize;
        let r1 = ((cy + reach).ceil() as usize).min(h);
        let c0 = (cx - reach).floor().max(0.0) as usize;
        let c1 = ((cx + reach).ceil() as usize).min(w);
        let mut bbox: Option<(usize, usize, usize, usize)> = None;
        for r in r0..r1 {
            for c in c0..c1 {
                if token.shape.contains(c as f64 + 0.5 - cx, r as f64 + 0.5 - cy) {
                    self.img.set(r, c, token.color);
                    bbox = Some(match bbox {
                        None => (r, r + 1, c, c + 1),
                        Some((a, b, d, e)) => (a.min(r), b.max(r + 1), d.min(c), e.max(c + 1)),
                    });
                }
            }
        }
        bbox
    }
}

fn box_mask(dim: (usize, usize), (r0, r1, c0, c1): (usize, usize, usize, usize)) -> Array2<bool> {
    Array2::from_shape_fn(dim, |(r, c)| (r0..r1).contains(&r) && (c0..c1).contains(&c))
}

/// Renders `spec`; the mask marks the deviant's painted bounding box, or the
/// whole empty cell for missing-item patterns.
pub fn make_pattern(spec: &PatternSpec) -> Result<(RgbImage, GroundTruth)> {
    spec.validate()?;
    let (h, w) = spec.canvas;
    let mut canvas = Canvas {
        img: RgbImage::filled(h, w, spec.background),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let j = spec.jitter as i64;
    let mut offset = || {
        if j == 0 {
            (0.0, 0.0)
        } else {
            (rng.random_range(-j..=j) as f64, rng.random_range(-j..=j) as f64)
        }
    };

    let (ch, cw) = spec.cell_size();
    // size-series targets may span several cells; keep distractors clear
    let exclusion = match (spec.kind, spec.target) {
        (PatternKind::SizeSeries, Some(t)) => {
            let (cy, cx) = spec.cell_center(spec.target_cell.0, spec.target_cell.1);
            let r = t.shape.reach() / std::f64::consts::SQRT_2 + 2.0;
            Some((cy - r, cy + r, cx - r, cx + r))
        }
        _ => None,
    };

    let mut target_box = None;
    for r in 0..spec.grid.0 {
        for c in 0..spec.grid.1 {
            let (dy, dx) = offset();
            let (cy, cx) = spec.cell_center(r, c);
            if (r, c) == spec.target_cell {
                match spec.target {
                    Some(t) => {
                        let (cy, cx) = if exclusion.is_some() {
                            (cy, cx)
                        } else {
                            (cy + dy, cx + dx)
                        };
                        target_box = canvas.paint(&t, cy, cx);
                    }
                    None => {
                        let r0 = (r as f64 * ch).round() as usize;
                        let c0 = (c as f64 * cw).round() as usize;
                        let r1 = (((r + 1) as f64 * ch).round() as usize).min(h);
                        let c1 = (((c + 1) as f64 * cw).round() as usize).min(w);
                        target_box = Some((r0, r1, c0, c1));
                    }
                }
                continue;
            }
            if let Some((y0, y1, x0, x1)) = exclusion {
                let reach = spec.distractor.shape.reach();
                if cy + dy + reach > y0 && cy + dy - reach < y1 && cx + dx + reach > x0 && cx + dx - reach < x1 {
                    continue;
                }
            }
            canvas.paint(&spec.distractor, cy + dy, cx + dx);
        }
    }
    let target_box = target_box.ok_or_else(|| Error::InvalidPattern("target token rendered no pixels".into()))?;
    let gt = GroundTruth::region(box_mask((h, w), target_box))?;
    Ok((canvas.img, gt))
}

/// The ten pop-out cases: color, color+orientation, orientation (two),
/// shape (two), asymmetry (two), missing item and repeated distractors.
pub fn popout_battery() -> Vec<(String, PatternSpec)> {
    use PatternKind::*;
    let bar = |angle, color| {
        Token::new(
            Shape::Bar {
                length: 16.0,
                width: 4.0,
                angle,
            },
            color,
        )
    };
    let mut cases = Vec::new();
    let mut push = |name: &str, spec: PatternSpec| cases.push((name.to_string(), spec));

    push("color", PatternSpec::preset(OddColorBar));
    push(
        "color-orientation",
        PatternSpec {
            target: Some(bar(45.0, RED)),
            target_cell: (3, 1),
            ..PatternSpec::preset(OddColorBar)
        },
    );
    push("orientation", PatternSpec::preset(OddOrientationBar));
    push(
        "orientation-oblique",
        PatternSpec {
            distractor: bar(45.0, WHITE),
            target: Some(bar(135.0, WHITE)),
            target_cell: (3, 2),
            ..PatternSpec::preset(OddOrientationBar)
        },
    );
    push("shape-disc", PatternSpec::preset(OddShape));
    push(
        "shape-plus",
        PatternSpec {
            distractor: Token::new(Shape::Disc { radius: 7.0 }, WHITE),
            target: Some(Token::new(
                Shape::Plus {
                    size: 16.0,
                    thickness: 4.0,
                },
                WHITE,
            )),
            target_cell: (2, 1),
            ..PatternSpec::preset(OddShape)
        },
    );
    push("asymmetric-tail", PatternSpec::preset(AsymmetricItem));
    push(
        "asymmetric-long-bar",
        PatternSpec {
            distractor: bar(90.0, WHITE),
            target: Some(Token::new(
                Shape::Bar {
                    length: 16.0,
                    width: 8.0,
                    angle: 90.0,
                },
                WHITE,
            )),
            target_cell: (3, 3),
            ..PatternSpec::preset(AsymmetricItem)
        },
    );
    push(
        "missing",
        PatternSpec {
            target_cell: (2, 3),
            ..PatternSpec::preset(MissingItem)
        },
    );
    push("repeated-ells", PatternSpec::preset(RepeatedDistractor));
    cases
}

/// Token sides of the size series.
pub const SIZE_SERIES_SIDES: [usize; 3] = [8, 24, 48];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Gaussian,
    SaltPepper,
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "salt-pepper" => Ok(NoiseKind::SaltPepper),
            _ => Err(Error::InvalidParameter(format!("unknown noise kind {s:?}"))),
        }
    }
}

/// Gaussian: per-channel additive `N(0, level²)`, clamped to [0, 1].
/// Salt-and-pepper: each pixel independently, with probability `level`,
/// becomes black or white with equal odds.
pub fn add_noise(img: &RgbImage, kind: NoiseKind, level: f64, seed: u64) -> Result<RgbImage> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be >= 0, got {level}"
        )));
    }
    if kind == NoiseKind::SaltPepper && level > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "salt-and-pepper fraction must be <= 1, got {level}"
        )));
    }
    let mut out = img.clone();
    if level == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (h, w) = img.dim();
    match kind {
        NoiseKind::Gaussian => {
            let normal = Normal::new(0.0, level).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            for plane in [&mut out.r, &mut out.g, &mut out.b] {
                plane.mapv_inplace(|v| (v + normal.sample(&mut rng)).clamp(0.0, 1.0));
            }
        }
        NoiseKind::SaltPepper => {
            for r in 0..h {
                for c in 0..w {
                    if rng.random::<f64>() < level {
                        let v = if rng.random::<bool>() { 1.0 } else { 0.0 };
                        out.set(r, c, [v, v, v]);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Pop-out statistics of a map against a target mask (resized to the map by
/// nearest neighbour).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopoutScore {
    pub argmax_inside: bool,
    pub mean_on: f64,
    pub mean_off: f64,
}

impl PopoutScore {
    pub fn ratio(&self) -> f64 {
        self.mean_on / self.mean_off
    }

    /// Argmax on the target and on-target mean above twice the off-target
    /// mean.
    pub fn pops_out(&self) -> bool {
        self.argmax_inside && self.mean_on > 2.0 * self.mean_off
    }
}

pub fn popout_score(map: &Array2<f64>, mask: &Array2<bool>) -> PopoutScore {
    let (h, w) = map.dim();
    let mask = if mask.dim() == (h, w) {
        mask.clone()
    } else {
        resize_nearest(mask, h, w)
    };
    let (mut on, mut n_on, mut off, mut n_off) = (0.0, 0usize, 0.0, 0usize);
    for (&v, &m) in map.iter().zip(mask.iter()) {
        if m {
            on += v;
            n_on += 1;
        } else {
            off += v;
            n_off += 1;
        }
    }
    PopoutScore {
        argmax_inside: mask[argmax(map)],
        mean_on: on / n_on.max(1) as f64,
        mean_off: off / n_off.max(1) as f64,
    }
}

/// Binary images with identical histograms and growing spatial disorder:
/// a centered white square whose pixels are progressively exchanged with
/// random black pixels. `fractions[i]` is the share of white pixels moved
/// in image `i`; the moved sets are nested.
pub fn chaos_sequence(side: usize, fractions: &[f64], seed: u64) -> Result<Vec<Array2<f64>>> {
    if side < 4 {
        return Err(Error::InvalidParameter(format!(
            "chaos image side must be >= 4, got {side}"
        )));
    }
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::InvalidParameter("chaos fractions must lie in [0, 1]".into()));
    }
    let q = side / 4;
    let base = Array2::from_shape_fn((side, side), |(r, c)| {
        if (q..side - q).contains(&r) && (q..side - q).contains(&c) {
            1.0
        } else {
            0.0
        }
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut white: Vec<usize> = (0..side * side)
        .filter(|&i| base.as_slice().unwrap()[i] == 1.0)
        .collect();
    let mut black: Vec<usize> = (0..side * side)
        .filter(|&i| base.as_slice().unwrap()[i] == 0.0)
        .collect();
    white.shuffle(&mut rng);
    black.shuffle(&mut rng);
    let moves = white.len().min(black.len());
    Ok(fractions
        .iter()
        .map(|&f| {
            let n = (f * moves as f64).round() as usize;
            let mut img = base.clone();
            let data = img.as_slice_mut().unwrap();
            for i in 0..n {
                data[white[i]] = 0.0;
                data[black[i]] = 1.0;
            }
            img
        })
        .collect())
}

/// Default seven-step disorder schedule.
pub const CHAOS_FRACTIONS: [f64; 7] = [0.0, 0.02, 0.05, 0.1, 0.2, 0.3, 0.45];

/// Number of images in the natural-statistics corpus.
pub const NATURAL_CORPUS_SIZE: usize = 20;

/// Parameters of the occlusion ("dead leaves") model behind the
/// natural-statistics corpus. Disc radii follow `p(r) ∝ r^-exponent` on
/// `[min_radius, max_radius]`; with these defaults the radially averaged
/// amplitude spectrum falls off as roughly `1/f^1.3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafModel {
    pub min_radius: f64,
    pub max_radius: f64,
    pub exponent: f64,
    /// Per-channel color spread around each leaf's gray level.
    pub chroma: f64,
}

impl Default for LeafModel {
    fn default() -> Self {
        Self {
            min_radius: 4.0,
            max_radius: 80.0,
            exponent: 2.0,
            chroma: 0.2,
        }
    }
}

/// Occluding discs drawn front to back until the canvas is covered; each
/// disc has a uniform color. Edges between leaves give the image aligned
/// phase structure, unlike random-phase noise with the same spectrum.
pub fn natural_image(height: usize, width: usize, model: &LeafModel, seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = RgbImage::filled(height, width, [0.5; 3]);
    let mut covered = Array2::from_elem((height, width), false);
    let mut left = height * width;
    let a = 1.0 - model.exponent;
    let (lo, hi) = (model.min_radius.powf(a), model.max_radius.powf(a));
    for _ in 0..100_000 {
        if left == 0 {
            break;
        }
        let u: f64 = rng.random();
        let radius = (lo + u * (hi - lo)).powf(1.0 / a);
        let cy = rng.random::<f64>() * height as f64;
        let cx = rng.random::<f64>() * width as f64;
        let gray: f64 = rng.random();
        let mut color = [0.0; 3];
        for ch in &mut color {
            *ch = (gray + model.chroma * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0);
        }
        let r0 = (cy - radius).floor().max(0.0) as usize;
        let r1 = ((cy + radius).ceil() as usize).min(height);
        let c0 = (cx - radius).floor().max(0.0) as usize;
        let c1 = ((cx + radius).ceil() as usize).min(width);
        for y in r0..r1 {
            for x in c0..c1 {
                let (dy, dx) = (y as f64 + 0.5 - cy, x as f64 + 0.5 - cx);
                if dx * dx + dy * dy <= radius * radius && !covered[[y, x]] {
                    covered[[y, x]] = true;
                    left -= 1;
                    img.set(y, x, color);
                }
            }
        }
    }
    img
}

/// The 20-image natural-statistics corpus at 128×128 (seeds 0..20).
pub fn natural_corpus() -> Vec<RgbImage> {
    (0..NATURAL_CORPUS_SIZE as u64)
        .map(|s| natural_image(128, 128, &LeafModel::default(), s))
        .collect()
}

/// Least-squares slope of log radial mean amplitude against log frequency,
/// over radii 2..min(H,W)/2.
pub fn amplitude_slope(plane: &Array2<f64>) -> f64 {
    let (h, w) = plane.dim();
    let mut spec = to_complex(plane);
    dft2_in_place(&mut spec, Direction::Forward);
    let top = h.min(w) / 2;
    let mut bins = vec![(0.0, 0usize); top];
    for ((u, v), z) in spec.indexed_iter() {
        let fu = u.min(h - u) as f64 * top as f64 * 2.0 / h as f64;
        let fv = v.min(w - v) as f64 * top as f64 * 2.0 / w as f64;
        let r = (fu * fu + fv * fv).sqrt().round() as usize;
        if (2..top).contains(&r) {
            bins[r].0 += z.norm();
            bins[r].1 += 1;
        }
    }
    let pts: Vec<(f64, f64)> = bins
        .iter()
        .enumerate()
        .filter(|(_, b)| b.1 > 0 && b.0 > 0.0)
        .map(|(r, b)| ((r as f64).ln(), (b.0 / b.1 as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    num / den
}
