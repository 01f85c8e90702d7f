//! Saliency detectors.
//!
//! Every detector takes an [`RgbImage`], resizes it to the model's working
//! resolution and returns a nonnegative [`SaliencyMap`] at that resolution.

mod baselines;
mod hft;

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use baselines::{
    gs_raw, gs_saliency, noise_amplitude_raw, noise_amplitude_saliency, pft_raw, pft_saliency, sr_raw, sr_saliency,
    GS_RESOLUTION, SPECTRAL_RESOLUTION,
};
pub use hft::{
    build_hypercomplex, hft_analyze, hft_saliency, pqft_raw, pqft_saliency, reconstruct_at_scale, saliency_at_scale,
    HftAnalysis, HftResult,
};

use crate::error::{Error, Result};
use crate::evaluation::GroundTruth;
use crate::image::RgbImage;
use crate::quaternion::PureUnitAxis;
use crate::scale_space::{SmoothingDomain, DEFAULT_T0};
use crate::selection::{SelectionCriterion, SelectionMode, DEFAULT_BINS, DEFAULT_ENTROPY_FACTOR};

/// Post-smoothing σ as a fraction of the map width.
pub const DEFAULT_POST_SMOOTHING: f64 = 0.05;

/// Where a map came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    /// Scale index for spectrum scale-space maps.
    pub scale: Option<usize>,
    /// Post-smoothing σ in pixels.
    pub post_sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    pub values: Array2<f64>,
    pub provenance: Provenance,
}

impl SaliencyMap {
    pub fn new(values: Array2<f64>, provenance: Provenance) -> Self {
        Self { values, provenance }
    }

    pub fn dim(&self) -> (usize, usize) {
        self.values.dim()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Weights of the scalar, i, j and k parts of the quaternion image.
    pub weights: [f64; 4],
    /// Working resolution `(height, width)` for the hypercomplex models.
    pub resolution: (usize, usize),
    pub post_smoothing: f64,
    pub axis: PureUnitAxis,
    pub domain: SmoothingDomain,
    pub t0: f64,
    pub selection: SelectionMode,
    /// Entropy smoothing scale as a fraction of the width.
    pub entropy_factor: f64,
    pub bins: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            weights: [0.0, 0.5, 0.25, 0.25],
            resolution: (128, 128),
            post_smoothing: DEFAULT_POST_SMOOTHING,
            axis: PureUnitAxis::luminance(),
            domain: SmoothingDomain::LogAmplitude,
            t0: DEFAULT_T0,
            selection: SelectionMode::Full,
            entropy_factor: DEFAULT_ENTROPY_FACTOR,
            bins: DEFAULT_BINS,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "weights must be >= 0, got {:?}",
                self.weights
            )));
        }
        if self.resolution.0 < 8 || self.resolution.1 < 8 {
            return Err(Error::InvalidParameter(format!(
                "working resolution must be at least 8x8, got {}x{}",
                self.resolution.1, self.resolution.0
            )));
        }
        for (name, v) in [
            ("post-smoothing factor", self.post_smoothing),
            ("entropy factor", self.entropy_factor),
            ("t0", self.t0),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        self.criterion().validate()
    }

    pub fn criterion(&self) -> SelectionCriterion {
        SelectionCriterion {
            mode: self.selection,
            entropy_factor: self.entropy_factor,
            bins: self.bins,
        }
    }

    pub fn post_sigma(&self, width: usize) -> f64 {
        self.post_smoothing * width as f64
    }
}

/// Models reachable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Hft,
    HftE,
    HftStar,
    Sr,
    Pft,
    Pqft,
    Gs,
    NoiseDiagnostic,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::Hft,
        ModelKind::HftE,
        ModelKind::HftStar,
        ModelKind::Sr,
        ModelKind::Pft,
        ModelKind::Pqft,
        ModelKind::Gs,
        ModelKind::NoiseDiagnostic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Hft => "hft",
            ModelKind::HftE => "hft-e",
            ModelKind::HftStar => "hft-star",
            ModelKind::Sr => "sr",
            ModelKind::Pft => "pft",
            ModelKind::Pqft => "pqft",
            ModelKind::Gs => "gs",
            ModelKind::NoiseDiagnostic => "noise-diagnostic",
        }
    }

    pub fn needs_ground_truth(&self) -> bool {
        matches!(self, ModelKind::HftStar)
    }

    fn hft_mode(&self) -> Option<SelectionMode> {
        match self {
            ModelKind::Hft => Some(SelectionMode::Full),
            ModelKind::HftE => Some(SelectionMode::EntropyOnly),
            ModelKind::HftStar => Some(SelectionMode::Oracle),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model {s:?}")))
    }
}

/// Inputs shared by every model invocation.
#[derive(Debug, Clone, Copy)]
pub struct RunInputs<'a> {
    pub cfg: &'a ModelConfig,
    pub gt: Option<&'a GroundTruth>,
    pub seed: u64,
}

/// Runs `kind` and returns the post-smoothed map.
pub fn run_model(kind: ModelKind, img: &RgbImage, inputs: RunInputs<'_>) -> Result<SaliencyMap> {
    let cfg = inputs.cfg;
    if let Some(mode) = kind.hft_mode() {
        let cfg = ModelConfig {
            selection: mode,
            ..cfg.clone()
        };
        let mut result = hft_saliency_with_gt(img, &cfg, inputs.gt)?;
        result.map.provenance.model = kind.name().to_string();
        return Ok(result.map);
    }
    match kind {
        ModelKind::Sr => sr_saliency(&img.intensity(), cfg.post_smoothing),
        ModelKind::Pft => pft_saliency(&img.intensity(), cfg.post_smoothing),
        ModelKind::Pqft => pqft_saliency(img, cfg),
        ModelKind::Gs => gs_saliency(&img.intensity(), cfg.post_smoothing),
        ModelKind::NoiseDiagnostic => noise_amplitude_saliency(&img.intensity(), inputs.seed, cfg.post_smoothing),
        _ => unreachable!("hft variants handled above"),
    }
}

/// Runs `kind` without post-smoothing (for calibration sweeps). HFT
/// variants still select their scale on smoothed candidates.
pub fn run_model_raw(kind: ModelKind, img: &RgbImage, inputs: RunInputs<'_>) -> Result<Array2<f64>> {
    let cfg = inputs.cfg;
    if let Some(mode) = kind.hft_mode() {
        let cfg = ModelConfig {
            selection: mode,
            ..cfg.clone()
        };
        let result = hft_saliency_with_gt(img, &cfg, inputs.gt)?;
        return Ok(result.raw_maps[result.k - 1].clone());
    }
    match kind {
        ModelKind::Sr => sr_raw(&img.intensity()),
        ModelKind::Pft => pft_raw(&img.intensity()),
        ModelKind::Pqft => pqft_raw(img, cfg),
        ModelKind::Gs => gs_raw(&img.intensity()),
        ModelKind::NoiseDiagnostic => noise_amplitude_raw(&img.intensity(), inputs.seed),
        _ => unreachable!("hft variants handled above"),
    }
}

pub use hft::hft_saliency_with_gt;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_names_roundtrip() {
        for m in ModelKind::ALL {
            assert_eq!(m.name().parse::<ModelKind>().unwrap(), m);
        }
        assert!("itti".parse::<ModelKind>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::default().validate().is_ok());
        let bad = ModelConfig {
            weights: [0.0, -0.1, 0.0, 0.0],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ModelConfig {
            resolution: (4, 128),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ModelConfig {
            post_smoothing: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
