//! Frequency-domain visual saliency.
//!
//! The main model builds a quaternion image from intensity and two
//! color-opponent channels, smooths the amplitude of its hypercomplex
//! Fourier spectrum with a family of Gaussians, and picks the per-scale
//! reconstruction with the lowest center-weighted entropy. Baselines,
//! synthetic stimuli and evaluation metrics live alongside.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evaluation;
pub mod image;
pub mod io;
pub mod models;
pub mod patterns;
pub mod plane;
pub mod quaternion;
pub mod report;
pub mod scale_space;
pub mod selection;
pub mod spectral;

pub use error::{Error, Result};
pub use image::{rgb_to_features, FeatureMaps, RgbImage};
pub use models::{run_model, run_model_raw, ModelConfig, ModelKind, RunInputs, SaliencyMap};
pub use quaternion::{PureUnitAxis, Quaternion, QuaternionImage};
