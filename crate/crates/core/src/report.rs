//! Deterministic reports.
//!
//! Every floating-point value is written with nine significant digits and
//! fields keep their declaration order, so an identical experiment yields
//! byte-identical JSON and CSV.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluation::{calibrate_maps, score_map, CalibrationOptions, CalibrationReport, GroundTruth, Scores};
use crate::image::RgbImage;
use crate::models::{run_model_raw, ModelConfig, ModelKind, RunInputs};
use crate::plane::gaussian_blur;
use crate::selection::CriterionRow;

pub const SIGNIFICANT_DIGITS: i32 = 9;

/// Fixed nine-significant-digit decimal: `0.5` → `0.500000000`,
/// `1234.5` → `1234.50000`. Non-finite values print as `nan`, `inf`,
/// `-inf`.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.*}", (SIGNIFICANT_DIGITS - 1) as usize, 0.0);
    }
    let digits = |v: f64| (SIGNIFICANT_DIGITS - 1 - v.abs().log10().floor() as i32).max(0) as usize;
    let mut decimals = digits(x);
    let s = format!("{x:.decimals$}");
    // rounding may carry into a new leading digit (9.9999999996 → 10.0…)
    let rounded: f64 = s.parse().unwrap_or(x);
    if rounded != 0.0 && digits(rounded) < decimals {
        decimals = digits(rounded);
        return format!("{x:.decimals$}");
    }
    s
}

/// Rewrites every non-integer number in `value` with [`format_sig`];
/// non-finite values become `null`.
pub fn canonicalize(value: Value) -> Value {
    match value {
        Value::Number(n) => {
            if n.is_u64() || n.is_i64() {
                return Value::Number(n);
            }
            match n.as_f64() {
                Some(x) if x.is_finite() => {
                    Value::Number(Number::from_str(&format_sig(x)).expect("formatted decimal is valid JSON"))
                }
                _ => Value::Null,
            }
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))?;
    let mut s = serde_json::to_string_pretty(&canonicalize(v))
        .map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    crate::io::write_text(path, &to_json_string(value)?)
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

/// `k,entropy,lambda,score` rows; an empty trace gives the header alone.
pub fn criterion_csv(trace: &[CriterionRow]) -> String {
    let mut out = String::from("k,entropy,lambda,score\n");
    for row in trace {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.k,
            format_sig(row.entropy),
            format_sig(row.lambda),
            format_sig(row.score)
        );
    }
    out
}

/// Mean scores of one model on one category (or overall).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    /// Category tag; `None` for the overall row.
    pub category: Option<u8>,
    pub images: usize,
    pub auc: f64,
    pub podsc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    pub calibration: CalibrationReport,
    /// Scores at the calibrated smoothing, per category in ascending order.
    pub categories: Vec<TableRow>,
    pub overall: TableRow,
    /// Overall AUC after the best center bias, when calibrated.
    pub biased_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub border_cut: usize,
    pub models: Vec<ModelReport>,
}

/// Groups per-image scores by category and appends the overall row.
pub fn tabulate(scores: &[Scores], categories: &[u8]) -> (Vec<TableRow>, TableRow) {
    let mut tags: Vec<u8> = categories.to_vec();
    tags.sort_unstable();
    tags.dedup();
    let row = |category: Option<u8>, picked: Vec<Scores>| {
        let mean = crate::evaluation::mean_scores(&picked);
        TableRow {
            category,
            images: picked.len(),
            auc: mean.auc,
            podsc: mean.podsc,
        }
    };
    let rows = tags
        .iter()
        .map(|&t| {
            let picked = scores
                .iter()
                .zip(categories)
                .filter(|(_, &c)| c == t)
                .map(|(s, _)| *s)
                .collect();
            row(Some(t), picked)
        })
        .collect();
    (rows, row(None, scores.to_vec()))
}

/// One evaluation item: image, ground truth and category tag.
pub struct EvalItem {
    pub image: RgbImage,
    pub gt: GroundTruth,
    pub category: u8,
}

/// Calibrates every model on `items` and tabulates its scores at the
/// calibrated smoothing. Per-image work runs in parallel; all reductions
/// follow item order.
pub fn evaluate_models(
    kinds: &[ModelKind],
    items: &[EvalItem],
    cfg: &ModelConfig,
    opts: &CalibrationOptions,
    seed: u64,
) -> Result<EvaluationReport> {
    if items.is_empty() {
        return Err(Error::InvalidParameter("nothing to evaluate".into()));
    }
    let gts: Vec<GroundTruth> = items.iter().map(|i| i.gt.clone()).collect();
    let categories: Vec<u8> = items.iter().map(|i| i.category).collect();
    let mut models = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let raw = items
            .par_iter()
            .map(|item| {
                run_model_raw(
                    kind,
                    &item.image,
                    RunInputs {
                        cfg,
                        gt: Some(&item.gt),
                        seed,
                    },
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let calibration = calibrate_maps(&raw, &gts, opts)?;
        let factor = calibration.best_smoothing.sigma_factor;
        let scores = raw
            .par_iter()
            .zip(gts.par_iter())
            .map(|(m, gt)| score_map(&gaussian_blur(m, factor * m.ncols() as f64), gt, opts.border_cut))
            .collect::<Result<Vec<_>>>()?;
        let (rows, overall) = tabulate(&scores, &categories);
        models.push(ModelReport {
            model: kind.name().to_string(),
            biased_auc: calibration.best_center_bias.map(|b| b.auc),
            calibration,
            categories: rows,
            overall,
        });
    }
    Ok(EvaluationReport {
        border_cut: opts.border_cut,
        models,
    })
}

/// `model,category,images,auc,podsc`; the overall row has category `all`.
pub fn evaluation_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("model,category,images,auc,podsc\n");
    for m in &report.models {
        for row in m.categories.iter().chain(std::iter::once(&m.overall)) {
            let cat = row.category.map(|c| c.to_string()).unwrap_or_else(|| "all".into());
            let _ = writeln!(
                out,
                "{},{cat},{},{},{}",
                m.model,
                row.images,
                format_sig(row.auc),
                opt(row.podsc)
            );
        }
    }
    out
}

/// `model,sigma_factor,auc,podsc` rows of every smoothing sweep.
pub fn smoothing_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("model,sigma_factor,auc,podsc\n");
    for m in &report.models {
        for p in &m.calibration.smoothing {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                m.model,
                format_sig(p.sigma_factor),
                format_sig(p.auc),
                opt(p.podsc)
            );
        }
    }
    out
}
