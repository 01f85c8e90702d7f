//! Batch front end: saliency maps, scale-space dumps, calibrated
//! evaluations, stimulus generation and timing.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::{s, Array2};
use rayon::prelude::*;
use serde::Serialize;

use hft_saliency::evaluation::{load_manifest, parse_fixations, CalibrationOptions, GroundTruth, GtKind};
use hft_saliency::io::{load_image, load_mask, save_image, save_map, save_mask, save_raw_map, write_text};
use hft_saliency::models::{hft_analyze, hft_saliency_with_gt, run_model, run_model_raw, HftResult};
use hft_saliency::patterns::{
    add_noise, make_pattern, natural_corpus, popout_battery, NoiseKind, PatternKind, PatternSpec, SIZE_SERIES_SIDES,
};
use hft_saliency::plane::normalize_min_max;
use hft_saliency::quaternion::PureUnitAxis;
use hft_saliency::report::{criterion_csv, evaluate_models, evaluation_csv, smoothing_csv, write_json, EvalItem};
use hft_saliency::scale_space::SmoothingDomain;
use hft_saliency::selection::SelectionMode;
use hft_saliency::{Error, ModelConfig, ModelKind, Result, RgbImage, RunInputs, SaliencyMap};

#[derive(Parser)]
#[command(name = "hft-saliency", version, about = "Frequency-domain visual saliency toolkit")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "HFT_SALIENCY_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute saliency maps for images or directories of images.
    Run(RunArgs),
    /// Dump the amplitude scale-space, per-scale maps and criterion trace.
    Scalespace(ScalespaceArgs),
    /// Calibrate and score models against a ground-truth manifest.
    Eval(EvalArgs),
    /// Generate synthetic stimuli.
    #[command(subcommand)]
    Patterns(PatternsCommand),
    /// Time models on synthetic images.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct OutputArg {
    /// Output directory.
    #[arg(short, long, env = "HFT_SALIENCY_OUTPUT", default_value = "out")]
    output: PathBuf,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Working resolution as HxW.
    #[arg(long, value_parser = parse_resolution)]
    resolution: Option<(usize, usize)>,
    /// Post-smoothing σ as a fraction of the map width.
    #[arg(long)]
    post_smoothing: Option<f64>,
    /// Channel weights w1,w2,w3,w4 (scalar, intensity, red-green, blue-yellow).
    #[arg(long, value_parser = parse_weights)]
    weights: Option<[f64; 4]>,
    /// Transform axis as b,c,d (normalized).
    #[arg(long, value_parser = parse_axis)]
    axis: Option<PureUnitAxis>,
    /// Smooth the amplitude or the log-amplitude spectrum.
    #[arg(long, value_enum)]
    domain: Option<DomainArg>,
    /// Base kernel scale.
    #[arg(long)]
    t0: Option<f64>,
    /// Entropy smoothing σ as a fraction of the map width.
    #[arg(long)]
    entropy_factor: Option<f64>,
    /// Histogram bins of the entropy criterion.
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Amplitude,
    LogAmplitude,
}

impl ConfigArgs {
    fn build(&self) -> Result<ModelConfig> {
        let mut cfg = ModelConfig::default();
        if let Some(r) = self.resolution {
            cfg.resolution = r;
        }
        if let Some(v) = self.post_smoothing {
            cfg.post_smoothing = v;
        }
        if let Some(w) = self.weights {
            cfg.weights = w;
        }
        if let Some(a) = self.axis {
            cfg.axis = a;
        }
        if let Some(d) = self.domain {
            cfg.domain = match d {
                DomainArg::Amplitude => SmoothingDomain::Amplitude,
                DomainArg::LogAmplitude => SmoothingDomain::LogAmplitude,
            };
        }
        if let Some(v) = self.t0 {
            cfg.t0 = v;
        }
        if let Some(v) = self.entropy_factor {
            cfg.entropy_factor = v;
        }
        if let Some(v) = self.bins {
            cfg.bins = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_list<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    v.try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn parse_weights(s: &str) -> std::result::Result<[f64; 4], String> {
    parse_list::<4>(s)
}

fn parse_axis(s: &str) -> std::result::Result<PureUnitAxis, String> {
    let [b, c, d] = parse_list::<3>(s)?;
    PureUnitAxis::from_direction(b, c, d).map_err(|e| e.to_string())
}

fn parse_resolution(s: &str) -> std::result::Result<(usize, usize), String> {
    let (h, w) = s.split_once(['x', 'X']).ok_or("expected HxW")?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(h)?, p(w)?))
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct RunArgs {
    /// Input images (PPM, PGM or PNG) or directories.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(short, long, default_value = "hft", value_parser = parse_model)]
    model: ModelKind,
    /// Ground-truth mask, required by hft-star.
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Also write every per-scale map, a montage and the criterion trace.
    #[arg(long)]
    dump_scales: bool,
    /// Write the criterion trace as CSV.
    #[arg(long)]
    criterion_csv: bool,
    /// Write the map before post-smoothing as raw little-endian f64.
    #[arg(long)]
    raw: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArg,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct ScalespaceArgs {
    input: PathBuf,
    #[command(flatten)]
    out: OutputArg,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// JSON array of {image, gt, gt_kind, category}.
    #[arg(long)]
    manifest: PathBuf,
    /// Width of the frame excluded from every score, in pixels.
    #[arg(long)]
    border_cut: usize,
    /// Comma-separated model names.
    #[arg(long, value_delimiter = ',', value_parser = parse_model, default_value = "hft,hft-e,hft-star,sr,pft,pqft,gs")]
    models: Vec<ModelKind>,
    /// Score at the configured post-smoothing only instead of sweeping.
    #[arg(long)]
    no_smoothing_sweep: bool,
    /// Skip the center-bias grid.
    #[arg(long)]
    no_center_bias: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArg,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Subcommand)]
enum PatternsCommand {
    /// Write stimuli, masks and an evaluation manifest.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PatternSet {
    /// The ten pop-out cases.
    Battery,
    /// Odd-size squares of increasing side.
    SizeSeries,
    /// One preset per pattern kind.
    Presets,
    /// Natural-statistics images (no ground truth).
    Corpus,
    All,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "all")]
    set: PatternSet,
    /// Only this pattern kind (preset geometry).
    #[arg(long, conflicts_with = "set")]
    kind: Option<String>,
    /// Position jitter in pixels (default: each spec's own).
    #[arg(long)]
    jitter: Option<usize>,
    #[arg(long, value_enum)]
    noise: Option<NoiseArg>,
    #[arg(long, default_value_t = 0.05)]
    noise_level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Gaussian,
    SaltPepper,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(short, long, default_value = "hft", value_parser = parse_model)]
    model: ModelKind,
    /// Side of the synthetic input images.
    #[arg(long, default_value_t = 256)]
    size: usize,
    #[arg(long, default_value_t = 10)]
    images: usize,
    #[command(flatten)]
    config: ConfigArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Scalespace(a) => cmd_scalespace(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Patterns(PatternsCommand::Generate(a)) => cmd_generate(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn is_image(path: &Path) -> bool {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    matches!(ext.as_str(), "ppm" | "pgm" | "pnm" | "png")
}

/// Expands directories into their image files, sorted by name.
fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::Io {
                    path: p.clone(),
                    source: e,
                })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && is_image(f))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("image").to_string()
}

#[derive(Serialize)]
struct Sidecar<'a> {
    input: String,
    model: &'a str,
    input_size: [usize; 2],
    map_size: [usize; 2],
    /// Selected scale for the spectrum scale-space models.
    scale: Option<usize>,
    scale_count: Option<usize>,
    post_sigma: f64,
    seed: u64,
    config: &'a ModelConfig,
}

/// Side-by-side tiles, each normalized on its own.
fn montage(maps: &[SaliencyMap]) -> Array2<f64> {
    let (h, w) = maps[0].dim();
    let mut out = Array2::zeros((h, w * maps.len()));
    for (i, m) in maps.iter().enumerate() {
        out.slice_mut(s![.., i * w..(i + 1) * w])
            .assign(&normalize_min_max(&m.values));
    }
    out
}

fn run_one(path: &Path, a: &RunArgs, cfg: &ModelConfig, gt: Option<&GroundTruth>) -> Result<()> {
    let img = load_image(path)?;
    let name = format!("{}_{}", stem(path), a.model);
    let dir = &a.out.output;
    let inputs = RunInputs { cfg, gt, seed: a.seed };
    let hft_mode = match a.model {
        ModelKind::Hft => Some(SelectionMode::Full),
        ModelKind::HftE => Some(SelectionMode::EntropyOnly),
        ModelKind::HftStar => Some(SelectionMode::Oracle),
        _ => None,
    };
    let (map, raw, result): (SaliencyMap, Option<Array2<f64>>, Option<HftResult>) = match hft_mode {
        Some(mode) => {
            let cfg = ModelConfig {
                selection: mode,
                ..cfg.clone()
            };
            let mut res = hft_saliency_with_gt(&img, &cfg, gt)?;
            res.map.provenance.model = a.model.name().to_string();
            let raw = res.raw_maps[res.k - 1].clone();
            (res.map.clone(), Some(raw), Some(res))
        }
        None => {
            let map = run_model(a.model, &img, inputs)?;
            let raw = if a.raw {
                Some(run_model_raw(a.model, &img, inputs)?)
            } else {
                None
            };
            (map, raw, None)
        }
    };
    if (a.dump_scales || a.criterion_csv) && result.is_none() {
        return Err(Error::InvalidParameter(format!(
            "{} has no scale-space; --dump-scales and --criterion-csv need hft, hft-e or hft-star",
            a.model
        )));
    }
    save_map(&dir.join(format!("{name}.png")), &map.values, false)?;
    let sidecar = Sidecar {
        input: path.display().to_string(),
        model: a.model.name(),
        input_size: [img.height(), img.width()],
        map_size: [map.dim().0, map.dim().1],
        scale: result.as_ref().map(|r| r.k),
        scale_count: result.as_ref().map(|r| r.maps.len()),
        post_sigma: map.provenance.post_sigma,
        seed: a.seed,
        config: cfg,
    };
    write_json(&dir.join(format!("{name}.provenance.json")), &sidecar)?;
    if a.raw {
        let raw = raw.expect("raw map computed");
        save_raw_map(&dir.join(format!("{name}.raw")), &raw, &map.provenance)?;
    }
    if let Some(res) = &result {
        if a.criterion_csv || a.dump_scales {
            write_text(&dir.join(format!("{name}.criterion.csv")), &criterion_csv(&res.trace))?;
        }
        if a.dump_scales {
            for m in &res.maps {
                let k = m.provenance.scale.unwrap_or(0);
                save_map(&dir.join(format!("{name}.scale-{k}.png")), &m.values, false)?;
            }
            save_map(&dir.join(format!("{name}.scales.png")), &montage(&res.maps), false)?;
        }
    }
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let cfg = a.config.build()?;
    let files = collect_inputs(&a.inputs)?;
    if files.is_empty() {
        return Err(Error::InvalidParameter("no input images".into()));
    }
    let gt = a.gt.as_deref().map(load_mask).transpose()?;
    if a.model.needs_ground_truth() && gt.is_none() {
        return Err(Error::MissingGroundTruth);
    }
    let outcomes: Vec<Result<()>> = files.par_iter().map(|f| run_one(f, &a, &cfg, gt.as_ref())).collect();
    let mut failed = 0;
    for (f, r) in files.iter().zip(&outcomes) {
        if let Err(e) = r {
            failed += 1;
            eprintln!("{}: {e}", f.display());
        }
    }
    eprintln!("{} of {} images processed", files.len() - failed, files.len());
    if failed == files.len() {
        return Err(Error::InvalidParameter("every input failed".into()));
    }
    Ok(())
}

/// Moves the zero frequency to the center for display.
fn fftshift(plane: &Array2<f64>) -> Array2<f64> {
    let (h, w) = plane.dim();
    Array2::from_shape_fn((h, w), |(r, c)| plane[[(r + h - h / 2) % h, (c + w - w / 2) % w]])
}

fn cmd_scalespace(a: ScalespaceArgs) -> Result<()> {
    let cfg = a.config.build()?;
    let img = load_image(&a.input)?;
    let name = stem(&a.input);
    let dir = &a.out.output;
    let analysis = hft_analyze(&img, &cfg)?;
    for k in 1..=analysis.scale_space.len() {
        let log_amp = analysis.scale_space.amplitude_layer(k).mapv(|v| (v + 1e-12).ln());
        save_map(
            &dir.join(format!("{name}.spectrum-{k}.png")),
            &fftshift(&log_amp),
            false,
        )?;
    }
    let res = hft_saliency_with_gt(&img, &cfg, None)?;
    for m in &res.maps {
        let k = m.provenance.scale.unwrap_or(0);
        save_map(&dir.join(format!("{name}.scale-{k}.png")), &m.values, false)?;
    }
    save_map(&dir.join(format!("{name}.scales.png")), &montage(&res.maps), false)?;
    write_text(&dir.join(format!("{name}.criterion.csv")), &criterion_csv(&res.trace))?;
    eprintln!("{} scales, selected k = {}", res.maps.len(), res.k);
    Ok(())
}

fn load_item(image: &Path, gt: &Path, kind: GtKind, category: u8) -> Result<EvalItem> {
    let image_data = load_image(image)?;
    let gt = match kind {
        GtKind::Mask => load_mask(gt)?,
        GtKind::Fixations => {
            let text = std::fs::read_to_string(gt).map_err(|e| Error::Io {
                path: gt.to_path_buf(),
                source: e,
            })?;
            parse_fixations(&text, image_data.dim())?
        }
    };
    if gt.dim() != image_data.dim() {
        return Err(Error::DimensionMismatch {
            expected: image_data.dim(),
            actual: gt.dim(),
        });
    }
    Ok(EvalItem {
        image: image_data,
        gt,
        category,
    })
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let cfg = a.config.build()?;
    let entries = load_manifest(&a.manifest)?;
    let loaded: Vec<Result<EvalItem>> = entries
        .par_iter()
        .map(|e| load_item(&e.image, &e.gt, e.gt_kind, e.category))
        .collect();
    let mut items = Vec::with_capacity(loaded.len());
    for (e, r) in entries.iter().zip(loaded) {
        match r {
            Ok(item) => items.push(item),
            Err(err) => eprintln!("{}: {err}", e.image.display()),
        }
    }
    if items.is_empty() {
        return Err(Error::InvalidParameter("no manifest entry could be loaded".into()));
    }
    let opts = CalibrationOptions {
        smoothing_factors: if a.no_smoothing_sweep {
            vec![cfg.post_smoothing]
        } else {
            CalibrationOptions::default().smoothing_factors
        },
        border_cut: a.border_cut,
        center_bias: !a.no_center_bias,
        ..Default::default()
    };
    let report = evaluate_models(&a.models, &items, &cfg, &opts, a.seed)?;
    let dir = &a.out.output;
    write_json(&dir.join("report.json"), &report)?;
    write_text(&dir.join("report.csv"), &evaluation_csv(&report))?;
    write_text(&dir.join("smoothing.csv"), &smoothing_csv(&report))?;
    for m in &report.models {
        eprintln!(
            "{:>16}  auc {:.4}  podsc {}",
            m.model,
            m.overall.auc,
            m.overall.podsc.map(|p| format!("{p:.4}")).unwrap_or_else(|| "-".into())
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct ManifestRecord {
    image: String,
    gt: String,
    gt_kind: GtKind,
    category: u8,
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let mut specs: Vec<(String, PatternSpec)> = Vec::new();
    let wants = |set: PatternSet| a.kind.is_none() && (a.set == set || a.set == PatternSet::All);
    if let Some(kind) = &a.kind {
        let kind: PatternKind = kind.parse()?;
        specs.push((kind.name().to_string(), PatternSpec::preset(kind)));
    }
    if wants(PatternSet::Battery) {
        specs.extend(popout_battery());
    }
    if wants(PatternSet::SizeSeries) {
        specs.extend(
            SIZE_SERIES_SIDES
                .iter()
                .map(|&side| (format!("size-{side}"), PatternSpec::size_series(side))),
        );
    }
    if wants(PatternSet::Presets) {
        specs.extend(
            PatternKind::ALL
                .iter()
                .map(|&k| (format!("preset-{}", k.name()), PatternSpec::preset(k))),
        );
    }
    for (_, spec) in &mut specs {
        spec.seed = a.seed;
        if let Some(j) = a.jitter {
            spec.jitter = j;
        }
    }
    let noise = a.noise.map(|n| match n {
        NoiseArg::Gaussian => NoiseKind::Gaussian,
        NoiseArg::SaltPepper => NoiseKind::SaltPepper,
    });
    let dir = &a.out.output;
    let rendered = specs
        .par_iter()
        .map(|(name, spec)| {
            let (mut img, gt) = make_pattern(spec)?;
            if let Some(kind) = noise {
                img = add_noise(&img, kind, a.noise_level, a.seed)?;
            }
            let image = format!("{name}.ppm");
            let mask = format!("{name}.mask.pgm");
            save_image(&dir.join(&image), &img)?;
            save_mask(&dir.join(&mask), gt.mask().expect("patterns carry region masks"))?;
            Ok(ManifestRecord {
                image,
                gt: mask,
                gt_kind: GtKind::Mask,
                category: spec.kind.category(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if !rendered.is_empty() {
        write_json(&dir.join("manifest.json"), &rendered)?;
    }
    let mut corpus_count = 0;
    if wants(PatternSet::Corpus) {
        let corpus: Vec<RgbImage> = natural_corpus();
        corpus_count = corpus.len();
        for (i, img) in corpus.iter().enumerate() {
            save_image(&dir.join("corpus").join(format!("natural-{i:02}.ppm")), img)?;
        }
    }
    eprintln!(
        "{} patterns, {} corpus images written to {}",
        rendered.len(),
        corpus_count,
        dir.display()
    );
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let cfg = a.config.build()?;
    if a.images == 0 || a.size < 8 {
        return Err(Error::InvalidParameter(
            "bench needs at least one image of side >= 8".into(),
        ));
    }
    let model = hft_saliency::patterns::LeafModel::default();
    let images: Vec<RgbImage> = (0..a.images as u64)
        .map(|s| hft_saliency::patterns::natural_image(a.size, a.size, &model, s))
        .collect();
    let gt = GroundTruth::region(Array2::from_shape_fn((a.size, a.size), |(r, c)| {
        r < a.size / 2 && c < a.size / 2
    }))?;
    let mut times = Vec::with_capacity(images.len());
    for img in &images {
        let start = Instant::now();
        run_model(
            a.model,
            img,
            RunInputs {
                cfg: &cfg,
                gt: Some(&gt),
                seed: 0,
            },
        )?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let max = times.iter().cloned().fold(0.0, f64::max);
    println!(
        "{}: {} images of {}x{}, mean {mean:.2} ms, max {max:.2} ms per image",
        a.model, a.images, a.size, a.size
    );
    Ok(())
}
