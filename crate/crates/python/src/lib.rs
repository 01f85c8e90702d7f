//! Python bindings. Images cross the boundary as nested lists: color
//! images are `H × W × 3` in `[0, 1]`, maps and masks are `H × W`.

use ndarray::Array2;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hft_core::evaluation::{dsc_curve, roc_auc as roc_auc_impl, GroundTruth};
use hft_core::models::hft_saliency_with_gt;
use hft_core::patterns::{make_pattern as make_pattern_impl, PatternKind, PatternSpec};
use hft_core::quaternion::{qmul, PureUnitAxis, Quaternion as CoreQuaternion, QuaternionImage};
use hft_core::selection::SelectionMode;
use hft_core::spectral::{hft_forward as forward_impl, hft_inverse as inverse_impl};
use hft_core::{run_model, ModelConfig, ModelKind, RgbImage, RunInputs};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_array<T: Copy>(rows: Vec<Vec<T>>) -> PyResult<Array2<T>> {
    let h = rows.len();
    let w = rows.first().map_or(0, Vec::len);
    if h == 0 || w == 0 || rows.iter().any(|r| r.len() != w) {
        return Err(PyValueError::new_err("expected a non-empty rectangular 2-D list"));
    }
    Ok(Array2::from_shape_vec((h, w), rows.into_iter().flatten().collect()).expect("shape checked"))
}

fn to_rows<T: Copy>(a: &Array2<T>) -> Vec<Vec<T>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn to_image(pixels: Vec<Vec<[f64; 3]>>) -> PyResult<RgbImage> {
    let px = to_array(pixels)?;
    RgbImage::new(px.mapv(|p| p[0]), px.mapv(|p| p[1]), px.mapv(|p| p[2])).map_err(err)
}

fn from_image(img: &RgbImage) -> Vec<Vec<[f64; 3]>> {
    (0..img.height())
        .map(|r| (0..img.width()).map(|c| img.get(r, c)).collect())
        .collect()
}

fn axis_of(axis: Option<[f64; 3]>) -> PyResult<PureUnitAxis> {
    match axis {
        None => Ok(PureUnitAxis::luminance()),
        Some([b, c, d]) => PureUnitAxis::from_direction(b, c, d).map_err(err),
    }
}

/// `a + b·i + c·j + d·k`.
#[pyclass(name = "Quaternion", frozen, eq, skip_from_py_object)]
#[derive(Clone, Copy, PartialEq)]
struct PyQuaternion(CoreQuaternion);

#[pymethods]
impl PyQuaternion {
    #[new]
    #[pyo3(signature = (a = 0.0, b = 0.0, c = 0.0, d = 0.0))]
    fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self(CoreQuaternion::new(a, b, c, d))
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.0.b
    }

    #[getter]
    fn c(&self) -> f64 {
        self.0.c
    }

    #[getter]
    fn d(&self) -> f64 {
        self.0.d
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn conj(&self) -> Self {
        Self(self.0.conj())
    }

    fn __mul__(&self, other: &Self) -> Self {
        Self(qmul(self.0, other.0))
    }

    fn __add__(&self, other: &Self) -> Self {
        Self(self.0 + other.0)
    }

    fn __repr__(&self) -> String {
        let q = self.0;
        format!("Quaternion({}, {}, {}, {})", q.a, q.b, q.c, q.d)
    }
}

type Planes = [Vec<Vec<f64>>; 4];
type Pixels = Vec<Vec<[f64; 3]>>;

fn to_qimage([a, b, c, d]: Planes) -> PyResult<QuaternionImage> {
    QuaternionImage::from_planes(to_array(a)?, to_array(b)?, to_array(c)?, to_array(d)?).map_err(err)
}

fn from_qimage(q: &QuaternionImage) -> Planes {
    [to_rows(&q.a), to_rows(&q.b), to_rows(&q.c), to_rows(&q.d)]
}

/// Unitary hypercomplex Fourier transform of four `H × W` planes.
#[pyfunction]
#[pyo3(signature = (planes, axis = None))]
fn hft_forward(planes: Planes, axis: Option<[f64; 3]>) -> PyResult<Planes> {
    Ok(from_qimage(
        &forward_impl(&to_qimage(planes)?, axis_of(axis)?).map_err(err)?,
    ))
}

#[pyfunction]
#[pyo3(signature = (planes, axis = None))]
fn hft_inverse(planes: Planes, axis: Option<[f64; 3]>) -> PyResult<Planes> {
    Ok(from_qimage(
        &inverse_impl(&to_qimage(planes)?, axis_of(axis)?).map_err(err)?,
    ))
}

/// Saliency map of an `H × W × 3` image; `mask` is only used by `hft-star`.
#[pyfunction]
#[pyo3(signature = (image, model = "hft", mask = None, seed = 0))]
fn saliency(
    image: Vec<Vec<[f64; 3]>>,
    model: &str,
    mask: Option<Vec<Vec<bool>>>,
    seed: u64,
) -> PyResult<Vec<Vec<f64>>> {
    let kind: ModelKind = model.parse().map_err(err)?;
    let img = to_image(image)?;
    let gt = mask
        .map(|m| to_array(m).and_then(|m| GroundTruth::region(m).map_err(err)))
        .transpose()?;
    let cfg = ModelConfig::default();
    let map = run_model(
        kind,
        &img,
        RunInputs {
            cfg: &cfg,
            gt: gt.as_ref(),
            seed,
        },
    )
    .map_err(err)?;
    Ok(to_rows(&map.values))
}

/// Full spectrum scale-space run: selected map, scale, every per-scale
/// map and the criterion trace.
#[pyfunction]
#[pyo3(signature = (image, selection = "full"))]
fn hft<'py>(py: Python<'py>, image: Vec<Vec<[f64; 3]>>, selection: &str) -> PyResult<Bound<'py, PyDict>> {
    let mode = match selection {
        "full" => SelectionMode::Full,
        "entropy" => SelectionMode::EntropyOnly,
        other => return Err(PyValueError::new_err(format!("unknown selection {other:?}"))),
    };
    let cfg = ModelConfig {
        selection: mode,
        ..Default::default()
    };
    let res = hft_saliency_with_gt(&to_image(image)?, &cfg, None).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("map", to_rows(&res.map.values))?;
    out.set_item("k", res.k)?;
    out.set_item("maps", res.maps.iter().map(|m| to_rows(&m.values)).collect::<Vec<_>>())?;
    let trace: Vec<(usize, f64, f64, f64)> = res.trace.iter().map(|r| (r.k, r.entropy, r.lambda, r.score)).collect();
    out.set_item("trace", trace)?;
    Ok(out)
}

#[pyfunction]
fn roc_auc(map: Vec<Vec<f64>>, mask: Vec<Vec<bool>>) -> PyResult<f64> {
    let gt = GroundTruth::region(to_array(mask)?).map_err(err)?;
    Ok(roc_auc_impl(&to_array(map)?, &gt).map_err(err)?.auc)
}

/// Peak of the Dice curve over 256 thresholds.
#[pyfunction]
fn podsc(map: Vec<Vec<f64>>, mask: Vec<Vec<bool>>) -> PyResult<f64> {
    Ok(dsc_curve(&to_array(map)?, &to_array(mask)?).map_err(err)?.podsc)
}

/// Preset stimulus of the given kind: `(image, mask)`.
#[pyfunction]
#[pyo3(signature = (kind, seed = 0))]
fn make_pattern(kind: &str, seed: u64) -> PyResult<(Pixels, Vec<Vec<bool>>)> {
    let kind: PatternKind = kind.parse().map_err(err)?;
    let spec = PatternSpec {
        seed,
        ..PatternSpec::preset(kind)
    };
    let (img, gt) = make_pattern_impl(&spec).map_err(err)?;
    Ok((
        from_image(&img),
        to_rows(gt.mask().expect("patterns carry region masks")),
    ))
}

#[pymodule]
fn hft_saliency(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQuaternion>()?;
    m.add_function(wrap_pyfunction!(hft_forward, m)?)?;
    m.add_function(wrap_pyfunction!(hft_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(saliency, m)?)?;
    m.add_function(wrap_pyfunction!(hft, m)?)?;
    m.add_function(wrap_pyfunction!(roc_auc, m)?)?;
    m.add_function(wrap_pyfunction!(podsc, m)?)?;
    m.add_function(wrap_pyfunction!(make_pattern, m)?)?;
    m.add("MODELS", ModelKind::ALL.iter().map(|k| k.name()).collect::<Vec<_>>())?;
    m.add(
        "PATTERNS",
        PatternKind::ALL.iter().map(|k| k.name()).collect::<Vec<_>>(),
    )?;
    Ok(())
}
