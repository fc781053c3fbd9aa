//! Python bindings. Results come back as plain lists and dicts; the
//! structured values go through the same serde representation as the CLI's
//! JSON files, so a dict from here matches the corresponding file.

use std::str::FromStr;

use morsegenus::critdetect::{DetectConfig, ThresholdRule};
use morsegenus::io::RunReport;
use morsegenus::morse::{betti_one, genus_estimate, morse_polynomial};
use morsegenus::resample::{self, PipelineConfig, Schedule};
use morsegenus::surfaces::{self as surf, NoiseMode, Point, PointCloud, SurfaceKind};
use morsegenus::{vroracle, Error};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        Error::Degenerate(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py_object<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Settings of the area-function pipeline.
#[pyclass(name = "PipelineConfig", get_all, set_all, skip_from_py_object)]
#[derive(Clone, Debug)]
pub struct PyPipelineConfig {
    pub step: f64,
    pub window: usize,
    pub gate: f64,
    /// "fixed" or "std".
    pub threshold: String,
    pub step_cut: f64,
    pub cusp_cut: f64,
}

impl Default for PyPipelineConfig {
    fn default() -> Self {
        let base = PipelineConfig::default();
        let (step_cut, cusp_cut) = match base.detect.threshold {
            ThresholdRule::Fixed { step, cusp } => (step, cusp),
            ThresholdRule::StdDev => (0.33, 0.75),
        };
        Self {
            step: base.step,
            window: base.detect.window_len,
            gate: base.detect.gate,
            threshold: "fixed".into(),
            step_cut,
            cusp_cut,
        }
    }
}

impl PyPipelineConfig {
    pub fn to_config(&self) -> morsegenus::Result<PipelineConfig> {
        let threshold = match self.threshold.as_str() {
            "fixed" => ThresholdRule::Fixed { step: self.step_cut, cusp: self.cusp_cut },
            "std" => ThresholdRule::StdDev,
            other => return Err(Error::Param(format!("unknown threshold rule '{other}'"))),
        };
        let detect = DetectConfig { window_len: self.window, gate: self.gate, threshold, ..DetectConfig::default() };
        detect.validate()?;
        Ok(PipelineConfig { step: self.step, detect })
    }
}

#[pymethods]
impl PyPipelineConfig {
    #[new]
    #[pyo3(signature = (step=None, window=None, gate=None, threshold=None, step_cut=None, cusp_cut=None))]
    fn py_new(
        step: Option<f64>,
        window: Option<usize>,
        gate: Option<f64>,
        threshold: Option<String>,
        step_cut: Option<f64>,
        cusp_cut: Option<f64>,
    ) -> PyResult<Self> {
        let d = Self::default();
        let cfg = Self {
            step: step.unwrap_or(d.step),
            window: window.unwrap_or(d.window),
            gate: gate.unwrap_or(d.gate),
            threshold: threshold.unwrap_or(d.threshold),
            step_cut: step_cut.unwrap_or(d.step_cut),
            cusp_cut: cusp_cut.unwrap_or(d.cusp_cut),
        };
        cfg.to_config().map_err(to_py_err)?;
        Ok(cfg)
    }

    fn __repr__(&self) -> String {
        format!(
            "PipelineConfig(step={}, window={}, gate={}, threshold='{}', step_cut={}, cusp_cut={})",
            self.step, self.window, self.gate, self.threshold, self.step_cut, self.cusp_cut
        )
    }
}

fn pipeline(config: Option<PyRef<'_, PyPipelineConfig>>) -> PyResult<PipelineConfig> {
    match config {
        Some(c) => c.to_config(),
        None => Ok(PipelineConfig::default()),
    }
    .map_err(to_py_err)
}

fn kind(name: &str) -> PyResult<SurfaceKind> {
    SurfaceKind::from_str(name).map_err(to_py_err)
}

/// Names of the built-in surfaces.
#[pyfunction]
fn surfaces() -> Vec<&'static str> {
    SurfaceKind::ALL.iter().map(|k| k.name()).collect()
}

/// Genus of a built-in surface.
#[pyfunction]
fn surface_genus(surface: &str) -> PyResult<u32> {
    Ok(kind(surface)?.genus())
}

/// `n` points from a built-in surface with Gaussian noise of scale `sigma`.
#[pyfunction]
#[pyo3(signature = (surface, n, seed=0, sigma=0.0, noise="height"))]
fn sample_surface(surface: &str, n: usize, seed: u64, sigma: f64, noise: &str) -> PyResult<Vec<Point>> {
    let mode = match noise {
        "height" => NoiseMode::Height,
        "isotropic" => NoiseMode::Isotropic,
        other => return Err(PyValueError::new_err(format!("unknown noise mode '{other}'"))),
    };
    let clean = surf::sample_surface(&kind(surface)?.default_spec(), n, seed).map_err(to_py_err)?;
    let noisy = surf::add_noise(&clean, sigma, resample::noise_seed(seed), mode).map_err(to_py_err)?;
    Ok(noisy.points)
}

/// Exact critical points of the height function as `(height, index)` pairs.
#[pyfunction]
fn critical_points(surface: &str) -> PyResult<Vec<(f64, u8)>> {
    let cps = surf::analytic_critical_points(&kind(surface)?.default_spec()).map_err(to_py_err)?;
    Ok(cps.iter().map(|c| (c.height, c.index)).collect())
}

/// Genus from counts of minima, saddles and maxima; None when the counts
/// cannot come from a closed orientable surface.
#[pyfunction]
fn genus_from_counts(minima: u32, saddles: u32, maxima: u32) -> Option<u32> {
    genus_estimate(&betti_one(&morse_polynomial([minima, saddles, maxima]))).ok()
}

#[derive(Serialize)]
struct AnalysisView<'a> {
    result: &'a resample::ReplicateResult,
    detections: &'a [morsegenus::critdetect::Detection],
    heights: Vec<f64>,
    area: &'a [f64],
    derivative: &'a [f64],
}

/// One pass of the pipeline over a cloud: area series, detections and genus.
#[pyfunction]
#[pyo3(signature = (points, config=None))]
fn analyze(py: Python<'_>, points: Vec<Point>, config: Option<PyRef<'_, PyPipelineConfig>>) -> PyResult<Py<PyAny>> {
    let cfg = pipeline(config)?;
    let an = resample::analyze_cloud(&PointCloud::new(points), &cfg).map_err(to_py_err)?;
    let view = AnalysisView {
        result: &an.result,
        detections: &an.detections.points,
        heights: an.area.grid.nodes(),
        area: &an.area.s,
        derivative: &an.deriv.d,
    };
    to_py_object(py, &view)
}

fn schedule(serial: bool) -> Schedule {
    if serial {
        Schedule::Serial
    } else {
        Schedule::Parallel
    }
}

/// Genus distribution over `replicates` fresh noisy clouds of a surface.
#[pyfunction]
#[pyo3(signature = (surface, n, sigma, replicates, seed=0, config=None, serial=false))]
#[allow(clippy::too_many_arguments)]
fn monte_carlo(
    py: Python<'_>,
    surface: &str,
    n: usize,
    sigma: f64,
    replicates: usize,
    seed: u64,
    config: Option<PyRef<'_, PyPipelineConfig>>,
    serial: bool,
) -> PyResult<Py<PyAny>> {
    let spec = kind(surface)?.default_spec();
    let cfg = pipeline(config)?;
    let dist = py
        .detach(|| resample::monte_carlo(&spec, n, sigma, replicates, seed, &cfg, schedule(serial)))
        .map_err(to_py_err)?;
    to_py_object(py, &RunReport::new(Some(spec), n, sigma, seed, dist))
}

/// Genus distribution over `replicates` resamples of one cloud.
#[pyfunction]
#[pyo3(signature = (points, replicates, seed=0, config=None, serial=false))]
fn bootstrap(
    py: Python<'_>,
    points: Vec<Point>,
    replicates: usize,
    seed: u64,
    config: Option<PyRef<'_, PyPipelineConfig>>,
    serial: bool,
) -> PyResult<Py<PyAny>> {
    let cfg = pipeline(config)?;
    let cloud = PointCloud::new(points);
    let dist = py
        .detach(|| resample::bootstrap(&cloud, replicates, seed, &cfg, schedule(serial)))
        .map_err(to_py_err)?;
    to_py_object(py, &RunReport::new(None, cloud.len(), 0.0, seed, dist))
}

/// Betti numbers b_0 .. b_up_to of the Vietoris-Rips complex at `epsilon`.
#[pyfunction]
#[pyo3(signature = (points, epsilon, up_to=1))]
fn rips_betti(py: Python<'_>, points: Vec<Point>, epsilon: f64, up_to: usize) -> PyResult<Vec<usize>> {
    py.detach(|| vroracle::oracle_betti_for_cloud(&points, epsilon, up_to))
        .map(|b| b.0)
        .map_err(to_py_err)
}

/// Betti numbers over a geometric grid of scales, with the longest stable run.
#[pyfunction]
#[pyo3(signature = (points, eps_min, eps_max, steps=24, up_to=1))]
fn epsilon_sweep(
    py: Python<'_>,
    points: Vec<Point>,
    eps_min: f64,
    eps_max: f64,
    steps: usize,
    up_to: usize,
) -> PyResult<Py<PyAny>> {
    let report = py
        .detach(|| vroracle::epsilon_sweep(&points, eps_min, eps_max, steps, up_to))
        .map_err(to_py_err)?;
    to_py_object(py, &report)
}

/// Farthest-point subsample of `m` points.
#[pyfunction]
fn farthest_point_subsample(points: Vec<Point>, m: usize) -> Vec<Point> {
    vroracle::farthest_point_subsample(&points, m)
}

#[pymodule]
pub fn morsegenus_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPipelineConfig>()?;
    m.add_function(wrap_pyfunction!(surfaces, m)?)?;
    m.add_function(wrap_pyfunction!(surface_genus, m)?)?;
    m.add_function(wrap_pyfunction!(sample_surface, m)?)?;
    m.add_function(wrap_pyfunction!(critical_points, m)?)?;
    m.add_function(wrap_pyfunction!(genus_from_counts, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap, m)?)?;
    m.add_function(wrap_pyfunction!(rips_betti, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(farthest_point_subsample, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
