//! Python bindings: thin numpy-based wrappers around the core fitting,
//! alignment, metric, and simulation routines.
//!
//! Sequences cross the boundary as lists of 2-D float arrays (one per
//! period), masks as T×n boolean arrays, and fitted results as a
//! `FitResult` object mirroring the core struct.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use numpy::{PyArray2, PyReadonlyArray2};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dynamap_core::metrics::{
    self, default_k, MisalignAggregate, PersistenceMode,
};
use dynamap_core::methods::mds;
use dynamap_core::sim::{self, SimConfig};
use dynamap_core::transform::{self, AlignMode};
use dynamap_core::{
    ConfigurationSequence, DissimilaritySequence, Error as CoreError, FitSpec, InclusionMask,
    JointProblem, MdsType, Method, OptimizerSettings, StopReason,
};

fn core_err(e: CoreError) -> PyErr {
    match e {
        CoreError::Divergence { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_dmatrix(a: &PyReadonlyArray2<'_, f64>) -> DMatrix<f64> {
    let arr = a.as_array();
    DMatrix::from_fn(arr.nrows(), arr.ncols(), |i, j| arr[[i, j]])
}

fn matrix_to_py<'py>(py: Python<'py>, m: &DMatrix<f64>) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let rows: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    PyArray2::from_vec2(py, &rows).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn maps_to_py<'py>(
    py: Python<'py>,
    maps: &[DMatrix<f64>],
) -> PyResult<Vec<Bound<'py, PyArray2<f64>>>> {
    maps.iter().map(|m| matrix_to_py(py, m)).collect()
}

fn seq_from_py(
    matrices: &[PyReadonlyArray2<'_, f64>],
    labels: Option<Vec<String>>,
    periods: Option<Vec<String>>,
) -> PyResult<DissimilaritySequence> {
    let mats: Vec<DMatrix<f64>> = matrices.iter().map(to_dmatrix).collect();
    let n = mats.first().map_or(0, |m| m.nrows());
    let labels = labels.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
    let periods = periods.unwrap_or_else(|| (0..mats.len()).map(|t| t.to_string()).collect());
    DissimilaritySequence::new(mats, labels, periods).map_err(core_err)
}

fn config_from_py(maps: &[PyReadonlyArray2<'_, f64>]) -> PyResult<ConfigurationSequence> {
    ConfigurationSequence::new(maps.iter().map(to_dmatrix).collect()).map_err(core_err)
}

fn mask_from_py(mask: Option<&PyReadonlyArray2<'_, bool>>) -> PyResult<Option<InclusionMask>> {
    match mask {
        None => Ok(None),
        Some(m) => {
            let arr = m.as_array();
            let rows: Vec<Vec<bool>> = (0..arr.nrows())
                .map(|t| (0..arr.ncols()).map(|i| arr[[t, i]]).collect())
                .collect();
            InclusionMask::new(rows).map(Some).map_err(core_err)
        }
    }
}

fn parse_spec(
    method: &str,
    mds_type: &str,
    perplexity: f64,
    alpha: f64,
    p: usize,
    dims: usize,
) -> PyResult<FitSpec> {
    let method = match method {
        "mds" => Method::Mds {
            mds_type: match mds_type {
                "ratio" => MdsType::Ratio,
                "interval" => MdsType::Interval,
                "ordinal" => MdsType::Ordinal,
                other => {
                    return Err(PyValueError::new_err(format!(
                        "unknown mds_type '{other}' (expected ratio, interval, or ordinal)"
                    )))
                }
            },
        },
        "sammon" => Method::Sammon,
        "tsne" => Method::Tsne { perplexity },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown method '{other}' (expected mds, sammon, or tsne)"
            )))
        }
    };
    FitSpec::new(method, alpha, p, dims).map_err(core_err)
}

/// Result of a joint fit: per-period coordinates plus convergence details.
#[pyclass(name = "FitResult", frozen)]
struct PyFitResult {
    maps: Vec<DMatrix<f64>>,
    #[pyo3(get)]
    cost_total_final: f64,
    #[pyo3(get)]
    cost_static_avg: f64,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    iterations_used: usize,
    #[pyo3(get)]
    init_index_selected: usize,
    #[pyo3(get)]
    stop_reason: String,
    #[pyo3(get)]
    static_costs: Vec<f64>,
}

#[pymethods]
impl PyFitResult {
    /// The fitted maps as a list of n×d float arrays, one per period.
    #[getter]
    fn coords<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyArray2<f64>>>> {
        maps_to_py(py, &self.maps)
    }

    fn __repr__(&self) -> String {
        format!(
            "FitResult(cost_total_final={:.6}, cost_static_avg={:.6}, converged={}, \
             iterations_used={}, stop_reason='{}')",
            self.cost_total_final,
            self.cost_static_avg,
            self.converged,
            self.iterations_used,
            self.stop_reason
        )
    }
}

/// Jointly fits one map per period to a sequence of dissimilarity
/// matrices, balancing static fit against temporal smoothness via alpha.
#[pyfunction]
#[pyo3(signature = (matrices, *, labels=None, periods=None, method="mds", mds_type="ratio",
       perplexity=15.0, alpha=0.0, p=1, dims=2, n_iter=2000, tol=1e-4, step_size=1.0,
       n_inits=1, seed=0, n_iter_check=50, verbose=0, mask=None, init=None))]
#[allow(clippy::too_many_arguments)]
fn fit(
    matrices: Vec<PyReadonlyArray2<'_, f64>>,
    labels: Option<Vec<String>>,
    periods: Option<Vec<String>>,
    method: &str,
    mds_type: &str,
    perplexity: f64,
    alpha: f64,
    p: usize,
    dims: usize,
    n_iter: usize,
    tol: f64,
    step_size: f64,
    n_inits: usize,
    seed: u64,
    n_iter_check: usize,
    verbose: u8,
    mask: Option<PyReadonlyArray2<'_, bool>>,
    init: Option<Vec<PyReadonlyArray2<'_, f64>>>,
) -> PyResult<PyFitResult> {
    let d = seq_from_py(&matrices, labels, periods)?;
    let spec = parse_spec(method, mds_type, perplexity, alpha, p, dims)?;
    let mask = mask_from_py(mask.as_ref())?;
    let init = init.map(|maps| config_from_py(&maps)).transpose()?;
    let settings = OptimizerSettings {
        n_iter,
        tol,
        step_size,
        n_inits,
        init,
        n_iter_check,
        verbose,
        seed,
        ..OptimizerSettings::default()
    };
    let result = dynamap_core::fit(&d, &spec, &settings, mask.as_ref()).map_err(core_err)?;
    let static_costs = JointProblem::new(&d, &spec, mask.as_ref())
        .map_err(core_err)?
        .static_costs(&result.coords)
        .map_err(core_err)?;
    let stop_reason = match result.stop_reason {
        StopReason::GradientVanished => "gradient_vanished",
        StopReason::CostStagnated => "cost_stagnated",
        StopReason::MaxIterations => "max_iterations",
    }
    .to_string();
    Ok(PyFitResult {
        maps: result.coords.maps().to_vec(),
        cost_total_final: result.cost_total_final,
        cost_static_avg: result.cost_static_avg,
        converged: result.converged,
        iterations_used: result.iterations_used,
        init_index_selected: result.init_index_selected,
        stop_reason,
        static_costs,
    })
}

/// Classical scaling of one dissimilarity matrix into `dims` dimensions.
#[pyfunction]
#[pyo3(signature = (d, dims=2))]
fn cmds<'py>(
    py: Python<'py>,
    d: PyReadonlyArray2<'_, f64>,
    dims: usize,
) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let result = mds::cmds(&to_dmatrix(&d), dims).map_err(core_err)?;
    matrix_to_py(py, &result.coords)
}

/// Aligns every map of a sequence to a reference map by Procrustes
/// rotation (mode "per_map"), or applies the first map's transform to the
/// whole sequence (mode "fixed").
#[pyfunction]
#[pyo3(signature = (coords, reference, *, mode="per_map", allow_scaling=false))]
fn align_maps<'py>(
    py: Python<'py>,
    coords: Vec<PyReadonlyArray2<'_, f64>>,
    reference: PyReadonlyArray2<'_, f64>,
    mode: &str,
    allow_scaling: bool,
) -> PyResult<Vec<Bound<'py, PyArray2<f64>>>> {
    let x = config_from_py(&coords)?;
    let mode = match mode {
        "per_map" => AlignMode::PerMap,
        "fixed" => AlignMode::Fixed,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown mode '{other}' (expected per_map or fixed)"
            )))
        }
    };
    let aligned =
        transform::align_maps(&x, &to_dmatrix(&reference), mode, allow_scaling).map_err(core_err)?;
    maps_to_py(py, aligned.maps())
}

/// Shape distance in [0, 1] between two configurations, invariant to
/// translation, rotation, reflection, and uniform scaling.
#[pyfunction]
fn procrustes_distance(
    a: PyReadonlyArray2<'_, f64>,
    b: PyReadonlyArray2<'_, f64>,
) -> PyResult<f64> {
    transform::procrustes_distance(&to_dmatrix(&a), &to_dmatrix(&b)).map_err(core_err)
}

/// Mean (or total) movement path length across consecutive periods.
#[pyfunction]
#[pyo3(signature = (coords, *, mask=None, aggregate="mean"))]
fn misalign(
    coords: Vec<PyReadonlyArray2<'_, f64>>,
    mask: Option<PyReadonlyArray2<'_, bool>>,
    aggregate: &str,
) -> PyResult<f64> {
    let x = config_from_py(&coords)?;
    let mask = mask_from_py(mask.as_ref())?;
    let aggregate = match aggregate {
        "mean" => MisalignAggregate::Mean,
        "total" => MisalignAggregate::Total,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown aggregate '{other}' (expected mean or total)"
            )))
        }
    };
    metrics::misalign_score(&x, mask.as_ref(), aggregate).map_err(core_err)
}

/// Mean cosine between an object's consecutive position vectors.
#[pyfunction]
#[pyo3(signature = (coords, *, mask=None))]
fn alignment(
    coords: Vec<PyReadonlyArray2<'_, f64>>,
    mask: Option<PyReadonlyArray2<'_, bool>>,
) -> PyResult<f64> {
    let x = config_from_py(&coords)?;
    let mask = mask_from_py(mask.as_ref())?;
    metrics::align_score(&x, mask.as_ref()).map_err(core_err)
}

/// Correlation between consecutive movement steps; 1 is straight-line
/// motion, -1 an exact zigzag.
#[pyfunction]
#[pyo3(signature = (coords, *, mask=None, mode="pooled"))]
fn persistence(
    coords: Vec<PyReadonlyArray2<'_, f64>>,
    mask: Option<PyReadonlyArray2<'_, bool>>,
    mode: &str,
) -> PyResult<f64> {
    let x = config_from_py(&coords)?;
    let mask = mask_from_py(mask.as_ref())?;
    let mode = match mode {
        "pooled" => PersistenceMode::Pooled,
        "per_object" => PersistenceMode::PerObject,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown mode '{other}' (expected pooled or per_object)"
            )))
        }
    };
    metrics::persistence_score(&x, mask.as_ref(), mode).map_err(core_err)
}

/// Average share of each object's k nearest data neighbors preserved among
/// its k nearest map neighbors, optionally chance-adjusted.
#[pyfunction]
#[pyo3(signature = (coords, matrices, *, labels=None, periods=None, k=None, adjusted=false, mask=None))]
fn hitrate(
    coords: Vec<PyReadonlyArray2<'_, f64>>,
    matrices: Vec<PyReadonlyArray2<'_, f64>>,
    labels: Option<Vec<String>>,
    periods: Option<Vec<String>>,
    k: Option<usize>,
    adjusted: bool,
    mask: Option<PyReadonlyArray2<'_, bool>>,
) -> PyResult<f64> {
    let x = config_from_py(&coords)?;
    let d = seq_from_py(&matrices, labels, periods)?;
    let mask = mask_from_py(mask.as_ref())?;
    let k = k.unwrap_or_else(|| default_k(d.n_objects()));
    if adjusted {
        metrics::avg_adjusted_hitrate_score(&x, &d, k, mask.as_ref()).map_err(core_err)
    } else {
        metrics::avg_hitrate_score(&x, &d, k, mask.as_ref()).map_err(core_err)
    }
}

/// Every applicable quality metric for a fitted sequence, as a dict.
#[pyfunction]
#[pyo3(signature = (coords, matrices, *, labels=None, periods=None, k=None, mask=None,
       per_period=false, cost_static_avg=None))]
#[allow(clippy::too_many_arguments)]
fn evaluate(
    coords: Vec<PyReadonlyArray2<'_, f64>>,
    matrices: Vec<PyReadonlyArray2<'_, f64>>,
    labels: Option<Vec<String>>,
    periods: Option<Vec<String>>,
    k: Option<usize>,
    mask: Option<PyReadonlyArray2<'_, bool>>,
    per_period: bool,
    cost_static_avg: Option<f64>,
) -> PyResult<BTreeMap<String, f64>> {
    let x = config_from_py(&coords)?;
    let d = seq_from_py(&matrices, labels, periods)?;
    let mask = mask_from_py(mask.as_ref())?;
    let k = k.unwrap_or_else(|| default_k(d.n_objects()));
    let report =
        metrics::evaluate(&x, &d, k, mask.as_ref(), cost_static_avg).map_err(core_err)?;
    Ok(report
        .named_values(d.periods(), per_period)
        .into_iter()
        .collect())
}

/// Simulates smooth object paths: a momentum-damped random walk.
#[pyfunction]
#[pyo3(signature = (*, n=6, t=10, scale=1.0, noise=0.25, momentum=0.6, seed=0))]
fn simulate_paths<'py>(
    py: Python<'py>,
    n: usize,
    t: usize,
    scale: f64,
    noise: f64,
    momentum: f64,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyArray2<f64>>>> {
    let cfg = SimConfig {
        n,
        t,
        scale,
        noise,
        momentum,
        seed,
        ..SimConfig::default()
    };
    let x = sim::simulate_paths(&cfg).map_err(core_err)?;
    maps_to_py(py, x.maps())
}

/// Pairwise distances measured from true positions after perturbing each
/// coordinate with Gaussian noise; returns one matrix per period.
#[pyfunction]
#[pyo3(signature = (coords, *, noise=0.0, seed=0))]
fn measure_distances<'py>(
    py: Python<'py>,
    coords: Vec<PyReadonlyArray2<'_, f64>>,
    noise: f64,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyArray2<f64>>>> {
    let x = config_from_py(&coords)?;
    let d = sim::measure_distances(&x, noise, seed).map_err(core_err)?;
    maps_to_py(py, d.matrices())
}

/// The bundled synthetic tech-firms panel: returns (matrices, labels,
/// periods, truth_maps).
#[pyfunction]
#[pyo3(signature = (seed=0))]
#[allow(clippy::type_complexity)]
fn tech_firms_standin<'py>(
    py: Python<'py>,
    seed: u64,
) -> PyResult<(
    Vec<Bound<'py, PyArray2<f64>>>,
    Vec<String>,
    Vec<String>,
    Vec<Bound<'py, PyArray2<f64>>>,
)> {
    let (d, truth) = sim::tech_firms_standin(seed).map_err(core_err)?;
    Ok((
        maps_to_py(py, d.matrices())?,
        d.labels().to_vec(),
        d.periods().to_vec(),
        maps_to_py(py, truth.maps())?,
    ))
}

/// Dynamic proximity mapping: joint estimation of smooth map sequences
/// from dissimilarity data, with alignment, metrics, and simulation tools.
#[pymodule]
fn dynamap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyFitResult>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(cmds, m)?)?;
    m.add_function(wrap_pyfunction!(align_maps, m)?)?;
    m.add_function(wrap_pyfunction!(procrustes_distance, m)?)?;
    m.add_function(wrap_pyfunction!(misalign, m)?)?;
    m.add_function(wrap_pyfunction!(alignment, m)?)?;
    m.add_function(wrap_pyfunction!(persistence, m)?)?;
    m.add_function(wrap_pyfunction!(hitrate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_paths, m)?)?;
    m.add_function(wrap_pyfunction!(measure_distances, m)?)?;
    m.add_function(wrap_pyfunction!(tech_firms_standin, m)?)?;
    Ok(())
}
