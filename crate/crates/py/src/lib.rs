//! Python bindings. Series cross the boundary as a flat list of values with
//! the first mode fastest and time slowest, plus `dims` and `n`; matrices
//! as lists of rows.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rtfm_core::{
    Error, FitConfig, KappaRule, Matrix, RankChoice, RankConfig, TauRule, TensorDgpConfig, TensorSeries, TruncationLevel,
};

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Io(_) | Error::Format(_) => PyOSError::new_err(msg),
        Error::InvalidArgument(_)
        | Error::RankOutOfRange { .. }
        | Error::ShapeMismatch(_)
        | Error::ModeOutOfRange { .. }
        | Error::InsufficientSample(_) => PyValueError::new_err(msg),
        _ => PyRuntimeError::new_err(msg),
    }
}

fn series(data: Vec<f64>, dims: Vec<usize>, n: usize) -> PyResult<TensorSeries> {
    TensorSeries::new(dims, n, data).map_err(py_err)
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).map_err(py_err)
}

fn level(v: f64) -> PyResult<TruncationLevel> {
    TruncationLevel::new(v).map_err(py_err)
}

/// Reads an RTFM1 file (or a CSV panel); returns `(data, dims, n)`.
#[pyfunction]
fn load_series(path: PathBuf) -> PyResult<(Vec<f64>, Vec<usize>, usize)> {
    let x = rtfm_core::io::load_series(&path).map_err(py_err)?;
    Ok((x.data().to_vec(), x.dims().to_vec(), x.len()))
}

#[pyfunction]
fn save_series(path: PathBuf, data: Vec<f64>, dims: Vec<usize>, n: usize) -> PyResult<()> {
    rtfm_core::io::save_series(&path, &series(data, dims, n)?).map_err(py_err)
}

/// One draw of a tensor scenario (`T1`, `T2`, `T3`).
#[pyfunction]
#[pyo3(signature = (scenario, n, seed=0, ranks=None))]
fn simulate<'py>(
    py: Python<'py>,
    scenario: &str,
    n: usize,
    seed: u64,
    ranks: Option<Vec<usize>>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = TensorDgpConfig::preset(scenario, n).map_err(py_err)?;
    cfg.seed = seed;
    if let Some(r) = ranks {
        cfg.ranks = r;
    }
    let d = rtfm_core::gen_tensor(&cfg).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("data", d.x.data().to_vec())?;
    out.set_item("dims", cfg.dims.clone())?;
    out.set_item("n", n)?;
    out.set_item("loadings", d.loadings.iter().map(rows).collect::<Vec<_>>())?;
    out.set_item("common", d.common.data().to_vec())?;
    Ok(out)
}

/// Fits the model. `ranks=None` selects factor numbers, `tau=None`
/// cross-validates the truncation level, `kappa=None` reuses `tau`.
#[pyfunction]
#[pyo3(signature = (data, dims, n, ranks=None, tau=None, kappa=None, iterations=2))]
#[allow(clippy::too_many_arguments)]
fn estimate<'py>(
    py: Python<'py>,
    data: Vec<f64>,
    dims: Vec<usize>,
    n: usize,
    ranks: Option<Vec<usize>>,
    tau: Option<f64>,
    kappa: Option<f64>,
    iterations: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let x = series(data, dims, n)?;
    let mut cfg = FitConfig::new(match ranks {
        Some(r) => RankChoice::Fixed(r),
        None => RankChoice::Auto(RankConfig::default()),
    });
    if let Some(t) = tau {
        cfg.tau = TauRule::Fixed(level(t)?);
    }
    if let Some(k) = kappa {
        cfg.kappa = KappaRule::Fixed(level(k)?);
    }
    cfg.iterations = iterations;
    let rep = py.detach(|| rtfm_core::fit(&x, &cfg)).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("ranks", rep.ranks.clone())?;
    out.set_item("tau", rep.tau.value())?;
    out.set_item("kappa", rep.kappa.value())?;
    out.set_item("loadings", rep.loadings().lambdas().iter().map(rows).collect::<Vec<_>>())?;
    out.set_item("factors", rep.factors.series().data().to_vec())?;
    out.set_item("common", rep.common.data().to_vec())?;
    if let Some(cv) = &rep.cv {
        out.set_item("cv_grid", cv.grid.clone())?;
        out.set_item("cv_curve", cv.curve.clone())?;
    }
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (data, dims, n, tau=f64::INFINITY))]
fn select_ranks(py: Python<'_>, data: Vec<f64>, dims: Vec<usize>, n: usize, tau: f64) -> PyResult<Vec<usize>> {
    let x = series(data, dims, n)?;
    let tau = level(tau)?;
    let est = py.detach(|| rtfm_core::estimate_ranks(&x, tau, &RankConfig::default())).map_err(py_err)?;
    Ok(est.ranks)
}

/// Returns `(tau, grid, curve)`.
#[pyfunction]
fn cv_tau(py: Python<'_>, data: Vec<f64>, dims: Vec<usize>, n: usize, ranks: Vec<usize>) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
    let x = series(data, dims, n)?;
    let res = py.detach(|| rtfm_core::cv_tau(&x, &ranks, &Default::default())).map_err(py_err)?;
    Ok((res.tau.value(), res.grid, res.curve))
}

#[pyfunction]
fn loading_error(est: Vec<Vec<f64>>, truth: Vec<Vec<f64>>) -> PyResult<f64> {
    rtfm_core::loading_error(&matrix(est)?, &matrix(truth)?).map_err(py_err)
}

#[pymodule]
fn rtfm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(load_series, m)?)?;
    m.add_function(wrap_pyfunction!(save_series, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(select_ranks, m)?)?;
    m.add_function(wrap_pyfunction!(cv_tau, m)?)?;
    m.add_function(wrap_pyfunction!(loading_error, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_python_classes() {
        Python::initialize();
        Python::attach(|py| {
            assert!(py_err(Error::Io("x".into())).is_instance_of::<PyOSError>(py));
            assert!(py_err(Error::InvalidArgument("x".into())).is_instance_of::<PyValueError>(py));
            assert!(py_err(Error::Singular("x".into())).is_instance_of::<PyRuntimeError>(py));
        });
    }
}
