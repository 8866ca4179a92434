//! Python bindings: synthesis, the two-step estimator, and the Whittle
//! baseline, exposed over plain lists so no numpy build dependency is needed.

use nalgebra::DMatrix;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use fracmix::estimator::{self, DemixConfig};
use fracmix::rng::StreamSeed;
use fracmix::series::MultiSeries;
use fracmix::synth::{self, ProcessClass};
use fracmix::whittle;

fn err<T>(e: fracmix::Error) -> PyResult<T> {
    Err(PyValueError::new_err(e.to_string()))
}

fn to_matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(n, n, &flat))
}

fn series_from_rows(rows: Vec<Vec<f64>>) -> PyResult<MultiSeries> {
    MultiSeries::from_rows(rows, None).or_else(err)
}

fn parse_class(tag: &str, param: f64, extra: Option<f64>) -> PyResult<ProcessClass> {
    match tag.to_ascii_lowercase().as_str() {
        "fgn" => Ok(ProcessClass::Fgn { h: param }),
        "fbm" => Ok(ProcessClass::Fbm { h: param }),
        "farima" => Ok(ProcessClass::Farima { d: param }),
        "fou" => Ok(ProcessClass::Fou {
            lambda: extra.unwrap_or(1.0),
            h: param,
        }),
        other => Err(PyValueError::new_err(format!("unknown process class {other:?}"))),
    }
}

/// fgn_autocov(h, k) -> float
#[pyfunction]
fn fgn_autocov(h: f64, k: usize) -> PyResult<f64> {
    synth::fgn_autocov(h, k).or_else(err)
}

/// synth_fgn(h, nu, seed) -> list[float]
#[pyfunction]
fn synth_fgn(h: f64, nu: usize, seed: u64) -> PyResult<Vec<f64>> {
    synth::synth_fgn(h, nu, StreamSeed::new(seed))
        .map(|s| s.channel(0).to_vec())
        .or_else(err)
}

/// synth_fbm(h, nu, seed) -> list[float]
#[pyfunction]
fn synth_fbm(h: f64, nu: usize, seed: u64) -> PyResult<Vec<f64>> {
    synth::synth_fbm(h, nu, StreamSeed::new(seed))
        .map(|s| s.channel(0).to_vec())
        .or_else(err)
}

/// synth_farima(d, nu, seed) -> list[float]
#[pyfunction]
fn synth_farima(d: f64, nu: usize, seed: u64) -> PyResult<Vec<f64>> {
    synth::synth_farima(d, nu, StreamSeed::new(seed))
        .map(|s| s.channel(0).to_vec())
        .or_else(err)
}

/// synth_fou(lambda_, h, nu, dt, seed) -> list[float]
#[pyfunction]
fn synth_fou(lambda_: f64, h: f64, nu: usize, dt: f64, seed: u64) -> PyResult<Vec<f64>> {
    synth::synth_fou(lambda_, h, nu, dt, StreamSeed::new(seed))
        .map(|s| s.channel(0).to_vec())
        .or_else(err)
}

/// mix(p, x) -> list[list[float]]: Y = P X rowwise.
#[pyfunction]
fn mix(p: Vec<Vec<f64>>, x: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let mat = to_matrix(&p)?;
    let series = series_from_rows(x)?;
    synth::mix(&mat, &series).map(|y| y.rows().to_vec()).or_else(err)
}

/// synth_mixed(p, classes, nu, seed) -> (hidden, mixed)
/// classes: list of ("fgn"|"fbm"|"farima"|"fou", param[, lambda]).
#[pyfunction]
fn synth_mixed(
    p: Vec<Vec<f64>>,
    classes: Vec<(String, f64, Option<f64>)>,
    nu: usize,
    seed: u64,
) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mat = to_matrix(&p)?;
    let parsed: PyResult<Vec<ProcessClass>> =
        classes.iter().map(|(t, v, extra)| parse_class(t, *v, *extra)).collect();
    let spec = synth::MixingSpec::new(mat, parsed?).or_else(err)?;
    let (x, y) = synth::synth_mixed(&spec, nu, StreamSeed::new(seed)).or_else(err)?;
    Ok((x.rows().to_vec(), y.rows().to_vec()))
}

/// daubechies_filters(n_psi) -> (lowpass, highpass)
#[pyfunction]
fn daubechies_filters(n_psi: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    fracmix::dwt::daubechies_filters(n_psi)
        .map(|b| (b.lowpass, b.highpass))
        .or_else(err)
}

/// wavelet_log2_variances(y, octaves, n_psi) -> list[list[float]] per channel.
#[pyfunction]
fn wavelet_log2_variances(
    y: Vec<Vec<f64>>,
    octaves: Vec<usize>,
    n_psi: usize,
) -> PyResult<Vec<Vec<f64>>> {
    let series = series_from_rows(y)?;
    let basis = fracmix::dwt::daubechies_filters(n_psi).or_else(err)?;
    let fit = estimator::estimate_memory(&series, &octaves, &basis).or_else(err)?;
    Ok(fit.log2_wii)
}

/// two_step(y, j1=1, j2=6, n_psi=2, octaves=None, classes=None, ci_level=None) -> dict
#[pyfunction]
#[pyo3(signature = (y, j1=1, j2=6, n_psi=2, octaves=None, classes=None, ci_level=None))]
#[allow(clippy::too_many_arguments)]
fn two_step(
    py: Python<'_>,
    y: Vec<Vec<f64>>,
    j1: usize,
    j2: usize,
    n_psi: usize,
    octaves: Option<Vec<usize>>,
    classes: Option<Vec<(String, f64, Option<f64>)>>,
    ci_level: Option<f64>,
) -> PyResult<Py<PyDict>> {
    let series = series_from_rows(y)?;
    let cfg = DemixConfig { j1, j2, n_psi }.feasible_for(series.len()).or_else(err)?;
    let parsed: Option<Vec<ProcessClass>> = match classes {
        Some(cs) => Some(
            cs.iter()
                .map(|(t, v, extra)| parse_class(t, *v, *extra))
                .collect::<PyResult<Vec<_>>>()?,
        ),
        None => None,
    };
    let result = estimator::two_step(
        &series,
        &cfg,
        &octaves.unwrap_or_default(),
        parsed.as_deref(),
        ci_level,
    )
    .or_else(err)?;
    let out = PyDict::new(py);
    let report = result.report();
    out.set_item("b_hat", report.b_hat)?;
    out.set_item("p_hat", report.p_hat)?;
    out.set_item("d_hat", report.d_hat)?;
    out.set_item("h_hat", report.h_hat)?;
    out.set_item("octaves", report.octaves)?;
    out.set_item("weights", report.weights)?;
    out.set_item("ci_halfwidth", report.ci_halfwidth)?;
    out.set_item("ci_approximate", report.ci_approximate)?;
    out.set_item("log2_wavelet_variances", report.log2_wavelet_variances)?;
    out.set_item("eigengap", report.eigengap)?;
    out.set_item("degenerate", report.degenerate)?;
    out.set_item("demixed", result.demixed.rows().to_vec())?;
    Ok(out.into())
}

/// whittle_fit(y, m=100) -> dict with h1, h2, p_hat, nll, wall_time_s
#[pyfunction]
#[pyo3(signature = (y, m=100))]
fn whittle_fit(py: Python<'_>, y: Vec<Vec<f64>>, m: usize) -> PyResult<Py<PyDict>> {
    let series = series_from_rows(y)?;
    let init = whittle::whittle_default_init(&series).or_else(err)?;
    let fit = whittle::whittle_fit(&series, &init, m).or_else(err)?;
    let out = PyDict::new(py);
    out.set_item("h1", fit.h1)?;
    out.set_item("h2", fit.h2)?;
    out.set_item("a_hat", fit.a_hat)?;
    out.set_item("p_hat", fit.p_hat)?;
    out.set_item("nll", fit.nll)?;
    out.set_item("iterations", fit.iterations)?;
    out.set_item("wall_time_s", fit.wall_time_s)?;
    out.set_item("converged", fit.converged)?;
    Ok(out.into())
}

/// acf(x, max_lag) -> list[float]
#[pyfunction]
fn acf(x: Vec<f64>, max_lag: usize) -> PyResult<Vec<f64>> {
    fracmix::analysis::acf(&x, max_lag).or_else(err)
}

/// prewhiten(x, max_order) -> (residuals, chosen_order)
#[pyfunction]
fn prewhiten(x: Vec<f64>, max_order: usize) -> PyResult<(Vec<f64>, usize)> {
    fracmix::analysis::prewhiten(&x, max_order).or_else(err)
}

#[pymodule]
fn fracmix_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(fgn_autocov, m)?)?;
    m.add_function(wrap_pyfunction!(synth_fgn, m)?)?;
    m.add_function(wrap_pyfunction!(synth_fbm, m)?)?;
    m.add_function(wrap_pyfunction!(synth_farima, m)?)?;
    m.add_function(wrap_pyfunction!(synth_fou, m)?)?;
    m.add_function(wrap_pyfunction!(mix, m)?)?;
    m.add_function(wrap_pyfunction!(synth_mixed, m)?)?;
    m.add_function(wrap_pyfunction!(daubechies_filters, m)?)?;
    m.add_function(wrap_pyfunction!(wavelet_log2_variances, m)?)?;
    m.add_function(wrap_pyfunction!(two_step, m)?)?;
    m.add_function(wrap_pyfunction!(whittle_fit, m)?)?;
    m.add_function(wrap_pyfunction!(acf, m)?)?;
    m.add_function(wrap_pyfunction!(prewhiten, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
