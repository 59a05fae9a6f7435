//! Python bindings: results come back as plain dicts.

use cbound::bounds::{
    azuma_bentkus5, bentkus, chernoff, fan_chernoff, freedman_bentkus_binom, freedman_bentkus_poisson,
    poisson_majorant_bound, q_alpha_min, winsorized_freedman,
};
use cbound::dominance::{check_dominance, xi_zero_mean};
use cbound::verify::{mc_union_prob, verify_exact, EventKind, EventSpec, McConfig, StrategyTree};
use cbound::{parse_dist, Dist, Error, Method};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: Error) -> PyErr {
    match e {
        Error::DivergentMoment { .. } | Error::MgfDiverges(_) | Error::Overflow(_) | Error::Optim(_) | Error::StepTooCoarse { .. } => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn dist(spec: &str) -> PyResult<Dist> {
    parse_dist(spec).map_err(err)
}

fn need<T>(v: Option<T>, name: &str, method: &str) -> PyResult<T> {
    v.ok_or_else(|| PyValueError::new_err(format!("{method} needs {name}")))
}

/// Evaluate a named bound at `x`. Keyword arguments mirror the CLI flags.
#[pyfunction]
#[pyo3(signature = (method, x, *, n=None, v2=None, v=None, y=None, dist=None, p_exceed=0.0))]
#[allow(clippy::too_many_arguments)]
fn bound<'py>(
    py: Python<'py>,
    method: &str,
    x: f64,
    n: Option<u64>,
    v2: Option<f64>,
    v: Option<f64>,
    y: Option<f64>,
    dist: Option<&str>,
    p_exceed: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let m: Method = method.parse().map_err(err)?;
    let d = || -> PyResult<Dist> { self::dist(need(dist, "dist", method)?) };
    let r = match m {
        Method::Chernoff => chernoff(&d()?, x),
        Method::Bentkus1 => bentkus(&d()?, x, 1.0),
        Method::Bentkus2 => bentkus(&d()?, x, 2.0),
        Method::Bentkus5 => bentkus(&d()?, x, 5.0),
        Method::Fan => fan_chernoff(need(n, "n", method)?, need(v2, "v2", method)?, x),
        Method::FreedmanBinom => freedman_bentkus_binom(need(n, "n", method)?, need(v2, "v2", method)?, x),
        Method::FreedmanPoisson => freedman_bentkus_poisson(need(v2, "v2", method)?, x),
        Method::PoissonMajorant => poisson_majorant_bound(need(v2, "v2", method)?, x),
        Method::AzumaGauss5 => {
            let v = v.or(v2.map(f64::sqrt)).ok_or_else(|| PyValueError::new_err("azuma5 needs v or v2"))?;
            return to_py(py, &azuma_bentkus5(v, x).map_err(err)?);
        }
        Method::Winsorized => winsorized_freedman(need(v2, "v2", method)?, x, need(y, "y", method)?, p_exceed),
        Method::FukNagaev => return Err(PyValueError::new_err("fuk-nagaev is a threshold; use the CLI")),
    };
    to_py(py, &r.map_err(err)?)
}

#[pyfunction]
fn plus_moment(spec: &str, t: f64, alpha: f64) -> PyResult<f64> {
    dist(spec)?.plus_moment(t, alpha).map_err(err)
}

#[pyfunction]
fn survival(spec: &str, t: f64) -> PyResult<f64> {
    Ok(dist(spec)?.survival(t))
}

/// `(value, argmin)` of the quantile functional.
#[pyfunction]
#[pyo3(signature = (spec, delta, alpha=5.0))]
fn q_alpha(spec: &str, delta: f64, alpha: f64) -> PyResult<(f64, f64)> {
    let m = q_alpha_min(&dist(spec)?, delta, alpha).map_err(err)?;
    Ok((m.value, m.arg))
}

/// Mean-zero splice of `t` and `w`: `(q, a_q, b_q)`.
#[pyfunction]
fn splice_zero_mean(t: &str, w: &str) -> PyResult<(f64, f64, f64)> {
    let s = xi_zero_mean(&dist(t)?, &dist(w)?).map_err(err)?;
    Ok((s.q(), s.a_q(), s.b_q()))
}

/// Whether `u` is dominated by `v` in the order-`alpha` sense.
#[pyfunction]
fn dominated(u: &str, v: &str, alpha: f64) -> PyResult<bool> {
    Ok(check_dominance(&dist(u)?, &dist(v)?, alpha).map_err(err)?.holds)
}

fn event(kind: &str, x: f64, v2: f64, y: Option<f64>) -> PyResult<EventSpec> {
    let k = match kind {
        "freedman" => EventKind::FreedmanUnion,
        "azuma" => EventKind::AzumaUnion,
        "winsorized" => EventKind::WinsorizedUnion,
        "conjecture" => EventKind::ConjectureUnion,
        _ => return Err(PyValueError::new_err(format!("unknown event `{kind}`"))),
    };
    EventSpec::new(k, x, v2, y).map_err(err)
}

/// Exact event probability of a JSON strategy tree, with its bound.
#[pyfunction]
#[pyo3(signature = (strategy_json, event_kind, x, v2, y=None))]
fn verify_dp<'py>(
    py: Python<'py>,
    strategy_json: &str,
    event_kind: &str,
    x: f64,
    v2: f64,
    y: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let t = StrategyTree::from_json(strategy_json).map_err(err)?;
    let ev = event(event_kind, x, v2, y)?;
    let r = py.detach(|| verify_exact(&t, &ev)).map_err(err)?;
    to_py(py, &r)
}

/// Seeded Monte Carlo estimate; the output does not depend on thread count.
#[pyfunction]
#[pyo3(signature = (strategy_json, event_kind, x, v2, y=None, trials=1_000_000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn verify_mc<'py>(
    py: Python<'py>,
    strategy_json: &str,
    event_kind: &str,
    x: f64,
    v2: f64,
    y: Option<f64>,
    trials: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let t = StrategyTree::from_json(strategy_json).map_err(err)?;
    let ev = event(event_kind, x, v2, y)?;
    let r = py.detach(|| mc_union_prob(&t, &ev, &McConfig::new(trials, seed))).map_err(err)?;
    to_py(py, &r)
}

#[pymodule]
fn cbound_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    m.add_function(wrap_pyfunction!(plus_moment, m)?)?;
    m.add_function(wrap_pyfunction!(survival, m)?)?;
    m.add_function(wrap_pyfunction!(q_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(splice_zero_mean, m)?)?;
    m.add_function(wrap_pyfunction!(dominated, m)?)?;
    m.add_function(wrap_pyfunction!(verify_dp, m)?)?;
    m.add_function(wrap_pyfunction!(verify_mc, m)?)?;
    Ok(())
}
