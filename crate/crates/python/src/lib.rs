//! Python bindings: delay models, estimators, the allocation LP, the
//! per-context regressor and the experiment harness.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;

use doral::env::{ArmSpec, SimRng};
use doral::estimators::RadiusMode;
use doral::harness::{self, ExperimentConfig};

fn value_err(e: doral::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Per-arm delay distribution.
#[pyclass(name = "DelayDist", module = "pydoral", from_py_object)]
#[derive(Clone)]
struct PyDelayDist(doral::env::DelayDist);

#[pymethods]
impl PyDelayDist {
    #[staticmethod]
    fn geometric(mean: f64) -> PyResult<Self> {
        let d = doral::env::DelayDist::Geometric { mean };
        d.validate().map_err(value_err)?;
        Ok(Self(d))
    }

    #[staticmethod]
    fn pareto(x_min: f64, shape: f64) -> PyResult<Self> {
        let d = doral::env::DelayDist::Pareto { x_min, shape };
        d.validate().map_err(value_err)?;
        Ok(Self(d))
    }

    fn mean(&self) -> f64 {
        self.0.mean()
    }

    /// Probability that feedback returns within `m` rounds.
    fn tau(&self, m: f64) -> f64 {
        let arm = ArmSpec {
            id: 0,
            features: vec![],
            cost: 1.0,
            delay: self.0,
        };
        doral::env::true_tau(&arm, m)
    }

    #[pyo3(signature = (n, seed = 0))]
    fn sample(&self, n: usize, seed: u64) -> Vec<usize> {
        let mut rng = SimRng::seed_from_u64(seed);
        (0..n).map(|_| self.0.sample(&mut rng)).collect()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

fn radius_mode(mode: &str) -> PyResult<RadiusMode> {
    match mode {
        "plugin" => Ok(RadiusMode::Plugin),
        "worst_case" => Ok(RadiusMode::WorstCase),
        other => Err(PyValueError::new_err(format!("unknown radius mode {other:?}"))),
    }
}

/// `(h, basket size)` for `pulls` samples at confidence `delta`.
#[pyfunction]
fn basket_count(pulls: usize, delta: f64) -> PyResult<(usize, usize)> {
    doral::estimators::basket_count(pulls, delta).map_err(value_err)
}

#[pyfunction]
fn median_of_means(values: Vec<f64>, h: usize) -> PyResult<f64> {
    doral::estimators::median_of_means(&values, h).map_err(value_err)
}

/// `(ucb, lcb)` around a median-of-means estimate.
#[pyfunction]
#[pyo3(signature = (d_m, pulls, alpha, budget, mode = "plugin"))]
fn robust_bounds(d_m: f64, pulls: usize, alpha: f64, budget: f64, mode: &str) -> PyResult<(f64, f64)> {
    doral::estimators::robust_bounds(d_m, pulls, alpha, budget, radius_mode(mode)?).map_err(value_err)
}

/// Threshold solution of the allocation LP as a dict.
#[pyfunction]
fn solve_lp<'py>(py: Python<'py>, pi: Vec<f64>, eta: Vec<f64>, rho: f64) -> PyResult<Bound<'py, PyDict>> {
    let sol = doral::allocation::solve_lp(&pi, &eta, rho).map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item("order", sol.order)?;
    out.set_item("threshold", sol.threshold)?;
    out.set_item("p", sol.p)?;
    out.set_item("value", sol.value)?;
    Ok(out)
}

/// Ridge regressor with delayed, censored feedback for one context.
#[pyclass(name = "ContextRegressor", module = "pydoral")]
struct PyContextRegressor(doral::linear::ContextRegressor);

#[pymethods]
impl PyContextRegressor {
    #[new]
    #[pyo3(signature = (dim, lam = 1.0, window = f64::INFINITY))]
    fn new(dim: usize, lam: f64, window: f64) -> PyResult<Self> {
        doral::linear::ContextRegressor::new(0, dim, lam, window)
            .map(Self)
            .map_err(value_err)
    }

    fn record_pull(&mut self, round: usize, arm: usize, features: Vec<f64>) -> PyResult<()> {
        self.0.record_pull(round, arm, &features).map_err(value_err)
    }

    #[pyo3(signature = (features, reward, within_cutoff = true))]
    fn record_feedback(&mut self, features: Vec<f64>, reward: f64, within_cutoff: bool) -> PyResult<()> {
        self.0
            .record_feedback(&features, reward, within_cutoff)
            .map_err(value_err)
    }

    fn advance(&mut self, round: usize) {
        self.0.advance(round)
    }

    fn theta_hat(&self) -> Vec<f64> {
        self.0.theta_hat()
    }

    #[pyo3(signature = (features, delta = 0.05))]
    fn index(&self, features: Vec<f64>, delta: f64) -> PyResult<f64> {
        self.0.index(&features, delta).map_err(value_err)
    }

    #[getter]
    fn pulls(&self) -> usize {
        self.0.pulls()
    }
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    harness::PRESET_NAMES.to_vec()
}

/// TOML text of a preset, a starting point for custom configs.
#[pyfunction]
fn preset_toml(name: &str) -> PyResult<String> {
    harness::preset(name)
        .map(|c| c.to_toml())
        .ok_or_else(|| PyValueError::new_err(format!("unknown preset {name:?}")))
}

fn load(config: &str) -> PyResult<ExperimentConfig> {
    if config.contains('\n') {
        ExperimentConfig::from_toml(config).map_err(value_err)
    } else {
        harness::resolve(config).map_err(value_err)
    }
}

/// Runs an experiment given a preset name, a config path or TOML text, and
/// returns `{policy: {"mean_cum_reward", "stderr_cum_reward",
/// "mean_cum_regret", "final_rewards", "failed"}}`.
#[pyfunction]
#[pyo3(signature = (config, replications = None, seed = None, horizon = None, budget = None))]
fn run_experiment<'py>(
    py: Python<'py>,
    config: &str,
    replications: Option<usize>,
    seed: Option<u64>,
    horizon: Option<usize>,
    budget: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = load(config)?;
    if let Some(r) = replications {
        cfg.replications = r;
    }
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    if let Some(h) = horizon {
        cfg.env.horizon = h;
    }
    if let Some(b) = budget {
        cfg.env.budget = b;
    }
    cfg.diagnostics = false;
    let res = py
        .detach(|| harness::run_experiment(&cfg, None))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let out = PyDict::new(py);
    for p in &res.policies {
        let d = PyDict::new(py);
        d.set_item("mean_cum_reward", p.curve.mean_reward.clone())?;
        d.set_item("stderr_cum_reward", p.curve.stderr_reward.clone())?;
        d.set_item("mean_cum_regret", p.curve.mean_regret.clone())?;
        let finals: Vec<f64> = p.replications.iter().map(|r| r.metrics().final_reward()).collect();
        d.set_item("final_rewards", finals)?;
        d.set_item("failed", p.curve.failed)?;
        out.set_item(&p.label, d)?;
    }
    Ok(out)
}

#[pymodule]
fn pydoral(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDelayDist>()?;
    m.add_class::<PyContextRegressor>()?;
    m.add_function(wrap_pyfunction!(basket_count, m)?)?;
    m.add_function(wrap_pyfunction!(median_of_means, m)?)?;
    m.add_function(wrap_pyfunction!(robust_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(solve_lp, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(preset_toml, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
