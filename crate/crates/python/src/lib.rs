//! Python bindings for the portfolio DQN core.

use std::path::PathBuf;

use portfolio_dqn::backtest::compound as compound_returns;
use portfolio_dqn::cli::{cmd_backtest, cmd_synth, cmd_train};
use portfolio_dqn::config::{KeyValues, RunConfig, SynthConfig};
use portfolio_dqn::env::reward as step_reward;
use portfolio_dqn::error::Error;
use portfolio_dqn::qnet::{self, Action, Checkpoint};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(portfolio_dqn_py, PortfolioDqnError, PyException);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Argument(_) | Error::Config { .. } => PyValueError::new_err(e.to_string()),
        other => PortfolioDqnError::new_err(other.to_string()),
    }
}

fn action(invest: bool) -> Action {
    if invest {
        Action::Invest
    } else {
        Action::Cash
    }
}

/// Reward for investing (`invest=True`) or holding cash. `cost` is in return units.
#[pyfunction]
#[pyo3(signature = (invest, previous_invest, asset_return, universe_mean, cost))]
fn reward(invest: bool, previous_invest: bool, asset_return: f64, universe_mean: f64, cost: f64) -> f64 {
    step_reward(action(invest), action(previous_invest), asset_return, universe_mean, cost)
}

#[pyfunction]
#[pyo3(signature = (reward, gamma, next_q, terminal=false))]
fn td_target(reward: f64, gamma: f64, next_q: (f64, f64), terminal: bool) -> f64 {
    qnet::td_target(reward, gamma, next_q, terminal)
}

/// Compounded return of a sequence of simple returns.
#[pyfunction]
fn compound(returns: Vec<f64>) -> f64 {
    compound_returns(&returns)
}

#[pyclass(name = "QNetwork", module = "portfolio_dqn_py")]
struct PyQNetwork {
    net: qnet::QNetwork,
    fingerprint: Option<u32>,
}

#[pymethods]
impl PyQNetwork {
    #[new]
    #[pyo3(signature = (dims, seed=0))]
    fn new(dims: Vec<usize>, seed: u64) -> PyResult<Self> {
        let net = qnet::QNetwork::init(&dims, seed).map_err(to_py)?;
        Ok(Self { net, fingerprint: None })
    }

    /// Network stored in a checkpoint file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let c = Checkpoint::load(path).map_err(to_py)?;
        Ok(Self { net: c.net, fingerprint: Some(c.fingerprint) })
    }

    /// Returns `(q_cash, q_invest)`.
    fn forward(&self, state: Vec<f64>) -> PyResult<(f64, f64)> {
        self.net.forward(&state).map_err(to_py)
    }

    /// `True` when the network prefers investing.
    fn invests(&self, state: Vec<f64>) -> PyResult<bool> {
        Ok(Action::greedy(self.forward(state)?).is_invest())
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.net.dims().to_vec()
    }

    #[getter]
    fn params(&self) -> Vec<f64> {
        self.net.params().to_vec()
    }

    #[getter]
    fn fingerprint(&self) -> Option<u32> {
        self.fingerprint
    }

    fn __repr__(&self) -> String {
        format!("QNetwork(dims={:?})", self.net.dims())
    }
}

fn run_config(config: PathBuf) -> PyResult<RunConfig> {
    RunConfig::from_key_values(&KeyValues::from_file(config).map_err(to_py)?).map_err(to_py)
}

/// Trains the ensemble described by a config file. Returns one dict per member.
#[pyfunction]
#[pyo3(signature = (config, out, seed=None))]
fn train<'py>(py: Python<'py>, config: PathBuf, out: PathBuf, seed: Option<u64>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut kv = KeyValues::from_file(config).map_err(to_py)?;
    if let Some(s) = seed {
        kv.set("seed", s.to_string());
    }
    let cfg = RunConfig::from_key_values(&kv).map_err(to_py)?;
    let reports = py.detach(|| cmd_train(&cfg, &out)).map_err(to_py)?;
    reports
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("hidden_width", r.hidden_width)?;
            d.set_item("seed", r.seed)?;
            d.set_item("best_validation_return", r.best_validation_return)?;
            d.set_item("evaluation_curve", r.evaluation_curve.clone())?;
            d.set_item("checkpoint", r.checkpoint_path.clone())?;
            Ok(d)
        })
        .collect()
}

/// Backtests saved checkpoints and the benchmarks. Returns the written paths.
#[pyfunction]
fn backtest(py: Python<'_>, config: PathBuf, checkpoints: PathBuf, out: PathBuf) -> PyResult<Vec<PathBuf>> {
    let cfg = run_config(config)?;
    py.detach(|| cmd_backtest(&cfg, &checkpoints, &out)).map_err(to_py)
}

/// Writes a synthetic market described by a config file.
#[pyfunction]
fn synth(config: PathBuf, out: PathBuf) -> PyResult<()> {
    let cfg = SynthConfig::from_key_values(&KeyValues::from_file(config).map_err(to_py)?).map_err(to_py)?;
    cmd_synth(&cfg, &out).map_err(to_py)
}

#[pymodule]
fn portfolio_dqn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PortfolioDqnError", m.py().get_type::<PortfolioDqnError>())?;
    m.add_class::<PyQNetwork>()?;
    m.add_function(wrap_pyfunction!(reward, m)?)?;
    m.add_function(wrap_pyfunction!(td_target, m)?)?;
    m.add_function(wrap_pyfunction!(compound, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(backtest, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    Ok(())
}
