//! Python module `geams`: energy model, link model, topology generation,
//! the smart greedy selector and full simulation runs.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use geams_core::experiment::{run_plan, ExperimentPlan};
use geams_core::metrics::MetricsReport;
use geams_core::routing::geams::{average_score_index as avg_index, select_next_hop as select, BestNeighborSet, SourceState};
use geams_core::sim::link::LinkModel;
use geams_core::topology::{gabriel_planarize, radio_edges};
use geams_core::{EnergyModelParams, NodeId, Protocol, ScenarioConfig};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn params(e_elec: f64, eps_amp: f64) -> PyResult<EnergyModelParams> {
    let p = EnergyModelParams { e_elec, eps_amp };
    if !p.is_valid() {
        return Err(PyValueError::new_err("energy coefficients must be finite and non-negative"));
    }
    Ok(p)
}

/// Transmit energy in joules for `bits` over `distance` metres.
#[pyfunction]
#[pyo3(signature = (bits, distance, e_elec = 5e-6, eps_amp = 1e-9))]
fn tx_energy(bits: u64, distance: f64, e_elec: f64, eps_amp: f64) -> PyResult<f64> {
    if !(distance.is_finite() && distance >= 0.0) {
        return Err(PyValueError::new_err("distance must be finite and non-negative"));
    }
    Ok(geams_core::tx_energy(bits, distance, &params(e_elec, eps_amp)?))
}

/// Receive energy in joules for `bits`.
#[pyfunction]
#[pyo3(signature = (bits, e_elec = 5e-6, eps_amp = 1e-9))]
fn rx_energy(bits: u64, e_elec: f64, eps_amp: f64) -> PyResult<f64> {
    Ok(geams_core::rx_energy(bits, &params(e_elec, eps_amp)?))
}

/// Link rate in bit/s for a link of `length` metres.
#[pyfunction]
#[pyo3(signature = (length, base_rate = 250_000.0))]
fn link_rate(length: f64, base_rate: f64) -> PyResult<f64> {
    LinkModel { base_rate }.rate(length).map_err(value_err)
}

/// 1-based index of the neighbor whose score is closest to the mean.
/// `scores` must already be sorted best first.
#[pyfunction]
fn average_score_index(scores: Vec<f64>) -> PyResult<usize> {
    avg_index(&ranked(&scores)).map_err(value_err)
}

fn ranked(scores: &[f64]) -> BestNeighborSet {
    BestNeighborSet::from_scores(scores.iter().enumerate().map(|(i, &s)| (NodeId(i as u32), s)).collect())
}

/// Smart greedy choice over `scores` for a packet that has travelled
/// `hop_count` hops. `state` is `(expected_hops, pivot)` or None for a new
/// source. Returns `(rank, (expected_hops, pivot))` with a 1-based rank.
#[pyfunction]
#[pyo3(signature = (scores, hop_count, state = None))]
fn select_next_hop(scores: Vec<f64>, hop_count: u32, state: Option<(u32, usize)>) -> PyResult<(usize, (u32, usize))> {
    let set = ranked(&scores);
    let state = state.map(|(expected_hops, pivot)| SourceState { expected_hops, pivot });
    let (id, next) = select(state, &set, hop_count).map_err(value_err)?;
    let rank = set.ids().position(|n| n == id).map(|i| i + 1).unwrap_or(0);
    Ok((rank, (next.expected_hops, next.pivot)))
}

/// A node placement. Node 0 is the sink, node 1 the source.
#[pyclass(name = "Topology", frozen)]
struct PyTopology {
    inner: geams_core::Topology,
}

#[pymethods]
impl PyTopology {
    #[new]
    #[pyo3(signature = (seed, n_sensors))]
    fn new(seed: u64, n_sensors: usize) -> PyResult<Self> {
        let inner = geams_core::generate_topology(seed, n_sensors, &Default::default()).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn positions(&self) -> Vec<(f64, f64)> {
        self.inner.positions().iter().map(|p| (p.x, p.y)).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn radio_edges(&self) -> Vec<(u32, u32)> {
        radio_edges(&self.inner).into_iter().map(|(a, b)| (a.0, b.0)).collect()
    }

    fn gabriel_edges(&self) -> Vec<(u32, u32)> {
        gabriel_planarize(&self.inner).into_iter().map(|(a, b)| (a.0, b.0)).collect()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected_under(&radio_edges(&self.inner))
    }
}

/// Outcome of one simulation run.
#[pyclass(name = "Report", frozen)]
struct PyReport {
    inner: MetricsReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn protocol(&self) -> String {
        self.inner.protocol.to_string()
    }
    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }
    #[getter]
    fn n_sensors(&self) -> usize {
        self.inner.n_sensors
    }
    #[getter]
    fn dead_nodes(&self) -> usize {
        self.inner.dead_nodes
    }
    #[getter]
    fn mean_energy(&self) -> Option<f64> {
        self.inner.mean_energy
    }
    #[getter]
    fn energy_variance(&self) -> Option<f64> {
        self.inner.energy_variance
    }
    #[getter]
    fn delay_mean(&self) -> Option<f64> {
        self.inner.delay_mean
    }
    #[getter]
    fn delay_variance(&self) -> Option<f64> {
        self.inner.delay_variance
    }
    #[getter]
    fn emitted(&self) -> u64 {
        self.inner.emitted
    }
    #[getter]
    fn delivered(&self) -> u64 {
        self.inner.delivered
    }
    #[getter]
    fn lost(&self) -> Vec<(String, u64)> {
        self.inner.lost.iter().map(|(r, c)| (r.as_str().to_string(), c)).collect()
    }
    #[getter]
    fn regional_mean_energy(&self) -> Vec<(f64, f64, f64)> {
        self.inner.regional_mean_energy.iter().map(|r| (r.lo, r.hi, r.mean)).collect()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("protocol", self.protocol())?;
        d.set_item("seed", self.inner.seed)?;
        d.set_item("n_sensors", self.inner.n_sensors)?;
        d.set_item("dead_nodes", self.inner.dead_nodes)?;
        d.set_item("mean_energy", self.inner.mean_energy)?;
        d.set_item("energy_variance", self.inner.energy_variance)?;
        d.set_item("delay_mean", self.inner.delay_mean)?;
        d.set_item("delay_variance", self.inner.delay_variance)?;
        d.set_item("emitted", self.inner.emitted)?;
        d.set_item("delivered", self.inner.delivered)?;
        d.set_item("lost", PyDict::from_sequence(&self.lost().into_pyobject(py)?)?)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Report(protocol={}, n={}, seed={}, dead={}, delivered={}/{})",
            self.protocol(),
            self.inner.n_sensors,
            self.inner.seed,
            self.inner.dead_nodes,
            self.inner.delivered,
            self.inner.emitted
        )
    }
}

fn scenario(json: Option<&str>) -> PyResult<ScenarioConfig> {
    match json {
        Some(text) => ScenarioConfig::from_json_str(text, "<python>").map_err(value_err),
        None => Ok(ScenarioConfig::default()),
    }
}

fn protocol(name: &str) -> PyResult<Protocol> {
    name.parse().map_err(value_err)
}

/// Runs one scenario. `scenario_json` overrides the defaults.
#[pyfunction]
#[pyo3(signature = (protocol_name, n_sensors, seed, scenario_json = None))]
fn run(py: Python<'_>, protocol_name: &str, n_sensors: usize, seed: u64, scenario_json: Option<&str>) -> PyResult<PyReport> {
    let cfg = scenario(scenario_json)?;
    let p = protocol(protocol_name)?;
    let inner = py
        .detach(|| geams_core::sim::run(&cfg, p, n_sensors, seed))
        .map_err(value_err)?;
    Ok(PyReport { inner })
}

/// Runs every protocol x size x seed combination, in plan order.
#[pyfunction]
#[pyo3(signature = (protocols, node_counts, seeds, jobs = 1, scenario_json = None))]
fn run_experiment(
    py: Python<'_>,
    protocols: Vec<String>,
    node_counts: Vec<usize>,
    seeds: Vec<u64>,
    jobs: usize,
    scenario_json: Option<&str>,
) -> PyResult<Vec<PyReport>> {
    let mut plan = ExperimentPlan::from_scenario(scenario(scenario_json)?);
    plan.protocols = protocols.iter().map(|s| protocol(s)).collect::<PyResult<_>>()?;
    plan.node_counts = node_counts;
    plan.seeds = seeds;
    let reports = py.detach(|| run_plan(&plan, jobs.max(1))).map_err(value_err)?;
    Ok(reports.into_iter().map(|inner| PyReport { inner }).collect())
}

/// Default scenario as JSON.
#[pyfunction]
fn default_scenario() -> String {
    ScenarioConfig::default().to_json_pretty()
}

#[pymodule]
fn geams(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(tx_energy, m)?)?;
    m.add_function(wrap_pyfunction!(rx_energy, m)?)?;
    m.add_function(wrap_pyfunction!(link_rate, m)?)?;
    m.add_function(wrap_pyfunction!(average_score_index, m)?)?;
    m.add_function(wrap_pyfunction!(select_next_hop, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(default_scenario, m)?)?;
    m.add_class::<PyTopology>()?;
    m.add_class::<PyReport>()?;
    Ok(())
}
