//! Python bindings for the hypocoercivity laboratory.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use hypolab::equilibria::{fast_diffusion_exponents as fd_exponents, Potential};
use hypolab::operators::{CollisionKind, OperatorSet};
use hypolab::simulator::{self, InitialDatum, Scenario};
use hypolab::{spectral, toy, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain { .. } | Error::Config { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_collision(s: &str) -> PyResult<CollisionKind> {
    s.parse().map_err(to_py)
}

fn parse_potential(s: &str) -> PyResult<Potential> {
    s.parse().map_err(to_py)
}

/// Discrete transport, collision and auxiliary operators for
/// `f/√F` on an `nx × nv` grid.
#[pyclass(name = "Operators")]
struct PyOperators {
    scenario: Scenario,
    ops: OperatorSet,
}

impl PyOperators {
    fn check(&self, h: &[f64]) -> PyResult<()> {
        if h.len() != self.ops.size() {
            return Err(PyValueError::new_err(format!("expected {} values, got {}", self.ops.size(), h.len())));
        }
        Ok(())
    }
}

#[pymethods]
impl PyOperators {
    #[new]
    #[pyo3(signature = (collision = "bgk", potential = "power:beta=1", nx = 64, nv = 64))]
    fn new(collision: &str, potential: &str, nx: usize, nv: usize) -> PyResult<Self> {
        let scenario = Scenario::new(parse_collision(collision)?, parse_potential(potential)?, nx, nv);
        let ops = scenario.operators().map_err(to_py)?;
        Ok(Self { scenario, ops })
    }

    #[getter]
    fn size(&self) -> usize {
        self.ops.size()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.ops.grid.x.nodes.clone()
    }

    #[getter]
    fn v(&self) -> Vec<f64> {
        self.ops.grid.v.nodes.clone()
    }

    fn apply_t(&self, h: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(&h)?;
        Ok(self.ops.apply_t(&h))
    }

    fn apply_l(&self, h: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(&h)?;
        Ok(self.ops.apply_l(&h))
    }

    fn project(&self, h: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(&h)?;
        Ok(self.ops.project(&h))
    }

    fn apply_a(&self, h: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(&h)?;
        Ok(self.ops.apply_a(&h))
    }

    fn norm(&self, h: Vec<f64>) -> PyResult<f64> {
        self.check(&h)?;
        Ok(self.ops.norm(&h))
    }

    fn mass(&self, h: Vec<f64>) -> PyResult<f64> {
        self.check(&h)?;
        Ok(self.ops.mass(&h))
    }

    fn modified_entropy(&self, h: Vec<f64>, eps: f64) -> PyResult<f64> {
        self.check(&h)?;
        self.ops.modified_entropy(&h, eps).map_err(to_py)
    }

    fn entropy_dissipation(&self, h: Vec<f64>, eps: f64) -> PyResult<BTreeMap<String, f64>> {
        self.check(&h)?;
        let d = self.ops.entropy_dissipation(&h, eps).map_err(to_py)?;
        Ok(BTreeMap::from([
            ("microscopic".to_string(), d.microscopic),
            ("macroscopic".to_string(), d.macroscopic),
            ("transport_perp".to_string(), d.transport_perp),
            ("transport_aux".to_string(), d.transport_aux),
            ("collision_aux".to_string(), d.collision_aux),
            ("total".to_string(), d.total),
        ]))
    }

    fn random_state(&self, seed: u64) -> PyResult<Vec<f64>> {
        simulator::initial_state(&InitialDatum::RandomZeroMass { seed }, &self.ops).map_err(to_py)
    }

    /// Certified rate and its constants.
    fn certify(&self) -> PyResult<BTreeMap<String, f64>> {
        let (c, _) = spectral::certify(&self.ops, spectral::PowerOptions::default()).map_err(to_py)?;
        Ok(BTreeMap::from([
            ("lambda_m".to_string(), c.lambda_m),
            ("lambda_M".to_string(), c.lambda_big_m),
            ("C_M".to_string(), c.c_m),
            ("eps_star".to_string(), c.eps_star),
            ("kappa".to_string(), c.kappa),
            ("lambda".to_string(), c.lambda),
            ("C".to_string(), c.prefactor),
        ]))
    }

    fn microscopic_gap(&self) -> PyResult<f64> {
        spectral::microscopic_gap(&self.ops.collision).map_err(to_py)
    }

    /// Integrates from a seeded zero-mass datum; returns the sampled series.
    #[pyo3(signature = (t_end = 10.0, seed = 1, eps = None, stride = 10))]
    fn simulate(&self, t_end: f64, seed: u64, eps: Option<f64>, stride: usize) -> PyResult<BTreeMap<String, Vec<f64>>> {
        let mut s = self.scenario.clone();
        s.t_end = t_end;
        s.eps = eps;
        s.stride = stride;
        s.initial = InitialDatum::RandomZeroMass { seed };
        let ts = simulator::integrate(&s, &self.ops).map_err(to_py)?;
        Ok(BTreeMap::from([
            ("t".to_string(), ts.t),
            ("mass".to_string(), ts.mass),
            ("norm".to_string(), ts.norm),
            ("H".to_string(), ts.entropy),
            ("D".to_string(), ts.dissipation),
            ("norm_pi".to_string(), ts.norm_pi),
            ("norm_perp".to_string(), ts.norm_perp),
        ]))
    }
}

#[pyfunction]
fn toy_mode_spectrum(k: i64) -> Vec<(f64, f64)> {
    toy::mode_spectrum(k).iter().map(|z| (z.re, z.im)).collect()
}

#[pyfunction]
fn toy_entropy(k: i64, u: f64, v: f64, eps: f64) -> PyResult<f64> {
    toy::toy_entropy(k, [u, v], eps).map_err(to_py)
}

#[pyfunction]
fn toy_kappa(eps: f64, lam: f64) -> PyResult<f64> {
    toy::toy_kappa(eps, lam).map_err(to_py)
}

/// `(t, |U_k|, fitted rate)` for one mode from `U = (1, 1)`.
#[pyfunction]
#[pyo3(signature = (k, eps = 0.4, t_end = 40.0, dt = 1e-3))]
fn evolve_toy_mode(k: i64, eps: f64, t_end: f64, dt: f64) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let m = toy::evolve_mode(k, eps, t_end, dt, 10, [1.0, 1.0]).map_err(to_py)?;
    let rate = m.fitted_rate().map_err(to_py)?.rate;
    Ok((m.t, m.norm, rate))
}

#[pyfunction]
fn fit_decay_rate(t: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, f64)> {
    let f = simulator::fit_decay_rate(&t, &y, None).map_err(to_py)?;
    Ok((f.rate, f.r_squared))
}

#[pyfunction]
fn hardy_poincare_constant(alpha: f64, d: usize) -> PyResult<f64> {
    spectral::hardy_poincare_constant(alpha, d, spectral::HardyOptions::default()).map_err(to_py)
}

#[pyfunction]
fn fast_diffusion_exponents(m: f64, beta: f64, d: usize) -> PyResult<(f64, f64, f64)> {
    fd_exponents(m, beta, d).map_err(to_py)
}

/// Runs the command-line driver with `args` (without the program name).
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    hypolab::cli::main_with_args(std::iter::once("hypolab".to_string()).chain(args))
}

#[pymodule]
fn hypolab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperators>()?;
    m.add_function(wrap_pyfunction!(toy_mode_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(toy_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(toy_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_toy_mode, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay_rate, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_poincare_constant, m)?)?;
    m.add_function(wrap_pyfunction!(fast_diffusion_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
