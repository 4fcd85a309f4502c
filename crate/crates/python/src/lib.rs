//! Python module `qgf`: ground-state preparation, spectral functions and
//! Galitskii–Migdal energies from exact or sampled Green's functions.

use pyo3::exceptions::{PyMemoryError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::{json, Value};

use qgf::gf::{
    exact_transitions, gm_energy, grid_to_absolute, spectral_function, transitions_json, GfProblem, LehmannGF, Sampler,
    TransitionData,
};
use qgf::hamiltonian::{ha_to_ev, hf_orbital_energies};
use qgf::pipeline::{prepare_problem, run_vqe, GroundState, System};
use qgf::vqe::OptimizerConfig;

fn err(e: qgf::Error) -> PyErr {
    match e {
        qgf::Error::Resource { .. } => PyMemoryError::new_err(e.to_string()),
        qgf::Error::Io(_) => PyOSError::new_err(e.to_string()),
        qgf::Error::ContourNotConverged(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    let text = v.to_string();
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn optimizer(max_iter: usize) -> OptimizerConfig {
    OptimizerConfig {
        max_iter,
        ..OptimizerConfig::default()
    }
}

/// Optimizes a built-in ansatz (or `"none"`) from θ = 0.
///
/// Returns a dict with `theta`, `energy_ha`, `energy_ev`, `iterations`,
/// `evaluations` and `converged`.
#[pyfunction]
#[pyo3(signature = (system, ansatz, max_iter = 2000))]
fn vqe(py: Python<'_>, system: &str, ansatz: &str, max_iter: usize) -> PyResult<Py<PyAny>> {
    let r = py
        .detach(|| {
            let sys = System::load(system)?;
            run_vqe(&sys, ansatz, &optimizer(max_iter)).map(|(_, r)| r)
        })
        .map_err(err)?;
    to_py(
        py,
        &json!({
            "theta": r.theta,
            "energy_ha": r.energy,
            "energy_ev": ha_to_ev(r.energy),
            "iterations": r.iterations,
            "evaluations": r.evaluations,
            "converged": r.converged,
        }),
    )
}

/// N-electron state plus the neighbouring sector spectra of one system.
///
/// `system` is an FCIDUMP path or `builtin:<model>[,key=value...]`;
/// `ansatz` is `fci`, `none` or a built-in ansatz tag.
#[pyclass(frozen)]
struct Problem {
    system: System,
    problem: GfProblem,
}

impl Problem {
    fn transitions(&self, n_meas: Option<u64>, seed: u64, repetition: u64) -> qgf::Result<TransitionData> {
        match n_meas {
            None => exact_transitions(&self.problem),
            Some(0) => Err(qgf::Error::Invalid("n_meas must be at least 1".into())),
            Some(n) => Sampler::new(&self.problem)?.transitions(n, seed, repetition),
        }
    }

    fn gf(&self, n_meas: Option<u64>, seed: u64, repetition: u64) -> qgf::Result<(TransitionData, LehmannGF)> {
        let td = self.transitions(n_meas, seed, repetition)?;
        let gf = LehmannGF::from_transitions(&td, &self.problem);
        Ok((td, gf))
    }
}

#[pymethods]
impl Problem {
    #[new]
    #[pyo3(signature = (system, ansatz = "fci", max_iter = 2000, max_sector_dim = 4096))]
    fn new(py: Python<'_>, system: &str, ansatz: &str, max_iter: usize, max_sector_dim: usize) -> PyResult<Self> {
        let (system, problem, vqe) = py
            .detach(|| {
                let sys = System::load(system)?;
                let gs: GroundState = ansatz.parse()?;
                let (p, vqe) = prepare_problem(&sys, &gs, &optimizer(max_iter), max_sector_dim, None)?;
                Ok((sys, p, vqe))
            })
            .map_err(err)?;
        if let Some(r) = vqe.filter(|r| !r.converged) {
            return Err(PyRuntimeError::new_err(format!(
                "VQE stopped after {} iterations without converging",
                r.iterations
            )));
        }
        Ok(Self { system, problem })
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.problem.n_modes
    }

    #[getter]
    fn n_electrons(&self) -> usize {
        self.problem.n_electrons
    }

    /// `<gs|H|gs>` in eV.
    #[getter]
    fn e_gs_ev(&self) -> f64 {
        ha_to_ev(self.problem.e_gs)
    }

    /// Chemical potential in eV; spectra are reported relative to it.
    #[getter]
    fn mu_ev(&self) -> f64 {
        ha_to_ev(self.problem.mu())
    }

    /// A(ω) on `omega_ev` (relative to μ). Exact when `n_meas` is None,
    /// otherwise sampled with `n_meas` shots per circuit component.
    #[pyo3(signature = (omega_ev, delta_au = 0.02, n_meas = None, seed = 1, repetition = 0))]
    fn spectrum(
        &self,
        py: Python<'_>,
        omega_ev: Vec<f64>,
        delta_au: f64,
        n_meas: Option<u64>,
        seed: u64,
        repetition: u64,
    ) -> PyResult<Vec<f64>> {
        py.detach(|| {
            let (_, gf) = self.gf(n_meas, seed, repetition)?;
            spectral_function(&gf, &grid_to_absolute(&gf, &omega_ev), delta_au)
        })
        .map_err(err)
    }

    /// E_HF, ΔE1, ΔE2 and E_GM (Ha and eV) plus the density matrix per spin.
    #[pyo3(signature = (n_meas = None, seed = 1, repetition = 0))]
    fn gm_energy(&self, py: Python<'_>, n_meas: Option<u64>, seed: u64, repetition: u64) -> PyResult<Py<PyAny>> {
        let report = py
            .detach(|| {
                let (_, gf) = self.gf(n_meas, seed, repetition)?;
                let eps = hf_orbital_energies(&self.system.ints)?;
                gm_energy(&gf, &self.system.ints, &eps)
            })
            .map_err(err)?;
        let v = serde_json::to_value(&report).map_err(|e| err(e.into()))?;
        to_py(py, &v)
    }

    /// Transition groups with residue matrices as `[re, im]` pairs.
    #[pyo3(signature = (n_meas = None, seed = 1, repetition = 0))]
    fn transitions_dict(&self, py: Python<'_>, n_meas: Option<u64>, seed: u64, repetition: u64) -> PyResult<Py<PyAny>> {
        let td = py.detach(|| self.transitions(n_meas, seed, repetition)).map_err(err)?;
        to_py(py, &transitions_json(&td, self.problem.mu()))
    }
}

#[pymodule(name = "qgf")]
fn qgf_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(vqe, m)?)?;
    m.add_class::<Problem>()?;
    Ok(())
}
