//! Reference states, single-Pauli-string UCC ansätze and a Nelder–Mead outer loop.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliSum, PauliTerm};
use crate::sim::{Gate, StateVector};

/// Basis state with the `n_elec` lowest spin orbitals occupied.
pub fn prepare_reference(n_qubits: usize, n_elec: usize) -> Result<StateVector> {
    if n_elec > n_qubits {
        return Err(Error::IndexOutOfRange {
            index: n_elec,
            len: n_qubits + 1,
        });
    }
    Ok(StateVector::basis(n_qubits, (1usize << n_elec) - 1))
}

/// `U(θ) = Π_k exp(-iθ_k P_k/2)` acting on a reference determinant,
/// with `generators[0]` applied first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ansatz {
    pub n_qubits: usize,
    pub n_electrons: usize,
    pub generators: Vec<PauliTerm>,
}

impl Ansatz {
    pub fn new(n_qubits: usize, n_electrons: usize, generators: Vec<PauliTerm>) -> Result<Self> {
        for g in &generators {
            if g.n_qubits() != n_qubits {
                return Err(Error::Dimension {
                    expected: n_qubits,
                    found: g.n_qubits(),
                });
            }
            if g.coeff != Complex64::new(1.0, 0.0) && g.coeff != Complex64::new(-1.0, 0.0) {
                return Err(Error::NonUnitary(format!(
                    "generator {g} is not a Hermitian unit string"
                )));
            }
        }
        Ok(Self {
            n_qubits,
            n_electrons,
            generators,
        })
    }

    /// Ansatz with no parameters: the reference determinant itself.
    pub fn reference_only(n_qubits: usize, n_electrons: usize) -> Self {
        Self {
            n_qubits,
            n_electrons,
            generators: Vec::new(),
        }
    }

    pub fn n_params(&self) -> usize {
        self.generators.len()
    }

    pub fn gates(&self, theta: &[f64]) -> Result<Vec<Gate>> {
        if theta.len() != self.n_params() {
            return Err(Error::Dimension {
                expected: self.n_params(),
                found: theta.len(),
            });
        }
        Ok(self
            .generators
            .iter()
            .zip(theta)
            .map(|(p, &t)| Gate::PauliRotation { term: *p, theta: t })
            .collect())
    }

    pub fn state(&self, theta: &[f64]) -> Result<StateVector> {
        let mut s = prepare_reference(self.n_qubits, self.n_electrons)?;
        for g in self.gates(theta)? {
            s.apply(&g)?;
        }
        Ok(s)
    }
}

fn labels(n: usize, ls: &[&str]) -> Result<Vec<PauliTerm>> {
    ls.iter().map(|l| PauliTerm::from_label(n, l)).collect()
}

const H2O_DOUBLES: [&str; 4] = ["Y11 X10 X7 X6", "Y13 X12 X7 X6", "Y11 X10 X9 X8", "Y13 X12 X9 X8"];

/// Built-in ansätze: `lih_u1`, `lih_u2` (12 qubits, 4 electrons) and
/// `h2o_u1`, `h2o_u2` (14 qubits, 10 electrons).
pub fn builtin_ansatz(tag: &str) -> Result<Ansatz> {
    match tag {
        "lih_u1" => Ansatz::new(12, 4, labels(12, &["Y5 X4 X3 X2", "Y11 X10 X3 X2"])?),
        "lih_u2" => Ansatz::new(12, 4, labels(12, &["Y7 X6 X3 X2", "Y9 X8 X3 X2"])?),
        "h2o_u2" => Ansatz::new(14, 10, labels(14, &H2O_DOUBLES)?),
        "h2o_u1" => {
            let mut ls = H2O_DOUBLES.to_vec();
            ls.extend(["Y11 X10 X5 X4", "Y13 X12 X5 X4"]);
            Ansatz::new(14, 10, labels(14, &ls)?)
        }
        _ => Err(Error::Unknown {
            kind: "ansatz",
            name: tag.to_string(),
        }),
    }
}

pub const BUILTIN_ANSATZE: [&str; 4] = ["lih_u1", "lih_u2", "h2o_u1", "h2o_u2"];

pub fn energy(ansatz: &Ansatz, theta: &[f64], h: &PauliSum) -> Result<f64> {
    ansatz.state(theta)?.expectation(h)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Convergence when the simplex energy spread drops below this (Ha).
    pub ftol: f64,
    pub max_evals: usize,
    pub max_iter: usize,
    pub initial_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            ftol: 1e-8,
            max_evals: 2000,
            max_iter: 2000,
            initial_step: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub theta: Vec<f64>,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub theta: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

impl VqeResult {
    /// CSV with columns `iteration, theta_0.., energy_ha`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration");
        for k in 0..self.theta.len() {
            let _ = write!(out, ",theta_{k}");
        }
        out.push_str(",energy_ha\n");
        for row in &self.trace {
            let _ = write!(out, "{}", row.iteration);
            for t in &row.theta {
                let _ = write!(out, ",{t:.12e}");
            }
            let _ = writeln!(out, ",{:.12e}", row.energy);
        }
        out
    }
}

/// Minimizes [`energy`] with Nelder–Mead from `theta0`.
///
/// Running out of iterations or evaluations returns the best point with
/// `converged = false`.
pub fn optimize(ansatz: &Ansatz, h: &PauliSum, theta0: &[f64], cfg: &OptimizerConfig) -> Result<VqeResult> {
    if theta0.iter().any(|t| !t.is_finite()) {
        return Err(Error::Invalid("initial parameters must be finite".into()));
    }
    let f = |t: &[f64]| energy(ansatz, t, h);
    nelder_mead(f, theta0, cfg)
}

fn nelder_mead<F>(f: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<VqeResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let mut evals = 1;
    let f0 = f(x0)?;
    let mut trace = vec![TraceRow {
        iteration: 0,
        theta: x0.to_vec(),
        energy: f0,
    }];
    let finish = |simplex: &[(Vec<f64>, f64)], iterations, evaluations, converged, trace| VqeResult {
        theta: simplex[0].0.clone(),
        energy: simplex[0].1,
        iterations,
        evaluations,
        converged,
        trace,
    };
    let mut simplex = vec![(x0.to_vec(), f0)];
    if n == 0 {
        return Ok(finish(&simplex, 0, evals, true, trace));
    }
    if cfg.max_iter == 0 || cfg.max_evals <= 1 {
        return Ok(finish(&simplex, 0, evals, false, trace));
    }
    for k in 0..n {
        let mut x = x0.to_vec();
        x[k] += cfg.initial_step;
        let fx = f(&x)?;
        evals += 1;
        simplex.push((x, fx));
    }

    let centroid = |s: &[(Vec<f64>, f64)]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        for (x, _) in &s[..n] {
            for (ci, xi) in c.iter_mut().zip(x) {
                *ci += xi / n as f64;
            }
        }
        c
    };
    let along =
        |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(ci, wi)| ci + t * (wi - ci)).collect() };

    let mut iter = 0;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if iter > 0 {
            trace.push(TraceRow {
                iteration: iter,
                theta: simplex[0].0.clone(),
                energy: simplex[0].1,
            });
        }
        if simplex[n].1 - simplex[0].1 < cfg.ftol {
            return Ok(finish(&simplex, iter, evals, true, trace));
        }
        if iter >= cfg.max_iter || evals + 2 > cfg.max_evals {
            return Ok(finish(&simplex, iter, evals, false, trace));
        }
        iter += 1;

        let c = centroid(&simplex);
        let worst = simplex[n].0.clone();
        let xr = along(&c, &worst, -1.0);
        let fr = f(&xr)?;
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(&c, &worst, -2.0);
            let fe = f(&xe)?;
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let x = along(&c, &worst, -0.5);
            let fx = f(&x)?;
            (x, fx)
        } else {
            let x = along(&c, &worst, 0.5);
            let fx = f(&x)?;
            (x, fx)
        };
        evals += 1;
        if fc < fr.min(simplex[n].1) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            v.0 = along(&best, &v.0, 0.5);
            v.1 = f(&v.0)?;
            evals += 1;
        }
    }
}
