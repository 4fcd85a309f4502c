//! Glue from a system description and a ground-state choice to a [`GfProblem`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::eigen::diagonalize_sector_cached;
use crate::error::{Error, Result};
use crate::gf::GfProblem;
use crate::hamiltonian::{build_qubit_hamiltonian, builtin_model, read_fcidump, MolecularIntegrals};
use crate::pauli::PauliSum;
use crate::vqe::{builtin_ansatz, optimize, Ansatz, OptimizerConfig, VqeResult};

/// Integrals from `builtin:<model>[,key=value...]` or an FCIDUMP path.
pub fn load_system(source: &str) -> Result<MolecularIntegrals> {
    let Some(rest) = source.strip_prefix("builtin:") else {
        return read_fcidump(source);
    };
    let bad = |msg: String| Error::Source {
        source_str: source.to_string(),
        msg,
    };
    let mut parts = rest.split(',').map(str::trim);
    let name = parts
        .next()
        .filter(|n| !n.is_empty())
        .ok_or_else(|| bad("missing model name".into()))?;
    let mut params = BTreeMap::new();
    for kv in parts {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got '{kv}'")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| bad(format!("parameter '{}' is not a number", k.trim())))?;
        if params.insert(k.trim().to_string(), v).is_some() {
            return Err(bad(format!("parameter '{}' given twice", k.trim())));
        }
    }
    builtin_model(name, &params)
}

/// Integrals together with their qubit Hamiltonian.
#[derive(Clone, Debug)]
pub struct System {
    pub ints: MolecularIntegrals,
    pub h: PauliSum,
}

impl System {
    pub fn load(source: &str) -> Result<Self> {
        Self::from_integrals(load_system(source)?)
    }

    pub fn from_integrals(ints: MolecularIntegrals) -> Result<Self> {
        ints.validate()?;
        let h = build_qubit_hamiltonian(&ints)?;
        Ok(Self { ints, h })
    }

    pub fn n_qubits(&self) -> usize {
        self.ints.n_qubits()
    }
}

/// Which N-electron state the Green's function is built on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroundState {
    /// Exact lowest eigenvector of the sector.
    Fci,
    /// The reference determinant.
    Reference,
    /// Optimized built-in ansatz, projected onto the sector.
    Ansatz(String),
}

impl FromStr for GroundState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fci" => Ok(Self::Fci),
            "none" => Ok(Self::Reference),
            tag => {
                builtin_ansatz(tag)?;
                Ok(Self::Ansatz(tag.to_string()))
            }
        }
    }
}

impl fmt::Display for GroundState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fci => f.write_str("fci"),
            Self::Reference => f.write_str("none"),
            Self::Ansatz(tag) => f.write_str(tag),
        }
    }
}

/// Ansatz for `tag` (`none` gives the bare reference), checked against the system size.
pub fn ansatz_for(system: &System, tag: &str) -> Result<Ansatz> {
    let a = if tag == "none" {
        Ansatz::reference_only(system.n_qubits(), system.ints.n_elec)
    } else {
        builtin_ansatz(tag)?
    };
    if a.n_qubits != system.n_qubits() || a.n_electrons != system.ints.n_elec {
        return Err(Error::Invalid(format!(
            "ansatz '{tag}' is for {} electrons on {} qubits, system has {} on {}",
            a.n_electrons,
            a.n_qubits,
            system.ints.n_elec,
            system.n_qubits()
        )));
    }
    Ok(a)
}

/// Runs the optimizer from θ = 0.
pub fn run_vqe(system: &System, tag: &str, cfg: &OptimizerConfig) -> Result<(Ansatz, VqeResult)> {
    let a = ansatz_for(system, tag)?;
    let r = optimize(&a, &system.h, &vec![0.0; a.n_params()], cfg)?;
    Ok((a, r))
}

/// Builds the Green's function problem for `gs`. For an ansatz the VQE result
/// is returned alongside; callers decide what to do if it did not converge.
pub fn prepare_problem(
    system: &System,
    gs: &GroundState,
    cfg: &OptimizerConfig,
    max_dim: usize,
    cache_dir: Option<&Path>,
) -> Result<(GfProblem, Option<VqeResult>)> {
    let n = system.ints.n_elec;
    let (state, vqe) = match gs {
        GroundState::Fci => (
            diagonalize_sector_cached(&system.h, n, max_dim, cache_dir)?.ground_state(),
            None,
        ),
        GroundState::Reference => (ansatz_for(system, "none")?.state(&[])?, None),
        GroundState::Ansatz(tag) => {
            let (a, r) = run_vqe(system, tag, cfg)?;
            let mut s = a.state(&r.theta)?;
            // the single-string generators do not conserve particle number
            s.project_to_sector(n);
            if s.normalize() == 0.0 {
                return Err(Error::SectorLeak {
                    n_electrons: n,
                    weight: 1.0,
                });
            }
            (s, Some(r))
        }
    };
    let problem = GfProblem::from_hamiltonian(&system.h, state, n, max_dim, cache_dir)?;
    Ok((problem, vqe))
}
