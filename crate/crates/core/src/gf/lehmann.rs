use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sampling::Sampler;
use super::transitions::{exact_transitions, Branch, GfProblem, TransitionData};
use crate::error::{Error, Result};
use crate::hamiltonian::{ev_to_ha, ha_to_ev, OrbitalEnergies};

/// Residues with Frobenius norm at or below this are dropped.
const NEGLIGIBLE_RESIDUE: f64 = 1e-20;

/// Conditioning bound beyond which `G(z)` counts as singular.
const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct Pole {
    pub branch: Branch,
    /// Excitation energy (Ha).
    pub omega: f64,
    pub residue: DMatrix<Complex64>,
    trace: Complex64,
}

impl Pole {
    pub fn new(branch: Branch, omega: f64, residue: DMatrix<Complex64>) -> Self {
        let trace = residue.trace();
        Self {
            branch,
            omega,
            residue,
            trace,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.trace
    }
}

/// `G(z) = Σ_λ B_λ / (z - ω_λ)` over electron and hole poles.
#[derive(Clone, Debug, PartialEq)]
pub struct LehmannGF {
    pub n_modes: usize,
    /// Chemical potential between the hole and electron poles (Ha).
    pub mu: f64,
    pub e_gs: f64,
    pub poles: Vec<Pole>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GfMode {
    Exact,
    Sampled { n_meas: u64, seed: u64 },
}

impl LehmannGF {
    pub fn from_transitions(td: &TransitionData, problem: &GfProblem) -> Self {
        let mut poles = Vec::new();
        for branch in [Branch::Hole, Branch::Electron] {
            for g in td.groups(branch) {
                if g.matrix.norm() <= NEGLIGIBLE_RESIDUE {
                    continue;
                }
                poles.push(Pole::new(branch, problem.pole(branch, g.energy), g.matrix.clone()));
            }
        }
        Self {
            n_modes: td.n_modes,
            mu: problem.mu(),
            e_gs: td.e_gs,
            poles,
        }
    }

    /// Non-interacting function with one pole per spin orbital at its
    /// orbital energy, occupied orbitals as holes.
    pub fn hartree_fock(eps: &OrbitalEnergies, n_electrons: usize) -> Self {
        let n = 2 * eps.eps.len();
        let mut poles = Vec::new();
        for m in 0..n {
            let mut r = DMatrix::zeros(n, n);
            r[(m, m)] = Complex64::new(1.0, 0.0);
            let branch = if m < n_electrons {
                Branch::Hole
            } else {
                Branch::Electron
            };
            poles.push(Pole::new(branch, eps.eps[m / 2], r));
        }
        let homo = eps.eps[..n_electrons / 2]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let lumo = eps.eps[n_electrons / 2..].iter().copied().fold(f64::INFINITY, f64::min);
        let mu = match (homo.is_finite(), lumo.is_finite()) {
            (true, true) => 0.5 * (homo + lumo),
            (true, false) => homo + 0.5,
            (false, true) => lumo - 0.5,
            _ => 0.0,
        };
        Self {
            n_modes: n,
            mu,
            e_gs: 0.0,
            poles,
        }
    }

    pub fn hole_poles(&self) -> impl Iterator<Item = &Pole> {
        self.poles.iter().filter(|p| p.branch == Branch::Hole)
    }

    pub fn electron_poles(&self) -> impl Iterator<Item = &Pole> {
        self.poles.iter().filter(|p| p.branch == Branch::Electron)
    }

    pub fn eval(&self, z: Complex64) -> DMatrix<Complex64> {
        let mut g = DMatrix::zeros(self.n_modes, self.n_modes);
        for p in &self.poles {
            g += &p.residue * (Complex64::new(1.0, 0.0) / (z - p.omega));
        }
        g
    }

    pub fn trace(&self, z: Complex64) -> Complex64 {
        self.poles.iter().map(|p| p.trace / (z - p.omega)).sum()
    }

    /// Spin block `σ` of `G(z)` over spatial orbitals.
    pub fn spin_block(&self, z: Complex64, spin: usize) -> DMatrix<Complex64> {
        spin_block(&self.eval(z), spin)
    }
}

pub(crate) fn spin_block(m: &DMatrix<Complex64>, spin: usize) -> DMatrix<Complex64> {
    let n = m.nrows() / 2;
    DMatrix::from_fn(n, n, |p, q| m[(2 * p + spin, 2 * q + spin)])
}

/// Green's function of `problem` with exact or sampled residues.
pub fn calc_gf(problem: &GfProblem, mode: GfMode) -> Result<LehmannGF> {
    let td = match mode {
        GfMode::Exact => exact_transitions(problem)?,
        GfMode::Sampled { n_meas, seed } => {
            if n_meas == 0 {
                return Err(Error::Invalid("n_meas must be at least 1".into()));
            }
            Sampler::new(problem)?.transitions(n_meas, seed, 0)?
        }
    };
    Ok(LehmannGF::from_transitions(&td, problem))
}

/// `A(ω) = -(1/π) Im Tr G(ω + iδ)` at absolute energies `omega` (Ha).
pub fn spectral_function(gf: &LehmannGF, omega: &[f64], delta: f64) -> Result<Vec<f64>> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::Invalid(format!("broadening must be positive, got {delta}")));
    }
    Ok(omega
        .iter()
        .map(|&w| -gf.trace(Complex64::new(w, delta)).im / std::f64::consts::PI)
        .collect())
}

/// Evenly spaced grid `min, min + step, ...` up to and including `max` (eV).
pub fn frequency_grid(min_ev: f64, max_ev: f64, step_ev: f64) -> Result<Vec<f64>> {
    if step_ev.is_nan() || step_ev <= 0.0 || max_ev.is_nan() || min_ev.is_nan() || max_ev < min_ev {
        return Err(Error::Invalid(format!(
            "bad frequency window [{min_ev}, {max_ev}] step {step_ev}"
        )));
    }
    let n = ((max_ev - min_ev) / step_ev + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| min_ev + k as f64 * step_ev).collect())
}

/// Absolute energies (Ha) for a grid given in eV relative to `mu`.
pub fn grid_to_absolute(gf: &LehmannGF, omega_ev: &[f64]) -> Vec<f64> {
    omega_ev.iter().map(|w| gf.mu + ev_to_ha(*w)).collect()
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Correlation self-energy per spin block, `Σ_c(z) = G_HF(z)^{-1} - G(z)^{-1}`
/// with `G_HF(z)^{-1} = z - ε`.
pub fn self_energy(gf: &LehmannGF, eps: &OrbitalEnergies, z: Complex64) -> Result<[DMatrix<Complex64>; 2]> {
    let n = eps.eps.len();
    if gf.n_modes != 2 * n {
        return Err(Error::Dimension {
            expected: gf.n_modes,
            found: 2 * n,
        });
    }
    let g = gf.eval(z);
    let block = |spin: usize| -> Result<DMatrix<Complex64>> {
        let gs = spin_block(&g, spin);
        let inv = gs
            .clone()
            .try_inverse()
            .filter(|inv| inv.iter().all(|x| x.is_finite()) && one_norm(&gs) * one_norm(inv) < MAX_CONDITION)
            .ok_or(Error::PoleProximity { re: z.re, im: z.im })?;
        let mut sigma = -inv;
        for p in 0..n {
            sigma[(p, p)] += z - eps.eps[p];
        }
        Ok(sigma)
    };
    Ok([block(0)?, block(1)?])
}

/// One-particle density matrix per spin, `γ_{pq} = Σ_{hole λ} B_λ,pq`.
pub fn density_matrix(gf: &LehmannGF) -> [DMatrix<Complex64>; 2] {
    let full = density_matrix_spin_orbital(gf);
    [spin_block(&full, 0), spin_block(&full, 1)]
}

/// Density matrix over all spin orbitals.
pub fn density_matrix_spin_orbital(gf: &LehmannGF) -> DMatrix<Complex64> {
    let mut g = DMatrix::zeros(gf.n_modes, gf.n_modes);
    for p in gf.hole_poles() {
        g += &p.residue;
    }
    g
}

/// CSV `omega_ev,A` with `omega_ev` relative to the chemical potential.
pub fn spectrum_csv(omega_ev: &[f64], a: &[f64]) -> String {
    let mut out = String::from("omega_ev,A\n");
    for (w, v) in omega_ev.iter().zip(a) {
        let _ = writeln!(out, "{w:.6},{v:.10e}");
    }
    out
}

/// CSV `omega_ev,re_tr_sigma_ev,im_tr_sigma_ev` of `Tr Σ_c(μ + ω + iδ)` summed over spin.
pub fn self_energy_csv(gf: &LehmannGF, eps: &OrbitalEnergies, omega_ev: &[f64], delta: f64) -> Result<String> {
    let mut out = String::from("omega_ev,re_tr_sigma_ev,im_tr_sigma_ev\n");
    for &w in omega_ev {
        let z = Complex64::new(gf.mu + ev_to_ha(w), delta);
        let [a, b] = self_energy(gf, eps, z)?;
        let tr = a.trace() + b.trace();
        let _ = writeln!(out, "{w:.6},{:.10e},{:.10e}", ha_to_ev(tr.re), ha_to_ev(tr.im));
    }
    Ok(out)
}
