use std::f64::consts::FRAC_PI_4;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{diagonalize_sector_cached, SectorSpectrum, SECTOR_LEAK_TOL};
use crate::error::{Error, Result};
use crate::jw::{annihilator, aux_ladder, creator, AuxSign};
use crate::pauli::PauliSum;
use crate::sim::StateVector;

/// Ground state plus the neighbouring sector spectra.
///
/// `plus` is absent when the register is full and `minus` when it is empty.
#[derive(Clone, Debug)]
pub struct GfProblem {
    pub n_modes: usize,
    pub n_electrons: usize,
    pub gs: StateVector,
    pub e_gs: f64,
    pub plus: Option<SectorSpectrum>,
    pub minus: Option<SectorSpectrum>,
}

impl GfProblem {
    /// `gs` must lie in the `n_electrons` sector to within the leak tolerance;
    /// it is renormalized and its energy taken as `<gs|H|gs>`.
    pub fn new(
        h: &PauliSum,
        mut gs: StateVector,
        n_electrons: usize,
        plus: Option<SectorSpectrum>,
        minus: Option<SectorSpectrum>,
    ) -> Result<Self> {
        let n = h.n_qubits();
        if gs.n_qubits() != n {
            return Err(Error::Dimension {
                expected: n,
                found: gs.n_qubits(),
            });
        }
        let total = gs.norm_sqr();
        let leak = (total - gs.sector_weight(n_electrons)).max(0.0) / total;
        if leak > SECTOR_LEAK_TOL {
            return Err(Error::SectorLeak {
                n_electrons,
                weight: leak,
            });
        }
        gs.normalize();
        for (spec, want) in [(&plus, n_electrons + 1), (&minus, n_electrons.wrapping_sub(1))] {
            if let Some(s) = spec {
                if s.n_electrons != want || s.n_qubits != n {
                    return Err(Error::Invalid(format!(
                        "spectrum for {} electrons on {} qubits does not neighbour the {n_electrons}-electron sector",
                        s.n_electrons, s.n_qubits
                    )));
                }
            }
        }
        if plus.is_none() && n_electrons < n || minus.is_none() && n_electrons > 0 {
            return Err(Error::Invalid("missing neighbouring sector spectrum".into()));
        }
        let e_gs = gs.expectation(h)?;
        Ok(Self {
            n_modes: n,
            n_electrons,
            gs,
            e_gs,
            plus,
            minus,
        })
    }

    /// Diagonalizes the `N ± 1` sectors of `h` and wraps `gs`.
    pub fn from_hamiltonian(
        h: &PauliSum,
        gs: StateVector,
        n_electrons: usize,
        max_dim: usize,
        cache_dir: Option<&std::path::Path>,
    ) -> Result<Self> {
        let n = h.n_qubits();
        let plus = if n_electrons < n {
            Some(diagonalize_sector_cached(h, n_electrons + 1, max_dim, cache_dir)?)
        } else {
            None
        };
        let minus = if n_electrons > 0 {
            Some(diagonalize_sector_cached(h, n_electrons - 1, max_dim, cache_dir)?)
        } else {
            None
        };
        Self::new(h, gs, n_electrons, plus, minus)
    }

    pub fn spectrum(&self, branch: Branch) -> Option<&SectorSpectrum> {
        match branch {
            Branch::Electron => self.plus.as_ref(),
            Branch::Hole => self.minus.as_ref(),
        }
    }

    /// Excitation energy of a group: `E^{N+1} - E_gs` or `E_gs - E^{N-1}`.
    pub fn pole(&self, branch: Branch, sector_energy: f64) -> f64 {
        match branch {
            Branch::Electron => sector_energy - self.e_gs,
            Branch::Hole => self.e_gs - sector_energy,
        }
    }

    /// Midpoint between the highest hole pole and the lowest electron pole.
    pub fn mu(&self) -> f64 {
        let hole = self.minus.as_ref().map(|s| self.e_gs - s.ground_energy());
        let elec = self.plus.as_ref().map(|s| s.ground_energy() - self.e_gs);
        match (hole, elec) {
            (Some(h), Some(e)) => 0.5 * (h + e),
            (Some(h), None) => h + 0.5,
            (None, Some(e)) => e - 0.5,
            (None, None) => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    Electron,
    Hole,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Exact,
    Sampled { n_meas: u64, seed: u64, repetition: u64 },
}

/// Residue of one degenerate group: `energy` is the `N ± 1` eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionGroup {
    pub energy: f64,
    pub degeneracy: usize,
    pub matrix: DMatrix<Complex64>,
}

/// Transition matrices for every group of both neighbouring sectors.
///
/// Electron: `B_mm' = <gs|a_m|λ><λ|a_m'^†|gs>`.
/// Hole: `B_mm' = <gs|a_m'^†|λ><λ|a_m|gs>`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionData {
    pub n_modes: usize,
    pub e_gs: f64,
    pub electron: Vec<TransitionGroup>,
    pub hole: Vec<TransitionGroup>,
    pub provenance: Provenance,
}

impl TransitionData {
    pub fn groups(&self, branch: Branch) -> &[TransitionGroup] {
        match branch {
            Branch::Electron => &self.electron,
            Branch::Hole => &self.hole,
        }
    }

    /// `Σ_λ (B^(e)_λ + B^(h)_λ)`.
    pub fn total(&self) -> DMatrix<Complex64> {
        let mut s = DMatrix::zeros(self.n_modes, self.n_modes);
        for g in self.electron.iter().chain(&self.hole) {
            s += &g.matrix;
        }
        s
    }

    /// Largest entry of `Σ_λ (B^(e)_λ + B^(h)_λ) - I`.
    pub fn sum_rule_error(&self) -> f64 {
        let id = DMatrix::<Complex64>::identity(self.n_modes, self.n_modes);
        (self.total() - id).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn empty_groups(spec: Option<&SectorSpectrum>, n: usize) -> Vec<TransitionGroup> {
    spec.map(|s| {
        s.groups()
            .iter()
            .map(|g| TransitionGroup {
                energy: g.energy,
                degeneracy: g.len,
                matrix: DMatrix::zeros(n, n),
            })
            .collect()
    })
    .unwrap_or_default()
}

/// `<λ|op_m|gs>` for every eigenvector (rows) and mode (columns).
fn ladder_overlaps(gs: &StateVector, spec: &SectorSpectrum, ops: &[PauliSum]) -> Result<DMatrix<Complex64>> {
    let mut out = DMatrix::zeros(spec.dim(), ops.len());
    for (m, op) in ops.iter().enumerate() {
        let v = gs.apply_pauli_sum(op)?;
        out.set_column(m, &spec.overlaps(&v)?);
    }
    Ok(out)
}

/// Exact residues from the eigenvectors of both neighbouring sectors.
pub fn exact_transitions(problem: &GfProblem) -> Result<TransitionData> {
    let n = problem.n_modes;
    let gs = &problem.gs;
    let mut electron = empty_groups(problem.plus.as_ref(), n);
    let mut hole = empty_groups(problem.minus.as_ref(), n);

    if let Some(spec) = &problem.plus {
        let cre: Vec<PauliSum> = (0..n).map(|m| creator(m, n)).collect::<Result<_>>()?;
        let c = ladder_overlaps(gs, spec, &cre)?;
        for (g, out) in spec.groups().iter().zip(electron.iter_mut()) {
            let rows = c.rows(g.start, g.len);
            out.matrix = rows.adjoint() * rows;
        }
    }
    if let Some(spec) = &problem.minus {
        let ann: Vec<PauliSum> = (0..n).map(|m| annihilator(m, n)).collect::<Result<_>>()?;
        let d = ladder_overlaps(gs, spec, &ann)?;
        for (g, out) in spec.groups().iter().zip(hole.iter_mut()) {
            let rows = d.rows(g.start, g.len);
            out.matrix = (rows.adjoint() * rows).transpose();
        }
    }
    Ok(TransitionData {
        n_modes: n,
        e_gs: problem.e_gs,
        electron,
        hole,
        provenance: Provenance::Exact,
    })
}

/// Group-resolved probabilities of the auxiliary-ladder states for `(m, m2)`:
/// `D^(e)±_λ = Σ_{λ∈g} |<λ|a^{±†}_{m m2}|gs>|²` and `D^(h)±_λ = Σ |<λ|a^±_{m m2}|gs>|²`,
/// with `a^±_{m m2} = (a_m ± e^{-iπ/4} a_{m2})/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxProbabilities {
    pub electron_plus: Vec<f64>,
    pub electron_minus: Vec<f64>,
    pub hole_plus: Vec<f64>,
    pub hole_minus: Vec<f64>,
}

impl AuxProbabilities {
    pub fn get(&self, branch: Branch, sign: AuxSign) -> &[f64] {
        match (branch, sign) {
            (Branch::Electron, AuxSign::Plus) => &self.electron_plus,
            (Branch::Electron, AuxSign::Minus) => &self.electron_minus,
            (Branch::Hole, AuxSign::Plus) => &self.hole_plus,
            (Branch::Hole, AuxSign::Minus) => &self.hole_minus,
        }
    }
}

fn group_probs(gs: &StateVector, op: &PauliSum, spec: Option<&SectorSpectrum>) -> Result<Vec<f64>> {
    let Some(spec) = spec else { return Ok(Vec::new()) };
    let v = gs.apply_pauli_sum(op)?;
    let ov = spec.overlaps(&v)?;
    Ok(spec
        .groups()
        .iter()
        .map(|g| (g.start..g.start + g.len).map(|k| ov[k].norm_sqr()).sum())
        .collect())
}

/// Exact auxiliary-state probabilities, computed directly from the
/// auxiliary ladder operators.
pub fn exact_aux_probabilities(problem: &GfProblem, m: usize, m2: usize) -> Result<AuxProbabilities> {
    let n = problem.n_modes;
    let (cp, ap) = aux_ladder(m, m2, AuxSign::Plus, n)?;
    let (cm, am) = aux_ladder(m, m2, AuxSign::Minus, n)?;
    let gs = &problem.gs;
    Ok(AuxProbabilities {
        electron_plus: group_probs(gs, &cp, problem.plus.as_ref())?,
        electron_minus: group_probs(gs, &cm, problem.plus.as_ref())?,
        hole_plus: group_probs(gs, &ap, problem.minus.as_ref())?,
        hole_minus: group_probs(gs, &am, problem.minus.as_ref())?,
    })
}

/// Off-diagonal residue from the auxiliary-state probabilities of both orderings:
/// `B_{m m2} = e^{-iπ/4}(D⁺_{m m2} - D⁻_{m m2}) + e^{iπ/4}(D⁺_{m2 m} - D⁻_{m2 m})`.
pub fn recover_offdiagonal(d_plus: f64, d_minus: f64, d_plus_rev: f64, d_minus_rev: f64) -> Complex64 {
    Complex64::from_polar(1.0, -FRAC_PI_4) * (d_plus - d_minus)
        + Complex64::from_polar(1.0, FRAC_PI_4) * (d_plus_rev - d_minus_rev)
}
