//! Probabilistic state preparation followed by ancilla measurement and
//! ideal phase estimation, tallied into histograms.
//!
//! Every circuit component has a fixed joint distribution over
//! (ancilla outcome, energy group). [`ShotTable`] computes it once by running
//! the circuit on the ground state and projecting each ancilla branch onto
//! the neighbouring spectrum; histograms are then drawn from it shot by shot.
//! [`replay_histogram`] instead simulates measurement and collapse for every
//! shot, and serves as the reference for the tables.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::transitions::{recover_offdiagonal, Branch, GfProblem, Provenance, TransitionData, TransitionGroup};
use crate::eigen::ideal_qpe_sample_group;
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::sim::{build_diag_circuit, build_offdiag_circuit, Circuit, StateVector};

/// Branches with less weight than this are treated as empty.
const EMPTY_BRANCH: f64 = 1e-24;

/// One circuit run: `Diag(m)` is the single-ancilla circuit, `OffDiag(m, m2)`
/// the two-ancilla circuit for the ordered pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Component {
    Diag(usize),
    OffDiag(usize, usize),
}

impl Component {
    pub fn n_ancillae(self) -> usize {
        match self {
            Component::Diag(_) => 1,
            Component::OffDiag(..) => 2,
        }
    }

    /// Which neighbouring sector an ancilla outcome lands in.
    ///
    /// Single ancilla: 0 removes an electron, 1 adds one. Two ancillae
    /// (outcome = q0 + 2 q1): q0 selects the branch the same way and q1 the
    /// sign, 0 for `+` and 1 for `-`.
    pub fn branch(self, outcome: u8) -> Branch {
        if outcome & 1 == 1 {
            Branch::Electron
        } else {
            Branch::Hole
        }
    }

    pub fn circuit(self, n_modes: usize) -> Result<Circuit> {
        match self {
            Component::Diag(m) => build_diag_circuit(m, n_modes),
            Component::OffDiag(m, m2) => build_offdiag_circuit(m, m2, n_modes),
        }
    }

    /// Stable index used to derive this component's random stream.
    pub fn stream_index(self, n_modes: usize) -> u64 {
        match self {
            Component::Diag(m) => m as u64,
            Component::OffDiag(m, m2) => (n_modes + m * n_modes + m2) as u64,
        }
    }
}

/// Every component the full Green's function needs: all diagonals, and both
/// orderings of every pair.
pub fn all_components(n_modes: usize) -> Vec<Component> {
    let mut out: Vec<Component> = (0..n_modes).map(Component::Diag).collect();
    for m in 0..n_modes {
        for m2 in 0..m {
            out.push(Component::OffDiag(m, m2));
            out.push(Component::OffDiag(m2, m));
        }
    }
    out
}

/// Joint distribution of (ancilla outcome, energy group) for one component.
#[derive(Clone, Debug)]
pub struct ShotTable {
    pub component: Component,
    pub entries: Vec<(u8, usize, f64)>,
    alias: Option<WeightedAliasIndex<f64>>,
}

impl ShotTable {
    pub fn build(problem: &GfProblem, component: Component) -> Result<Self> {
        let n = problem.n_modes;
        let circuit = component.circuit(n)?;
        let mut state = problem.gs.with_ancillae(component.n_ancillae());
        state.apply_circuit(&circuit)?;
        let mut entries = Vec::new();
        for outcome in 0..(1u8 << component.n_ancillae()) {
            let branch = state.register_branch(n, outcome as usize)?;
            let p = branch.norm_sqr();
            if p < EMPTY_BRANCH {
                continue;
            }
            let spec = problem
                .spectrum(component.branch(outcome))
                .ok_or_else(|| Error::Invalid("branch reaches a sector with no spectrum".into()))?;
            for (g, w) in spec.group_weights(&branch)?.into_iter().enumerate() {
                if p * w > 0.0 {
                    entries.push((outcome, g, p * w));
                }
            }
        }
        let alias = if entries.is_empty() {
            None
        } else {
            Some(
                WeightedAliasIndex::new(entries.iter().map(|e| e.2).collect())
                    .map_err(|e| Error::Invalid(format!("shot table: {e}")))?,
            )
        };
        Ok(Self {
            component,
            entries,
            alias,
        })
    }

    pub fn probability(&self, outcome: u8, group: usize) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.0 == outcome && e.1 == group)
            .map(|e| e.2)
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, n_meas: u64, rng: &mut R) -> Result<Histogram> {
        let alias = self
            .alias
            .as_ref()
            .ok_or_else(|| Error::Invalid("component has no reachable outcomes".into()))?;
        let mut counts = BTreeMap::new();
        for _ in 0..n_meas {
            let (o, g, _) = self.entries[alias.sample(rng)];
            *counts.entry((o, g)).or_insert(0) += 1;
        }
        Ok(Histogram {
            component: self.component,
            n_meas,
            counts,
        })
    }
}

/// Shot tallies keyed by (ancilla outcome, energy group).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub component: Component,
    pub n_meas: u64,
    pub counts: BTreeMap<(u8, usize), u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn frequency(&self, outcome: u8, group: usize) -> f64 {
        self.counts.get(&(outcome, group)).copied().unwrap_or(0) as f64 / self.n_meas as f64
    }

    /// Frequency of each outcome regardless of energy.
    pub fn outcome_frequency(&self, outcome: u8) -> f64 {
        self.counts
            .iter()
            .filter(|((o, _), _)| *o == outcome)
            .map(|(_, c)| *c)
            .sum::<u64>() as f64
            / self.n_meas as f64
    }
}

/// Per-shot simulation: run the circuit, measure the ancillae, collapse,
/// and phase-estimate the collapsed register.
pub fn replay_histogram<R: Rng + ?Sized>(
    problem: &GfProblem,
    component: Component,
    n_meas: u64,
    rng: &mut R,
) -> Result<Histogram> {
    let n = problem.n_modes;
    let circuit = component.circuit(n)?;
    let k = component.n_ancillae();
    let ancillae: Vec<usize> = (n..n + k).collect();
    let mut counts = BTreeMap::new();
    for _ in 0..n_meas {
        let mut state = problem.gs.with_ancillae(k);
        state.apply_circuit(&circuit)?;
        let rec = state.measure(&ancillae, rng)?;
        let outcome = rec.outcome_index() as u8;
        let register = rec.state.register_branch(n, outcome as usize)?;
        let spec = problem
            .spectrum(component.branch(outcome))
            .ok_or_else(|| Error::Invalid("branch reaches a sector with no spectrum".into()))?;
        let g = ideal_qpe_sample_group(&register, spec, rng)?;
        *counts.entry((outcome, g)).or_insert(0) += 1;
    }
    Ok(Histogram {
        component,
        n_meas,
        counts,
    })
}

/// Diagonal estimates `B̂_mm` for one mode from a fresh histogram.
pub fn sample_diag<R: Rng + ?Sized>(problem: &GfProblem, m: usize, n_meas: u64, rng: &mut R) -> Result<Histogram> {
    if m >= problem.n_modes {
        return Err(Error::IndexOutOfRange {
            index: m,
            len: problem.n_modes,
        });
    }
    ShotTable::build(problem, Component::Diag(m))?.sample(n_meas, rng)
}

/// Histograms for both orderings of the pair `(m, m2)`.
pub fn sample_offdiag<R: Rng + ?Sized>(
    problem: &GfProblem,
    m: usize,
    m2: usize,
    n_meas: u64,
    rng: &mut R,
) -> Result<(Histogram, Histogram)> {
    if m == m2 {
        return Err(Error::InvalidPair(m));
    }
    let a = ShotTable::build(problem, Component::OffDiag(m, m2))?.sample(n_meas, rng)?;
    let b = ShotTable::build(problem, Component::OffDiag(m2, m))?.sample(n_meas, rng)?;
    Ok((a, b))
}

/// Shot tables for every component of a problem, built once and sampled many times.
pub struct Sampler<'a> {
    problem: &'a GfProblem,
    tables: Vec<ShotTable>,
}

impl<'a> Sampler<'a> {
    pub fn new(problem: &'a GfProblem) -> Result<Self> {
        let tables = all_components(problem.n_modes)
            .into_par_iter()
            .map(|c| ShotTable::build(problem, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { problem, tables })
    }

    pub fn problem(&self) -> &GfProblem {
        self.problem
    }

    pub fn tables(&self) -> &[ShotTable] {
        &self.tables
    }

    /// One histogram per component, each from its own substream of `seed`
    /// addressed by `(repetition, n_meas, component)`.
    pub fn histograms(&self, n_meas: u64, seed: u64, repetition: u64) -> Result<Vec<Histogram>> {
        let n = self.problem.n_modes;
        self.tables
            .par_iter()
            .map(|t| {
                let mut rng = substream(seed, &[repetition, n_meas, t.component.stream_index(n)]);
                t.sample(n_meas, &mut rng)
            })
            .collect()
    }

    pub fn transitions(&self, n_meas: u64, seed: u64, repetition: u64) -> Result<TransitionData> {
        let hists = self.histograms(n_meas, seed, repetition)?;
        let mut td = transitions_from_histograms(self.problem, &hists)?;
        td.provenance = Provenance::Sampled {
            n_meas,
            seed,
            repetition,
        };
        Ok(td)
    }
}

fn empty_groups(problem: &GfProblem, branch: Branch) -> Vec<TransitionGroup> {
    let n = problem.n_modes;
    problem
        .spectrum(branch)
        .map(|s| {
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

/// Assembles estimated residues from component histograms.
///
/// Diagonal entries are the electron/hole frequencies of the single-ancilla
/// circuits. For a pair `(m, m2)` the electron outcomes of `OffDiag(m, m2)`
/// estimate `D^(e)±_{m m2}` while its hole outcomes estimate `D^(h)±_{m2 m}`,
/// so the hole probabilities are read from the reversed ordering. The
/// `(m2, m)` entry is filled by conjugation.
pub fn transitions_from_histograms(problem: &GfProblem, hists: &[Histogram]) -> Result<TransitionData> {
    let mut electron = empty_groups(problem, Branch::Electron);
    let mut hole = empty_groups(problem, Branch::Hole);
    let by_comp: BTreeMap<Component, &Histogram> = hists.iter().map(|h| (h.component, h)).collect();

    for h in hists {
        if let Component::Diag(m) = h.component {
            for (&(o, g), &c) in &h.counts {
                let f = Complex64::new(c as f64 / h.n_meas as f64, 0.0);
                let groups = match h.component.branch(o) {
                    Branch::Electron => &mut electron,
                    Branch::Hole => &mut hole,
                };
                groups[g].matrix[(m, m)] += f;
            }
        }
    }

    // outcome codes: q0 + 2 q1
    const PLUS_E: u8 = 1;
    const MINUS_E: u8 = 3;
    const PLUS_H: u8 = 0;
    const MINUS_H: u8 = 2;
    for (&comp, &fwd) in &by_comp {
        let Component::OffDiag(m, m2) = comp else { continue };
        if m < m2 {
            continue;
        }
        let rev = by_comp
            .get(&Component::OffDiag(m2, m))
            .ok_or_else(|| Error::Invalid(format!("missing histogram for pair ({m2}, {m})")))?;
        for (g, grp) in electron.iter_mut().enumerate() {
            let b = recover_offdiagonal(
                fwd.frequency(PLUS_E, g),
                fwd.frequency(MINUS_E, g),
                rev.frequency(PLUS_E, g),
                rev.frequency(MINUS_E, g),
            );
            grp.matrix[(m, m2)] = b;
            grp.matrix[(m2, m)] = b.conj();
        }
        for (g, grp) in hole.iter_mut().enumerate() {
            // D^(h)_{m m2} comes from the reversed circuit
            let b = recover_offdiagonal(
                rev.frequency(PLUS_H, g),
                rev.frequency(MINUS_H, g),
                fwd.frequency(PLUS_H, g),
                fwd.frequency(MINUS_H, g),
            );
            grp.matrix[(m, m2)] = b;
            grp.matrix[(m2, m)] = b.conj();
        }
    }

    Ok(TransitionData {
        n_modes: problem.n_modes,
        e_gs: problem.e_gs,
        electron,
        hole,
        provenance: Provenance::Exact,
    })
}

/// Register-plus-ancilla state after one component's circuit acts on the ground state.
pub fn circuit_output(problem: &GfProblem, component: Component) -> Result<StateVector> {
    let mut s = problem.gs.with_ancillae(component.n_ancillae());
    s.apply_circuit(&component.circuit(problem.n_modes)?)?;
    Ok(s)
}
