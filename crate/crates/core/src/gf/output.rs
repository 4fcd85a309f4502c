use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};

use super::transitions::{Branch, Provenance, TransitionData};
use crate::eigen::DEGENERACY_TOL;
use crate::hamiltonian::ha_to_ev;

fn pairs(m: &DMatrix<Complex64>) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect();
    json!(rows)
}

/// JSON view of transition data: complex entries as `[re, im]`, energies in
/// Ha and eV, provenance and grouping threshold recorded.
pub fn transitions_json(td: &TransitionData, mu: f64) -> Value {
    let groups = |branch: Branch| -> Vec<Value> {
        td.groups(branch)
            .iter()
            .filter(|g| g.matrix.iter().any(|c| *c != Complex64::new(0.0, 0.0)))
            .map(|g| {
                let omega = match branch {
                    Branch::Electron => g.energy - td.e_gs,
                    Branch::Hole => td.e_gs - g.energy,
                };
                json!({
                    "sector_energy_ha": g.energy,
                    "omega_ha": omega,
                    "omega_ev": ha_to_ev(omega),
                    "degeneracy": g.degeneracy,
                    "residue": pairs(&g.matrix),
                })
            })
            .collect()
    };
    let provenance = match &td.provenance {
        Provenance::Exact => json!({ "mode": "exact" }),
        Provenance::Sampled {
            n_meas,
            seed,
            repetition,
        } => json!({
            "mode": "sampled",
            "n_meas": n_meas,
            "seed": seed,
            "repetition": repetition,
            "offdiagonal_fill": "conjugate of the recovered (m, m') entry; no symmetrization",
        }),
    };
    json!({
        "n_modes": td.n_modes,
        "e_gs_ha": td.e_gs,
        "e_gs_ev": ha_to_ev(td.e_gs),
        "mu_ha": mu,
        "mu_ev": ha_to_ev(mu),
        "degeneracy_tolerance_ha": DEGENERACY_TOL,
        "provenance": provenance,
        "electron": groups(Branch::Electron),
        "hole": groups(Branch::Hole),
    })
}
