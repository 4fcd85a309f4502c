//! Molecular integrals, orbital energies and the qubit Hamiltonian.
//!
//! Everything is in Hartree internally. Spatial orbital `p` with spin `s`
//! maps to spin orbital (and qubit) `2p + s`.

mod fcidump;
mod models;

pub use fcidump::{parse_fcidump, read_fcidump, write_fcidump};
pub use models::builtin_model;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jw::{annihilator, creator, spin_orbital};
use crate::pauli::{PauliSum, PauliTerm};

pub const HARTREE_TO_EV: f64 = 27.211386245988;

pub fn ha_to_ev(e: f64) -> f64 {
    e * HARTREE_TO_EV
}

pub fn ev_to_ha(e: f64) -> f64 {
    e / HARTREE_TO_EV
}

/// One- and two-electron integrals over spatial orbitals, chemists' notation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MolecularIntegrals {
    pub n_orb: usize,
    pub n_elec: usize,
    pub ms2: i64,
    pub e_nucl: f64,
    h: Vec<f64>,
    eri: Vec<f64>,
}

impl MolecularIntegrals {
    pub fn new(n_orb: usize, n_elec: usize) -> Self {
        Self {
            n_orb,
            n_elec,
            ms2: 0,
            e_nucl: 0.0,
            h: vec![0.0; n_orb * n_orb],
            eri: vec![0.0; n_orb.pow(4)],
        }
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_orb
    }

    pub fn n_occupied(&self) -> usize {
        self.n_elec / 2
    }

    #[inline]
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.h[p * self.n_orb + q]
    }

    /// `(pq|rs)`.
    #[inline]
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_orb;
        self.eri[((p * n + q) * n + r) * n + s]
    }

    /// Sets `h_pq = h_qp = v`.
    pub fn set_h(&mut self, p: usize, q: usize, v: f64) {
        let n = self.n_orb;
        self.h[p * n + q] = v;
        self.h[q * n + p] = v;
    }

    /// Sets all eight permutation-equivalent slots of `(pq|rs)`.
    pub fn set_eri(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        let n = self.n_orb;
        let idx = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            self.eri[idx(a, b, c, d)] = v;
        }
    }

    /// Largest deviation from the symmetry of `h` and the 8-fold symmetry of the ERIs.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.n_orb;
        let mut err: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                err = err.max((self.h(p, q) - self.h(q, p)).abs());
                for r in 0..n {
                    for s in 0..n {
                        let v = self.eri(p, q, r, s);
                        for w in [self.eri(q, p, r, s), self.eri(p, q, s, r), self.eri(r, s, p, q)] {
                            err = err.max((v - w).abs());
                        }
                    }
                }
            }
        }
        err
    }

    pub fn validate(&self) -> Result<()> {
        let err = self.symmetry_error();
        if err > 1e-10 {
            return Err(Error::Invalid(format!(
                "integrals violate permutational symmetry by {err:.3e}"
            )));
        }
        if self.n_elec > 2 * self.n_orb {
            return Err(Error::Invalid(format!(
                "{} electrons do not fit in {} spatial orbitals",
                self.n_elec, self.n_orb
            )));
        }
        Ok(())
    }

    /// RHF total energy assembled from orbital energies:
    /// `E_nucl + Σ_{p occ} (h_pp + ε_p)`.
    pub fn hf_energy(&self, eps: &OrbitalEnergies) -> f64 {
        self.e_nucl + (0..self.n_occupied()).map(|p| self.h(p, p) + eps.eps[p]).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitalEnergies {
    pub eps: Vec<f64>,
}

/// Diagonal of the closed-shell Fock matrix with aufbau occupation:
/// `ε_p = h_pp + Σ_{q occ} [2(pp|qq) - (pq|qp)]`.
pub fn hf_orbital_energies(ints: &MolecularIntegrals) -> Result<OrbitalEnergies> {
    if ints.n_elec % 2 == 1 {
        return Err(Error::OddElectronCount(ints.n_elec));
    }
    let occ = ints.n_occupied();
    let eps = (0..ints.n_orb)
        .map(|p| {
            ints.h(p, p)
                + (0..occ)
                    .map(|q| 2.0 * ints.eri(p, p, q, q) - ints.eri(p, q, q, p))
                    .sum::<f64>()
        })
        .collect();
    Ok(OrbitalEnergies { eps })
}

/// Second-quantized electronic Hamiltonian mapped to qubits,
///
/// ```text
/// H = E_nucl + Σ h_pq a†_pσ a_qσ + ½ Σ (pq|rs) a†_pσ a†_rτ a_sτ a_qσ
/// ```
///
/// symmetrized so every coefficient is real.
pub fn build_qubit_hamiltonian(ints: &MolecularIntegrals) -> Result<PauliSum> {
    let n_so = ints.n_qubits();
    let cre: Vec<PauliSum> = (0..n_so).map(|m| creator(m, n_so)).collect::<Result<_>>()?;
    let ann: Vec<PauliSum> = (0..n_so).map(|m| annihilator(m, n_so)).collect::<Result<_>>()?;

    let mut ham = PauliSum::zero(n_so);
    ham.add_term(PauliTerm::identity(n_so).with_coeff(Complex64::new(ints.e_nucl, 0.0)))?;

    let n = ints.n_orb;
    for p in 0..n {
        for q in 0..n {
            let v = ints.h(p, q);
            if v == 0.0 {
                continue;
            }
            for s in 0..2 {
                let op = cre[spin_orbital(p, s)].product(&ann[spin_orbital(q, s)])?;
                ham.add_sum(&op.scaled(Complex64::new(v, 0.0)))?;
            }
        }
    }

    // pair products a†_i a†_j and a_k a_l, reused across integrals
    let mut cc = vec![None; n_so * n_so];
    let mut aa = vec![None; n_so * n_so];
    for i in 0..n_so {
        for j in 0..n_so {
            if i != j {
                cc[i * n_so + j] = Some(cre[i].product(&cre[j])?);
                aa[i * n_so + j] = Some(ann[i].product(&ann[j])?);
            }
        }
    }

    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = ints.eri(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    for sig in 0..2 {
                        for tau in 0..2 {
                            let (ps, qs) = (spin_orbital(p, sig), spin_orbital(q, sig));
                            let (rt, st) = (spin_orbital(r, tau), spin_orbital(s, tau));
                            let (Some(left), Some(right)) = (&cc[ps * n_so + rt], &aa[st * n_so + qs]) else {
                                continue;
                            };
                            let op = left.product(right)?;
                            ham.add_sum(&op.scaled(Complex64::new(0.5 * v, 0.0)))?;
                        }
                    }
                }
            }
        }
    }

    let mut sym = &ham + &ham.adjoint();
    sym = sym.scaled(Complex64::new(0.5, 0.0));
    sym.simplify(1e-14);
    Ok(sym)
}

/// Total number operator `Σ_m n_m`.
pub fn number_operator(n_qubits: usize) -> Result<PauliSum> {
    let mut out = PauliSum::zero(n_qubits);
    for m in 0..n_qubits {
        out.add_sum(&creator(m, n_qubits)?.product(&annihilator(m, n_qubits)?)?)?;
    }
    out.simplify(1e-15);
    Ok(out)
}

/// Total `S_z = ½ Σ_p (n_p↑ - n_p↓)` on interleaved spin orbitals.
pub fn sz_operator(n_qubits: usize) -> Result<PauliSum> {
    let mut out = PauliSum::zero(n_qubits);
    for m in 0..n_qubits {
        let sign = if m % 2 == 0 { 0.5 } else { -0.5 };
        let nm = creator(m, n_qubits)?.product(&annihilator(m, n_qubits)?)?;
        out.add_sum(&nm.scaled(Complex64::new(sign, 0.0)))?;
    }
    out.simplify(1e-15);
    Ok(out)
}
