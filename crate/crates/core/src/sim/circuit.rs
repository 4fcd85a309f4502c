use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

use super::state::StateVector;
use crate::error::{Error, Result};
use crate::jw::jw_majorana_pair;
use crate::pauli::PauliTerm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    X(usize),
    H(usize),
    /// `exp(-iθX/2)`.
    Rx(usize, f64),
    /// `exp(-iθZ/2)`.
    Rz(usize, f64),
    /// `diag(1, e^{iφ})`.
    Phase(usize, f64),
    Cnot {
        control: usize,
        target: usize,
    },
    /// Unit-modulus Pauli string applied when every `(qubit, value)` control matches.
    ControlledPauli {
        controls: Vec<(usize, bool)>,
        term: PauliTerm,
    },
    /// `exp(-iθP/2)` for a Hermitian string `P = ±(X|Y|Z)...`.
    PauliRotation {
        term: PauliTerm,
        theta: f64,
    },
}

impl Gate {
    pub(crate) fn check_unitary(&self) -> Result<()> {
        match self {
            Gate::ControlledPauli { term, .. } => {
                if (term.coeff.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::NonUnitary(format!(
                        "Pauli coefficient {} has modulus != 1",
                        term.coeff
                    )));
                }
            }
            Gate::PauliRotation { term, .. }
                if term.coeff.im.abs() > 1e-12 || (term.coeff.re.abs() - 1.0).abs() > 1e-12 =>
            {
                return Err(Error::NonUnitary(format!(
                    "rotation generator coefficient {} is not ±1",
                    term.coeff
                )));
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        self.gates.push(g);
        self
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Dense unitary, built column by column from basis states.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            let mut s = StateVector::basis(self.n_qubits, b);
            s.apply_circuit(self)?;
            for (r, a) in s.amplitudes().iter().enumerate() {
                m[(r, b)] = *a;
            }
        }
        Ok(m)
    }
}

/// Pads a register-sized Pauli string with identities on `extra` higher qubits.
fn widen(term: &PauliTerm, extra: usize) -> Result<PauliTerm> {
    let n = term.n_qubits() + extra;
    let ops: Vec<_> = term.support().into_iter().map(|q| (q, term.letter(q))).collect();
    PauliTerm::from_sparse(n, term.coeff, &ops)
}

/// Single-ancilla circuit for mode `m` on an `n_register`-qubit register.
///
/// The ancilla sits at index `n_register`. Starting from `|0>|ψ>` it
/// produces `|0> a_m|ψ> + |1> a_m^†|ψ>`.
pub fn build_diag_circuit(m: usize, n_register: usize) -> Result<Circuit> {
    let (u0, u1) = jw_majorana_pair(m, n_register)?;
    let a = n_register;
    let mut c = Circuit::new(n_register + 1);
    c.push(Gate::H(a))
        .push(Gate::ControlledPauli {
            controls: vec![(a, false)],
            term: widen(&u0, 1)?,
        })
        .push(Gate::ControlledPauli {
            controls: vec![(a, true)],
            term: widen(&u1, 1)?,
        })
        .push(Gate::H(a));
    Ok(c)
}

/// Two-ancilla circuit for the mode pair `(m, m2)`.
///
/// Ancilla `q0` sits at index `n_register` and `q1` at `n_register + 1`.
/// From `|00>|ψ>` the branch with `q0 = 1` carries
/// `(a_m^† ± e^{iπ/4} a_{m2}^†)|ψ>/2` and `q0 = 0` carries
/// `(a_m ± e^{iπ/4} a_{m2})|ψ>/2`; `q1 = 0` selects `+` and `q1 = 1` selects `-`.
pub fn build_offdiag_circuit(m: usize, m2: usize, n_register: usize) -> Result<Circuit> {
    if m == m2 {
        return Err(Error::InvalidPair(m));
    }
    let (u0m, u1m) = jw_majorana_pair(m, n_register)?;
    let (u0n, u1n) = jw_majorana_pair(m2, n_register)?;
    let (q0, q1) = (n_register, n_register + 1);
    let mut c = Circuit::new(n_register + 2);
    c.push(Gate::H(q0)).push(Gate::H(q1));
    for (ctl0, ctl1, t) in [(false, false, &u0m), (true, false, &u1m)] {
        c.push(Gate::ControlledPauli {
            controls: vec![(q0, ctl0), (q1, ctl1)],
            term: widen(t, 2)?,
        });
    }
    c.push(Gate::Phase(q1, FRAC_PI_4));
    for (ctl0, ctl1, t) in [(false, true, &u0n), (true, true, &u1n)] {
        c.push(Gate::ControlledPauli {
            controls: vec![(q0, ctl0), (q1, ctl1)],
            term: widen(t, 2)?,
        });
    }
    c.push(Gate::H(q0)).push(Gate::H(q1));
    Ok(c)
}
