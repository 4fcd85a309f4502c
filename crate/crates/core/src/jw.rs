//! Jordan–Wigner encoding of fermionic ladder operators.
//!
//! Spin orbital `m` lives on qubit `m`; occupied is `|1>`. With the parity
//! string `Z_0 ... Z_{m-1}`, the two unitaries
//!
//! ```text
//! U0 = Z_0 ... Z_{m-1} X_m        U1 = i Z_0 ... Z_{m-1} Y_m
//! ```
//!
//! satisfy `a_m = (U0 + U1)/2` and `a_m^† = (U0 - U1)/2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliSum, PauliTerm};

/// Interleaved spin-orbital index: `2p + s`, `s = 0` for up and `1` for down.
#[inline]
pub fn spin_orbital(spatial: usize, spin: usize) -> usize {
    2 * spatial + spin
}

fn check_mode(m: usize, n: usize) -> Result<()> {
    if m >= n {
        return Err(Error::IndexOutOfRange { index: m, len: n });
    }
    Ok(())
}

/// The Majorana pair `(U0, U1)` for mode `m` on `n` qubits.
pub fn jw_majorana_pair(m: usize, n: usize) -> Result<(PauliTerm, PauliTerm)> {
    check_mode(m, n)?;
    let mut ops: Vec<(usize, Letter)> = (0..m).map(|j| (j, Letter::Z)).collect();
    ops.push((m, Letter::X));
    let u0 = PauliTerm::from_sparse(n, Complex64::new(1.0, 0.0), &ops)?;
    ops[m] = (m, Letter::Y);
    let u1 = PauliTerm::from_sparse(n, Complex64::new(0.0, 1.0), &ops)?;
    Ok((u0, u1))
}

pub fn annihilator(m: usize, n: usize) -> Result<PauliSum> {
    let (u0, u1) = jw_majorana_pair(m, n)?;
    let half = Complex64::new(0.5, 0.0);
    PauliSum::from_terms(n, [u0.scaled(half), u1.scaled(half)])
}

pub fn creator(m: usize, n: usize) -> Result<PauliSum> {
    let (u0, u1) = jw_majorana_pair(m, n)?;
    let half = Complex64::new(0.5, 0.0);
    PauliSum::from_terms(n, [u0.scaled(half), u1.scaled(-half)])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self { mode, dagger: false }
    }
}

/// `coeff * ops[0] ops[1] ...`, operators applied right to left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FermionTerm {
    pub coeff: Complex64,
    pub ops: Vec<Ladder>,
}

impl FermionTerm {
    pub fn new(coeff: Complex64, ops: Vec<Ladder>) -> Self {
        Self { coeff, ops }
    }

    pub fn number(m: usize) -> Self {
        Self::new(Complex64::new(1.0, 0.0), vec![Ladder::create(m), Ladder::annihilate(m)])
    }
}

/// Qubit image of a product of ladder operators.
pub fn jw_transform(term: &FermionTerm, n: usize) -> Result<PauliSum> {
    let mut acc = PauliSum::from_term(PauliTerm::identity(n).with_coeff(term.coeff));
    for op in &term.ops {
        let l = if op.dagger {
            creator(op.mode, n)?
        } else {
            annihilator(op.mode, n)?
        };
        acc = acc.product(&l)?;
    }
    let scale = term.coeff.norm();
    acc.simplify(1e-15 * scale.max(1.0));
    Ok(acc)
}

/// Sum of the images of several monomials.
pub fn jw_transform_sum(terms: &[FermionTerm], n: usize) -> Result<PauliSum> {
    let mut out = PauliSum::zero(n);
    for t in terms {
        out.add_sum(&jw_transform(t, n)?)?;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AuxSign {
    Plus,
    Minus,
}

impl AuxSign {
    pub fn value(self) -> f64 {
        match self {
            AuxSign::Plus => 1.0,
            AuxSign::Minus => -1.0,
        }
    }
}

/// Auxiliary ladder pair for modes `(m, m2)`:
/// annihilation `(a_m ± e^{-iπ/4} a_{m2})/2` and its adjoint.
pub fn aux_ladder(m: usize, m2: usize, sign: AuxSign, n: usize) -> Result<(PauliSum, PauliSum)> {
    if m == m2 {
        return Err(Error::InvalidPair(m));
    }
    let phase = Complex64::from_polar(sign.value(), -FRAC_PI_4);
    let mut ann = annihilator(m, n)?;
    ann.add_sum(&annihilator(m2, n)?.scaled(phase))?;
    let ann = ann.scaled(Complex64::new(0.5, 0.0));
    let cre = ann.adjoint();
    Ok((cre, ann))
}
