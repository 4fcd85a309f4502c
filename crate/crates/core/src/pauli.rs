//! Phased Pauli strings and sums of them.
//!
//! A string is stored as a pair of bitmasks over at most 64 qubits: bit `j`
//! of `x` is set for X or Y on qubit `j`, bit `j` of `z` for Z or Y. The
//! coefficient is a full complex scalar, so a [`PauliTerm`] can carry the
//! `i` of a Majorana partner or the `e^{iπ/4}` of an auxiliary ladder
//! operator without special casing.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Powers of `i`, indexed by exponent mod 4.
pub(crate) const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn index(self) -> usize {
        match self {
            Letter::I => 0,
            Letter::X => 1,
            Letter::Y => 2,
            Letter::Z => 3,
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// Single-qubit products `a * b = i^k c`, stored as `(c, k)`.
const PRODUCT_TABLE: [[(Letter, u8); 4]; 4] = {
    use Letter::*;
    [
        [(I, 0), (X, 0), (Y, 0), (Z, 0)],
        [(X, 0), (I, 0), (Z, 1), (Y, 3)],
        [(Y, 0), (Z, 3), (I, 0), (X, 1)],
        [(Z, 0), (Y, 1), (X, 3), (I, 0)],
    ]
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    n_qubits: usize,
    x: u64,
    z: u64,
    pub coeff: Complex64,
}

impl PauliTerm {
    pub fn identity(n_qubits: usize) -> Self {
        Self::from_masks(n_qubits, 0, 0, ONE)
    }

    pub(crate) fn from_masks(n_qubits: usize, x: u64, z: u64, coeff: Complex64) -> Self {
        debug_assert!(n_qubits <= MAX_QUBITS);
        Self { n_qubits, x, z, coeff }
    }

    /// Builds a term from a dense letter sequence, `letters[j]` acting on qubit `j`.
    pub fn new(coeff: Complex64, letters: &[Letter]) -> Result<Self> {
        if letters.len() > MAX_QUBITS {
            return Err(Error::Dimension {
                expected: MAX_QUBITS,
                found: letters.len(),
            });
        }
        let mut x = 0u64;
        let mut z = 0u64;
        for (j, l) in letters.iter().enumerate() {
            let (bx, bz) = l.bits();
            x |= (bx as u64) << j;
            z |= (bz as u64) << j;
        }
        Ok(Self::from_masks(letters.len(), x, z, coeff))
    }

    /// Builds a term from `(qubit, letter)` pairs; unlisted qubits carry `I`.
    pub fn from_sparse(n_qubits: usize, coeff: Complex64, ops: &[(usize, Letter)]) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::Dimension {
                expected: MAX_QUBITS,
                found: n_qubits,
            });
        }
        let mut letters = vec![Letter::I; n_qubits];
        for &(j, l) in ops {
            if j >= n_qubits {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    len: n_qubits,
                });
            }
            letters[j] = l;
        }
        Self::new(coeff, &letters)
    }

    /// Parses labels such as `"Y5 X4 X3 X2"` or `"Y5X4X3X2"` with unit coefficient.
    pub fn from_label(n_qubits: usize, label: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("malformed Pauli label '{label}'"));
        let mut ops = Vec::new();
        let mut chars = label.chars().filter(|c| !c.is_whitespace()).peekable();
        while let Some(c) = chars.next() {
            let l = match c.to_ascii_uppercase() {
                'I' => Letter::I,
                'X' => Letter::X,
                'Y' => Letter::Y,
                'Z' => Letter::Z,
                _ => return Err(bad()),
            };
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let q: usize = digits.parse().map_err(|_| bad())?;
            if ops.iter().any(|&(j, _)| j == q) {
                return Err(bad());
            }
            ops.push((q, l));
        }
        Self::from_sparse(n_qubits, ONE, &ops)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn pattern(&self) -> (u64, u64) {
        (self.x, self.z)
    }

    pub fn letter(&self, qubit: usize) -> Letter {
        Letter::from_bits((self.x >> qubit) & 1 == 1, (self.z >> qubit) & 1 == 1)
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n_qubits).map(|j| self.letter(j)).collect()
    }

    /// Qubits on which the string acts non-trivially.
    pub fn support(&self) -> Vec<usize> {
        let m = self.x | self.z;
        (0..self.n_qubits).filter(|&j| (m >> j) & 1 == 1).collect()
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn with_coeff(mut self, coeff: Complex64) -> Self {
        self.coeff = coeff;
        self
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        self.coeff *= s;
        self
    }

    pub fn adjoint(&self) -> Self {
        Self {
            coeff: self.coeff.conj(),
            ..*self
        }
    }

    pub fn commutes_with(&self, other: &PauliTerm) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Action on a computational basis state: `P|b> = phase |b ^ x>`.
    #[inline]
    pub fn act_on_basis(&self, b: u64) -> (u64, Complex64) {
        let sign = if (b & self.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        (b ^ self.x, self.coeff * I_POW[(self.y_count() % 4) as usize] * sign)
    }

    /// Dense `2^n x 2^n` matrix, qubit 0 least significant in the basis index.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            let (t, ph) = self.act_on_basis(b as u64);
            m[(t as usize, b)] += ph;
        }
        m
    }
}

/// Product `a * b` in the Pauli group, with coefficients multiplied.
pub fn multiply(a: &PauliTerm, b: &PauliTerm) -> Result<PauliTerm> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::Dimension {
            expected: a.n_qubits,
            found: b.n_qubits,
        });
    }
    let mut phase = 0u32;
    let mut x = 0u64;
    let mut z = 0u64;
    for j in 0..a.n_qubits {
        let (c, k) = PRODUCT_TABLE[a.letter(j).index()][b.letter(j).index()];
        phase += k as u32;
        let (bx, bz) = c.bits();
        x |= (bx as u64) << j;
        z |= (bz as u64) << j;
    }
    Ok(PauliTerm::from_masks(
        a.n_qubits,
        x,
        z,
        a.coeff * b.coeff * I_POW[(phase % 4) as usize],
    ))
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:+.6}{:+.6}i)", self.coeff.re, self.coeff.im)?;
        let support = self.support();
        if support.is_empty() {
            return write!(f, " I");
        }
        for j in support.into_iter().rev() {
            write!(f, " {}{}", self.letter(j).as_char(), j)?;
        }
        Ok(())
    }
}

/// Terms with the same x-mask share the basis-state permutation they induce.
/// Grouping by it turns `P|b>` evaluation into one index flip per group.
#[derive(Clone, Debug)]
pub struct FlipGroup {
    pub x: u64,
    /// `(z mask, coefficient * i^{#Y})` for each term in the group.
    pub terms: Vec<(u64, Complex64)>,
}

impl FlipGroup {
    #[inline]
    pub fn diagonal_factor(&self, b: u64) -> Complex64 {
        let mut acc = ZERO;
        for &(z, c) in &self.terms {
            if (b & z).count_ones() % 2 == 1 {
                acc -= c;
            } else {
                acc += c;
            }
        }
        acc
    }
}

/// A linear combination of Pauli strings with canonically merged patterns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<(u64, u64), Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::from_term(PauliTerm::identity(n_qubits))
    }

    pub fn from_term(t: PauliTerm) -> Self {
        let mut s = Self::zero(t.n_qubits);
        s.terms.insert(t.pattern(), t.coeff);
        s
    }

    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        let mut s = Self::zero(n_qubits);
        for t in terms {
            s.add_term(t)?;
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = PauliTerm> + '_ {
        self.terms
            .iter()
            .map(move |(&(x, z), &c)| PauliTerm::from_masks(self.n_qubits, x, z, c))
    }

    pub fn coefficient(&self, pattern: (u64, u64)) -> Complex64 {
        self.terms.get(&pattern).copied().unwrap_or(ZERO)
    }

    pub fn add_term(&mut self, t: PauliTerm) -> Result<()> {
        if t.n_qubits != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: t.n_qubits,
            });
        }
        *self.terms.entry(t.pattern()).or_insert(ZERO) += t.coeff;
        Ok(())
    }

    pub fn add_sum(&mut self, other: &PauliSum) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        for (&p, &c) in &other.terms {
            *self.terms.entry(p).or_insert(ZERO) += c;
        }
        Ok(())
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(&p, &c)| (p, c * s)).collect(),
        }
    }

    pub fn product(&self, other: &PauliSum) -> Result<Self> {
        let mut out = Self::zero(self.n_qubits);
        for a in self.terms() {
            for b in other.terms() {
                out.add_term(multiply(&a, &b)?)?;
            }
        }
        Ok(out)
    }

    /// Conjugate transpose. Pauli strings are Hermitian, so only coefficients change.
    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(&p, &c)| (p, c.conj())).collect(),
        }
    }

    /// Drops terms with `|c| <= tol`.
    pub fn simplify(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() > tol);
    }

    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    pub fn flip_groups(&self) -> Vec<FlipGroup> {
        let mut groups: BTreeMap<u64, Vec<(u64, Complex64)>> = BTreeMap::new();
        for t in self.terms() {
            let c = t.coeff * I_POW[(t.y_count() % 4) as usize];
            groups.entry(t.x).or_default().push((t.z, c));
        }
        groups.into_iter().map(|(x, terms)| FlipGroup { x, terms }).collect()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for t in self.terms() {
            for b in 0..dim {
                let (target, ph) = t.act_on_basis(b as u64);
                m[(target as usize, b)] += ph;
            }
        }
        m
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl Add for &PauliSum {
    type Output = PauliSum;

    /// Panics on mismatched qubit counts; use [`PauliSum::add_sum`] for a checked sum.
    fn add(self, rhs: &PauliSum) -> PauliSum {
        let mut out = self.clone();
        out.add_sum(rhs).expect("qubit counts must match");
        out
    }
}

impl Mul for &PauliSum {
    type Output = PauliSum;

    /// Panics on mismatched qubit counts; use [`PauliSum::product`] for a checked product.
    fn mul(self, rhs: &PauliSum) -> PauliSum {
        self.product(rhs).expect("qubit counts must match")
    }
}
