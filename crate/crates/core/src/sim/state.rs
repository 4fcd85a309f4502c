use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{PauliSum, PauliTerm};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense amplitudes over `2^n` basis states; qubit `j` is bit `j` of the index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct MeasurementRecord {
    /// Outcome bit for each measured qubit, in the order requested.
    pub outcome: Vec<bool>,
    pub probability: f64,
    pub state: StateVector,
}

impl MeasurementRecord {
    /// Outcome bits packed with the first measured qubit least significant.
    pub fn outcome_index(&self) -> usize {
        self.outcome.iter().enumerate().map(|(k, &b)| (b as usize) << k).sum()
    }
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::Dimension {
                expected: 1 << n_qubits,
                found: amps.len(),
            });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm and returns the old squared norm.
    pub fn normalize(&mut self) -> f64 {
        let n2 = self.norm_sqr();
        if n2 > 0.0 {
            let s = 1.0 / n2.sqrt();
            self.amps.iter_mut().for_each(|a| *a *= s);
        }
        n2
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Weight on basis states with exactly `n_electrons` set bits.
    pub fn sector_weight(&self, n_electrons: usize) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(b, _)| b.count_ones() as usize == n_electrons)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Zeroes every amplitude outside the `n_electrons` sector (no renormalization).
    pub fn project_to_sector(&mut self, n_electrons: usize) {
        for (b, a) in self.amps.iter_mut().enumerate() {
            if b.count_ones() as usize != n_electrons {
                *a = ZERO;
            }
        }
    }

    /// Appends `k` ancilla qubits in `|0>` above the existing register.
    pub fn with_ancillae(&self, k: usize) -> Self {
        let mut amps = self.amps.clone();
        amps.resize(self.amps.len() << k, ZERO);
        Self {
            n_qubits: self.n_qubits + k,
            amps,
        }
    }

    /// Unnormalized register state for a fixed value of the top `n_qubits - n_register` qubits.
    pub fn register_branch(&self, n_register: usize, ancilla_value: usize) -> Result<Self> {
        if n_register > self.n_qubits || ancilla_value >> (self.n_qubits - n_register) != 0 {
            return Err(Error::IndexOutOfRange {
                index: ancilla_value,
                len: 1 << (self.n_qubits - n_register.min(self.n_qubits)),
            });
        }
        let size = 1 << n_register;
        let start = ancilla_value * size;
        Ok(Self {
            n_qubits: n_register,
            amps: self.amps[start..start + size].to_vec(),
        })
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::IndexOutOfRange {
                index: q,
                len: self.n_qubits,
            });
        }
        Ok(())
    }

    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        for b in 0..self.amps.len() {
            if b & bit == 0 {
                let a0 = self.amps[b];
                let a1 = self.amps[b | bit];
                self.amps[b] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[b | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn check_term(&self, term: &PauliTerm) -> Result<()> {
        if term.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: term.n_qubits(),
            });
        }
        Ok(())
    }

    /// In-place `P|ψ>` restricted to basis states where `mask` bits equal `value` bits.
    fn apply_term_masked(&mut self, term: &PauliTerm, mask: u64, value: u64) {
        let x = term.x_mask();
        for b in 0..self.amps.len() as u64 {
            if b & mask != value {
                continue;
            }
            let partner = b ^ x;
            if x == 0 {
                let (_, ph) = term.act_on_basis(b);
                self.amps[b as usize] *= ph;
            } else if b < partner {
                let (_, ph_b) = term.act_on_basis(b);
                let (_, ph_p) = term.act_on_basis(partner);
                let ab = self.amps[b as usize];
                let ap = self.amps[partner as usize];
                self.amps[partner as usize] = ph_b * ab;
                self.amps[b as usize] = ph_p * ap;
            }
        }
    }

    /// `exp(-iθP/2)` for a Hermitian Pauli string `P` (real unit coefficient).
    fn apply_rotation(&mut self, term: &PauliTerm, theta: f64) {
        let (s, c) = (0.5 * theta).sin_cos();
        let mis = Complex64::new(0.0, -s);
        let x = term.x_mask();
        for b in 0..self.amps.len() as u64 {
            let partner = b ^ x;
            if x == 0 {
                let (_, ph) = term.act_on_basis(b);
                let a = self.amps[b as usize];
                self.amps[b as usize] = c * a + mis * ph * a;
            } else if b < partner {
                let (_, ph_b) = term.act_on_basis(b);
                let (_, ph_p) = term.act_on_basis(partner);
                let ab = self.amps[b as usize];
                let ap = self.amps[partner as usize];
                self.amps[b as usize] = c * ab + mis * ph_p * ap;
                self.amps[partner as usize] = c * ap + mis * ph_b * ab;
            }
        }
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match gate {
            Gate::X(q) => {
                self.check_qubit(*q)?;
                let bit = 1usize << q;
                for b in 0..self.amps.len() {
                    if b & bit == 0 {
                        self.amps.swap(b, b | bit);
                    }
                }
            }
            Gate::H(q) => {
                self.check_qubit(*q)?;
                let hc = Complex64::new(h, 0.0);
                self.apply_1q(*q, [[hc, hc], [hc, -hc]]);
            }
            Gate::Rx(q, theta) => {
                self.check_qubit(*q)?;
                let (s, c) = (0.5 * theta).sin_cos();
                let c = Complex64::new(c, 0.0);
                let mis = Complex64::new(0.0, -s);
                self.apply_1q(*q, [[c, mis], [mis, c]]);
            }
            Gate::Rz(q, theta) => {
                self.check_qubit(*q)?;
                let e = Complex64::from_polar(1.0, -0.5 * theta);
                self.apply_1q(*q, [[e, ZERO], [ZERO, e.conj()]]);
            }
            Gate::Phase(q, phi) => {
                self.check_qubit(*q)?;
                let one = Complex64::new(1.0, 0.0);
                self.apply_1q(*q, [[one, ZERO], [ZERO, Complex64::from_polar(1.0, *phi)]]);
            }
            Gate::Cnot { control, target } => {
                self.check_qubit(*control)?;
                self.check_qubit(*target)?;
                if control == target {
                    return Err(Error::Invalid("CNOT control equals target".into()));
                }
                let (cb, tb) = (1usize << control, 1usize << target);
                for b in 0..self.amps.len() {
                    if b & cb != 0 && b & tb == 0 {
                        self.amps.swap(b, b | tb);
                    }
                }
            }
            Gate::ControlledPauli { controls, term } => {
                self.check_term(term)?;
                gate.check_unitary()?;
                let mut mask = 0u64;
                let mut value = 0u64;
                for &(q, v) in controls {
                    self.check_qubit(q)?;
                    mask |= 1 << q;
                    value |= (v as u64) << q;
                }
                if (term.x_mask() | term.z_mask()) & mask != 0 {
                    return Err(Error::Invalid("controlled Pauli acts on its own control".into()));
                }
                self.apply_term_masked(term, mask, value);
            }
            Gate::PauliRotation { term, theta } => {
                self.check_term(term)?;
                gate.check_unitary()?;
                let sign = term.coeff.re.signum();
                self.apply_rotation(term, sign * theta);
            }
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: circuit.n_qubits,
            });
        }
        for g in &circuit.gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// `op|ψ>` for an arbitrary (not necessarily unitary) Pauli sum.
    pub fn apply_pauli_sum(&self, op: &PauliSum) -> Result<StateVector> {
        if op.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: op.n_qubits(),
            });
        }
        let mut out = vec![ZERO; self.amps.len()];
        for g in op.flip_groups() {
            for (b, &a) in self.amps.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                out[b ^ g.x as usize] += g.diagonal_factor(b as u64) * a;
            }
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps: out,
        })
    }

    /// `<ψ|op|ψ>` for Hermitian `op`.
    pub fn expectation(&self, op: &PauliSum) -> Result<f64> {
        if op.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: op.n_qubits(),
            });
        }
        let anti = op.max_imag();
        if anti > 1e-10 {
            return Err(Error::NonHermitian(anti));
        }
        let occupied: Vec<usize> = (0..self.amps.len()).filter(|&b| self.amps[b] != ZERO).collect();
        let mut acc = ZERO;
        for g in op.flip_groups() {
            for &b in &occupied {
                let t = b ^ g.x as usize;
                let bra = self.amps[t];
                if bra == ZERO {
                    continue;
                }
                acc += bra.conj() * g.diagonal_factor(b as u64) * self.amps[b];
            }
        }
        let scale = acc.re.abs().max(1.0);
        if acc.im.abs() > 1e-10 * scale {
            return Err(Error::NonHermitian(acc.im.abs()));
        }
        Ok(acc.re)
    }

    /// Born probabilities of every outcome on `qubits`, first qubit least significant.
    pub fn outcome_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (b, a) in self.amps.iter().enumerate() {
            let k: usize = qubits.iter().enumerate().map(|(i, &q)| ((b >> q) & 1) << i).sum();
            probs[k] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Projective measurement of `qubits`; the returned state is collapsed and renormalized.
    pub fn measure<R: Rng + ?Sized>(&self, qubits: &[usize], rng: &mut R) -> Result<MeasurementRecord> {
        let probs = self.outcome_probabilities(qubits)?;
        let total: f64 = probs.iter().sum();
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut k = probs.len() - 1;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc && *p > 0.0 {
                k = i;
                break;
            }
        }
        // guard against landing on a zero-probability tail through rounding
        while probs[k] == 0.0 && k > 0 {
            k -= 1;
        }
        let outcome: Vec<bool> = (0..qubits.len()).map(|i| (k >> i) & 1 == 1).collect();
        let mut post = self.clone();
        for (b, a) in post.amps.iter_mut().enumerate() {
            let matches = qubits.iter().zip(&outcome).all(|(&q, &o)| ((b >> q) & 1 == 1) == o);
            if !matches {
                *a = ZERO;
            }
        }
        post.normalize();
        Ok(MeasurementRecord {
            outcome,
            probability: probs[k] / total,
            state: post,
        })
    }
}
