//! Independent reference implementations shared by the integration tests.
//!
//! Ladder operators here are built either from Kronecker products of 2x2
//! matrices or by direct occupation-bit manipulation, never through the
//! Pauli-string code under test.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use qgf::eigen::{diagonalize_sector, SectorSpectrum};
use qgf::gf::GfProblem;
use qgf::hamiltonian::{build_qubit_hamiltonian, builtin_model, read_fcidump, MolecularIntegrals};
use qgf::pauli::PauliSum;
use qgf::sim::StateVector;
use qgf::vqe::{builtin_ansatz, optimize, OptimizerConfig};

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// `|0><1|` on one qubit: removes an electron from an occupied orbital.
fn lowering() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
}

/// Dense `a_m` on `n` qubits: `I ⊗ ... ⊗ σ⁻_m ⊗ Z ⊗ ... ⊗ Z` with qubit 0 rightmost.
pub fn dense_annihilator(m: usize, n: usize) -> CMat {
    let mut out = CMat::identity(1, 1);
    for q in (0..n).rev() {
        let f = if q == m {
            lowering()
        } else if q < m {
            pauli_z()
        } else {
            CMat::identity(2, 2)
        };
        out = kron(&out, &f);
    }
    out
}

pub fn dense_creator(m: usize, n: usize) -> CMat {
    dense_annihilator(m, n).adjoint()
}

/// Dense second-quantized Hamiltonian from integrals (small systems only).
pub fn dense_hamiltonian(ints: &MolecularIntegrals) -> CMat {
    let n_so = ints.n_qubits();
    let dim = 1 << n_so;
    let a: Vec<CMat> = (0..n_so).map(|m| dense_annihilator(m, n_so)).collect();
    let ad: Vec<CMat> = a.iter().map(|x| x.adjoint()).collect();
    let mut h = CMat::identity(dim, dim) * c(ints.e_nucl, 0.0);
    let n = ints.n_orb;
    for p in 0..n {
        for q in 0..n {
            for s in 0..2 {
                h += &ad[2 * p + s] * &a[2 * q + s] * c(ints.h(p, q), 0.0);
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
                    for sg in 0..2 {
                        for tu in 0..2 {
                            h += &ad[2 * p + sg] * &ad[2 * r + tu] * &a[2 * s + tu] * &a[2 * q + sg] * c(0.5 * v, 0.0);
                        }
                    }
                }
            }
        }
    }
    h
}

/// `a_m|ψ>` by occupation bits: sign from the occupied modes below `m`.
pub fn annihilate_bits(amps: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); amps.len()];
    for (b, a) in amps.iter().enumerate() {
        if (b >> m) & 1 == 1 {
            let sign = if (b & ((1 << m) - 1)).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            out[b ^ (1 << m)] += a * sign;
        }
    }
    out
}

pub fn create_bits(amps: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); amps.len()];
    for (b, a) in amps.iter().enumerate() {
        if (b >> m) & 1 == 0 {
            let sign = if (b & ((1 << m) - 1)).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            out[b | (1 << m)] += a * sign;
        }
    }
    out
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn mat_vec(m: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> StateVector {
    let amps: Vec<Complex64> = (0..1 << n)
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let mut s = StateVector::from_amplitudes(n, amps).unwrap();
    s.normalize();
    s
}

/// Random normalized state supported on one electron-number sector.
pub fn random_sector_state<R: Rng>(n: usize, n_elec: usize, rng: &mut R) -> StateVector {
    let mut s = random_state(n, rng);
    s.project_to_sector(n_elec);
    s.normalize();
    s
}

/// Random real integrals with full permutational symmetry.
pub fn random_integrals<R: Rng>(n_orb: usize, n_elec: usize, rng: &mut R) -> MolecularIntegrals {
    let mut ints = MolecularIntegrals::new(n_orb, n_elec);
    for p in 0..n_orb {
        for q in 0..=p {
            let v: f64 = rng.random_range(-1.0..1.0);
            ints.set_h(p, q, if p == q { v - 1.0 + p as f64 } else { 0.3 * v });
        }
    }
    for p in 0..n_orb {
        for q in 0..=p {
            for r in 0..n_orb {
                for s in 0..=r {
                    let v: f64 = rng.random_range(0.0..0.5);
                    ints.set_eri(p, q, r, s, if p == q && r == s { v + 0.2 } else { 0.2 * v });
                }
            }
        }
    }
    ints
}

pub fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub struct System {
    pub ints: MolecularIntegrals,
    pub h: PauliSum,
}

pub fn model(name: &str, kv: &[(&str, f64)]) -> System {
    let ints = builtin_model(name, &params(kv)).unwrap();
    let h = build_qubit_hamiltonian(&ints).unwrap();
    System { ints, h }
}

pub fn molecule(file: &str) -> System {
    let ints = read_fcidump(data_path(file)).unwrap();
    let h = build_qubit_hamiltonian(&ints).unwrap();
    System { ints, h }
}

/// Ground-state problem with the exact sector ground state.
pub fn fci_problem(sys: &System) -> (GfProblem, SectorSpectrum) {
    let n = sys.ints.n_elec;
    let spec = diagonalize_sector(&sys.h, n).unwrap();
    let p = GfProblem::from_hamiltonian(&sys.h, spec.ground_state(), n, 4096, None).unwrap();
    (p, spec)
}

/// Optimized UCC state projected onto the electron-number sector.
pub fn ucc_state(sys: &System, tag: &str) -> StateVector {
    let a = builtin_ansatz(tag).unwrap();
    let r = optimize(&a, &sys.h, &vec![0.0; a.n_params()], &OptimizerConfig::default()).unwrap();
    assert!(r.converged);
    let mut s = a.state(&r.theta).unwrap();
    s.project_to_sector(sys.ints.n_elec);
    s.normalize();
    s
}

/// Brute-force residues: one eigenvector at a time, bit-level ladders,
/// summed into degenerate groups afterwards.
pub fn brute_force_residues(gs: &StateVector, spec: &SectorSpectrum, electron: bool) -> Vec<(f64, CMat)> {
    let n = gs.n_qubits();
    let amps = gs.amplitudes();
    let images: Vec<Vec<Complex64>> = (0..n)
        .map(|m| {
            if electron {
                create_bits(amps, m)
            } else {
                annihilate_bits(amps, m)
            }
        })
        .collect();
    let mut out: Vec<(f64, CMat)> = Vec::new();
    for lam in 0..spec.dim() {
        let v = spec.state(lam);
        let ov: Vec<Complex64> = images.iter().map(|img| inner(v.amplitudes(), img)).collect();
        let b = CMat::from_fn(n, n, |m, m2| {
            if electron {
                ov[m].conj() * ov[m2]
            } else {
                ov[m2].conj() * ov[m]
            }
        });
        let e = spec.energies[lam];
        match out.last_mut() {
            Some((e0, acc)) if (e - *e0).abs() <= 1e-9 => *acc += b,
            _ => out.push((e, b)),
        }
    }
    out
}

/// Two-sided normal tail beyond 4σ.
pub const FOUR_SIGMA_TAIL: f64 = 6.334e-5;

/// Two-sided exact binomial tail probability of observing `k` in `n` trials.
pub fn binomial_two_sided(k: u64, n: u64, p: f64) -> f64 {
    use statrs::distribution::{Binomial, DiscreteCDF};
    let b = Binomial::new(p.clamp(0.0, 1.0), n).unwrap();
    let lower = b.cdf(k);
    let upper = if k == 0 { 1.0 } else { b.sf(k - 1) };
    (2.0 * lower.min(upper)).min(1.0)
}
