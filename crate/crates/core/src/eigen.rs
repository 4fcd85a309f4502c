//! Exact diagonalization in fixed electron-number sectors and the ideal
//! phase-estimation sampler built on it.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hamiltonian::number_operator;
use crate::pauli::PauliSum;
use crate::sim::StateVector;

/// Eigenvalues closer than this (Ha) form one sampling outcome and one pole.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Default cap on the sector dimension handed to the dense eigensolver.
pub const DEFAULT_MAX_SECTOR_DIM: usize = 4096;

/// Weight outside the sector above which a register is rejected.
pub const SECTOR_LEAK_TOL: f64 = 1e-8;

const CACHE_MAGIC: &[u8; 8] = b"QGFSPEC1";
const CACHE_VERSION: u32 = 1;

/// All bitstrings of `n_qubits` bits with population `n_electrons`, ascending.
pub fn sector_basis(n_qubits: usize, n_electrons: usize) -> Result<Vec<u64>> {
    if n_electrons > n_qubits || n_qubits > 63 {
        return Err(Error::IndexOutOfRange {
            index: n_electrons,
            len: n_qubits + 1,
        });
    }
    if n_electrons == 0 {
        return Ok(vec![0]);
    }
    let mut out = Vec::new();
    let mut b: u64 = (1u64 << n_electrons) - 1;
    let limit = 1u64 << n_qubits;
    // Gosper's hack enumerates same-popcount integers in increasing order
    while b < limit {
        out.push(b);
        let c = b & b.wrapping_neg();
        let r = b + c;
        b = (((r ^ b) >> 2) / c) | r;
    }
    Ok(out)
}

/// Consecutive eigenvalue indices sharing one energy within [`DEGENERACY_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyGroup {
    pub energy: f64,
    pub start: usize,
    pub len: usize,
}

/// Eigenpairs of one sector block. Eigenvectors are stored as columns over
/// the sector basis; [`SectorSpectrum::state`] embeds them in the full space.
#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    pub n_qubits: usize,
    pub n_electrons: usize,
    pub energies: Vec<f64>,
    pub basis: Vec<u64>,
    pub vectors: DMatrix<Complex64>,
    groups: Vec<EnergyGroup>,
}

fn group_energies(energies: &[f64]) -> Vec<EnergyGroup> {
    let mut groups: Vec<EnergyGroup> = Vec::new();
    for (i, &e) in energies.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (e - energies[i - 1]).abs() <= DEGENERACY_TOL => g.len += 1,
            _ => groups.push(EnergyGroup {
                energy: e,
                start: i,
                len: 1,
            }),
        }
    }
    // report the mean of each cluster
    for g in &mut groups {
        g.energy = energies[g.start..g.start + g.len].iter().sum::<f64>() / g.len as f64;
    }
    groups
}

impl SectorSpectrum {
    pub fn new(
        n_qubits: usize,
        n_electrons: usize,
        energies: Vec<f64>,
        basis: Vec<u64>,
        vectors: DMatrix<Complex64>,
    ) -> Result<Self> {
        let dim = basis.len();
        if energies.len() != vectors.ncols() || vectors.nrows() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: vectors.nrows(),
            });
        }
        let groups = group_energies(&energies);
        Ok(Self {
            n_qubits,
            n_electrons,
            energies,
            basis,
            vectors,
            groups,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn groups(&self) -> &[EnergyGroup] {
        &self.groups
    }

    /// Eigenvector `lambda` embedded in the full `2^n` space.
    pub fn state(&self, lambda: usize) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << self.n_qubits];
        for (k, &b) in self.basis.iter().enumerate() {
            amps[b as usize] = self.vectors[(k, lambda)];
        }
        StateVector::from_amplitudes(self.n_qubits, amps).expect("dimension matches")
    }

    pub fn ground_state(&self) -> StateVector {
        self.state(0)
    }

    /// Sector components of a full-space state.
    pub fn gather(&self, state: &StateVector) -> Result<DVector<Complex64>> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: state.n_qubits(),
            });
        }
        let a = state.amplitudes();
        Ok(DVector::from_iterator(
            self.dim(),
            self.basis.iter().map(|&b| a[b as usize]),
        ))
    }

    /// `<Ψ_λ|v>` for every eigenvector.
    pub fn overlaps(&self, state: &StateVector) -> Result<DVector<Complex64>> {
        let v = self.gather(state)?;
        Ok(self.vectors.ad_mul(&v))
    }

    /// Born weight of each degenerate group for the normalized register.
    ///
    /// Fails if more than [`SECTOR_LEAK_TOL`] of the weight lies outside the sector.
    pub fn group_weights(&self, register: &StateVector) -> Result<Vec<f64>> {
        let total = register.norm_sqr();
        if total == 0.0 {
            return Err(Error::Invalid("register state has zero norm".into()));
        }
        let inside = register.sector_weight(self.n_electrons);
        let leak = (total - inside).max(0.0) / total;
        if leak > SECTOR_LEAK_TOL {
            return Err(Error::SectorLeak {
                n_electrons: self.n_electrons,
                weight: leak,
            });
        }
        let ov = self.overlaps(register)?;
        Ok(self
            .groups
            .iter()
            .map(|g| (g.start..g.start + g.len).map(|k| ov[k].norm_sqr()).sum::<f64>() / total)
            .collect())
    }

    fn check_invariants(&self, h: &DMatrix<Complex64>) -> f64 {
        let hv = h * &self.vectors;
        let mut err: f64 = 0.0;
        for (k, &e) in self.energies.iter().enumerate() {
            let r = hv.column(k) - self.vectors.column(k) * Complex64::new(e, 0.0);
            err = err.max(r.norm() / e.abs().max(1.0));
        }
        err
    }
}

/// Group index drawn with probability equal to its Born weight.
pub fn ideal_qpe_sample_group<R: Rng + ?Sized>(
    register: &StateVector,
    spectrum: &SectorSpectrum,
    rng: &mut R,
) -> Result<usize> {
    let w = spectrum.group_weights(register)?;
    let total: f64 = w.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, p) in w.iter().enumerate() {
        if *p > 0.0 {
            last_nonzero = i;
            acc += p;
            if u < acc {
                return Ok(i);
            }
        }
    }
    Ok(last_nonzero)
}

/// Idealized phase estimation: an eigenvalue sampled with its Born weight,
/// degenerate levels merged.
pub fn ideal_qpe_sample<R: Rng + ?Sized>(
    register: &StateVector,
    spectrum: &SectorSpectrum,
    rng: &mut R,
) -> Result<f64> {
    let g = ideal_qpe_sample_group(register, spectrum, rng)?;
    Ok(spectrum.groups[g].energy)
}

/// Largest coefficient of `[H, N]`.
pub fn number_conservation_error(h: &PauliSum) -> Result<f64> {
    let n = number_operator(h.n_qubits())?;
    let hn = h.product(&n)?;
    let nh = n.product(h)?;
    let mut comm = hn;
    comm.add_sum(&nh.scaled(Complex64::new(-1.0, 0.0)))?;
    Ok(comm.terms().map(|t| t.coeff.norm()).fold(0.0, f64::max))
}

/// Dense block of `h` on the sector basis.
pub fn sector_block(h: &PauliSum, basis: &[u64]) -> DMatrix<Complex64> {
    let dim = basis.len();
    let mut pos = vec![u32::MAX; 1 << h.n_qubits()];
    for (k, &b) in basis.iter().enumerate() {
        pos[b as usize] = k as u32;
    }
    let mut m = DMatrix::zeros(dim, dim);
    for g in h.flip_groups() {
        for (col, &b) in basis.iter().enumerate() {
            let row = pos[(b ^ g.x) as usize];
            if row != u32::MAX {
                m[(row as usize, col)] += g.diagonal_factor(b);
            }
        }
    }
    m
}

pub fn diagonalize_sector(h: &PauliSum, n_electrons: usize) -> Result<SectorSpectrum> {
    diagonalize_sector_with_budget(h, n_electrons, DEFAULT_MAX_SECTOR_DIM)
}

/// Full eigendecomposition of the `n_electrons` block of a number-conserving `h`.
pub fn diagonalize_sector_with_budget(h: &PauliSum, n_electrons: usize, max_dim: usize) -> Result<SectorSpectrum> {
    let leak = number_conservation_error(h)?;
    if leak > 1e-10 {
        return Err(Error::NotNumberConserving(leak));
    }
    let n = h.n_qubits();
    let basis = sector_basis(n, n_electrons)?;
    let dim = basis.len();
    if dim > max_dim {
        return Err(Error::Resource { dim, budget: max_dim });
    }
    let block = sector_block(h, &basis);
    let anti = (&block - block.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if anti > 1e-10 {
        return Err(Error::NonHermitian(anti));
    }
    let max_imag = block.iter().map(|c| c.im.abs()).fold(0.0, f64::max);

    let (values, vectors): (Vec<f64>, DMatrix<Complex64>) = if max_imag < 1e-14 {
        let real = block.map(|c| c.re);
        let eig = real.symmetric_eigen();
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
        )
    } else {
        let eig = block.clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let energies: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let sorted = DMatrix::from_fn(dim, dim, |r, c| vectors[(r, order[c])]);
    let spec = SectorSpectrum::new(n, n_electrons, energies, basis, sorted)?;
    debug_assert!(spec.check_invariants(&block) < 1e-8);
    Ok(spec)
}

/// SHA-256 over the canonical term list of `h`.
pub fn hamiltonian_hash(h: &PauliSum) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update((h.n_qubits() as u64).to_le_bytes());
    for t in h.terms() {
        hasher.update(t.x_mask().to_le_bytes());
        hasher.update(t.z_mask().to_le_bytes());
        hasher.update(t.coeff.re.to_le_bytes());
        hasher.update(t.coeff.im.to_le_bytes());
    }
    hasher.finalize().into()
}

fn write_f64s(w: &mut impl Write, xs: impl Iterator<Item = f64>) -> std::io::Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

/// Binary layout: magic, u32 version, 32-byte Hamiltonian hash, u64 n_qubits,
/// u64 n_electrons, u64 dim, then little-endian energies, basis (u64) and
/// eigenvector entries (re, im) in column-major order.
pub fn save_spectrum(path: impl AsRef<Path>, spec: &SectorSpectrum, hash: &[u8; 32]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    w.write_all(hash)?;
    for v in [spec.n_qubits, spec.n_electrons, spec.dim()] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    write_f64s(&mut w, spec.energies.iter().copied())?;
    for b in &spec.basis {
        w.write_all(&b.to_le_bytes())?;
    }
    write_f64s(&mut w, spec.vectors.iter().flat_map(|c| [c.re, c.im]))?;
    w.flush()?;
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

/// Loads a cached spectrum; fails with a cache error if the hash differs.
pub fn load_spectrum(path: impl AsRef<Path>, hash: &[u8; 32]) -> Result<SectorSpectrum> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::Cache("not a spectrum cache file".into()));
    }
    let mut ver = [0u8; 4];
    r.read_exact(&mut ver)?;
    if u32::from_le_bytes(ver) != CACHE_VERSION {
        return Err(Error::Cache(format!("unsupported version {}", u32::from_le_bytes(ver))));
    }
    let mut stored = [0u8; 32];
    r.read_exact(&mut stored)?;
    if &stored != hash {
        return Err(Error::Cache("Hamiltonian hash mismatch".into()));
    }
    let n_qubits = read_u64(&mut r)? as usize;
    let n_electrons = read_u64(&mut r)? as usize;
    let dim = read_u64(&mut r)? as usize;
    if n_qubits > 63 || dim > (1usize << n_qubits) {
        return Err(Error::Cache("corrupt header".into()));
    }
    let energies = (0..dim).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let basis = (0..dim).map(|_| read_u64(&mut r)).collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        entries.push(Complex64::new(re, im));
    }
    let vectors = DMatrix::from_vec(dim, dim, entries);
    SectorSpectrum::new(n_qubits, n_electrons, energies, basis, vectors)
}

/// [`diagonalize_sector_with_budget`] backed by an on-disk cache directory.
pub fn diagonalize_sector_cached(
    h: &PauliSum,
    n_electrons: usize,
    max_dim: usize,
    cache_dir: Option<&Path>,
) -> Result<SectorSpectrum> {
    let Some(dir) = cache_dir else {
        return diagonalize_sector_with_budget(h, n_electrons, max_dim);
    };
    let hash = hamiltonian_hash(h);
    let tag: String = hash[..8].iter().map(|b| format!("{b:02x}")).collect();
    let path = dir.join(format!("spectrum_{tag}_n{n_electrons}.bin"));
    if path.exists() {
        if let Ok(spec) = load_spectrum(&path, &hash) {
            return Ok(spec);
        }
    }
    let spec = diagonalize_sector_with_budget(h, n_electrons, max_dim)?;
    std::fs::create_dir_all(dir)?;
    save_spectrum(&path, &spec, &hash)?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_qubit_hamiltonian, builtin_model};
    use std::collections::BTreeMap;

    fn dimer(t: f64, u: f64) -> PauliSum {
        let p: BTreeMap<String, f64> = [("t".to_string(), t), ("U".to_string(), u)].into();
        build_qubit_hamiltonian(&builtin_model("hubbard_dimer", &p).unwrap()).unwrap()
    }

    #[test]
    fn small_sector_bases() {
        assert_eq!(sector_basis(2, 1).unwrap(), vec![0b01, 0b10]);
        assert_eq!(sector_basis(4, 0).unwrap(), vec![0]);
        assert_eq!(sector_basis(12, 5).unwrap().len(), 792);
        assert!(sector_basis(3, 4).is_err());
    }

    #[test]
    fn sector_basis_is_sorted_with_fixed_population() {
        let b = sector_basis(10, 4).unwrap();
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert!(b.iter().all(|x| x.count_ones() == 4));
        assert_eq!(b.len(), 210);
    }

    #[test]
    fn single_level_is_spin_degenerate() {
        let p: BTreeMap<String, f64> = [("eps".to_string(), -0.7)].into();
        let h = build_qubit_hamiltonian(&builtin_model("single_level", &p).unwrap()).unwrap();
        let s = diagonalize_sector(&h, 1).unwrap();
        assert_eq!(s.energies.len(), 2);
        assert!(s.energies.iter().all(|e| (e + 0.7).abs() < 1e-14));
        assert_eq!(s.groups().len(), 1);
    }

    #[test]
    fn dimer_ground_energy_closed_form() {
        let s = diagonalize_sector(&dimer(1.0, 2.0), 2).unwrap();
        assert!((s.ground_energy() - (1.0 - 5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            diagonalize_sector_with_budget(&dimer(1.0, 0.0), 2, 3),
            Err(Error::Resource { dim: 6, budget: 3 })
        ));
    }

    #[test]
    fn number_violation_rejected() {
        let x = PauliSum::from_term(
            crate::pauli::PauliTerm::from_sparse(2, Complex64::new(1.0, 0.0), &[(0, crate::pauli::Letter::X)]).unwrap(),
        );
        assert!(matches!(diagonalize_sector(&x, 1), Err(Error::NotNumberConserving(_))));
    }

    #[test]
    fn eigenvectors_satisfy_eigen_equation() {
        let h = dimer(1.0, 2.0);
        let s = diagonalize_sector(&h, 3).unwrap();
        for k in 0..s.dim() {
            let v = s.state(k);
            let hv = v.apply_pauli_sum(&h).unwrap();
            let e = s.energies[k];
            let r: f64 = hv
                .amplitudes()
                .iter()
                .zip(v.amplitudes())
                .map(|(a, b)| (a - b * e).norm_sqr())
                .sum();
            assert!(r.sqrt() < 1e-10);
        }
    }

    #[test]
    fn qpe_on_eigenstate_is_deterministic() {
        use rand::SeedableRng;
        let h = dimer(1.0, 2.0);
        let s = diagonalize_sector(&h, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let gs = s.ground_state();
        for _ in 0..50 {
            assert_eq!(ideal_qpe_sample(&gs, &s, &mut rng).unwrap(), s.groups()[0].energy);
        }
    }

    #[test]
    fn qpe_rejects_leaking_register() {
        use rand::SeedableRng;
        let s = diagonalize_sector(&dimer(1.0, 2.0), 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let v = StateVector::basis(4, 0b0111);
        assert!(matches!(
            ideal_qpe_sample(&v, &s, &mut rng),
            Err(Error::SectorLeak { .. })
        ));
    }

    #[test]
    fn cache_round_trip() {
        let h = dimer(1.0, 2.0);
        let dir = std::env::temp_dir().join(format!("qgf_cache_test_{}", std::process::id()));
        let a = diagonalize_sector_cached(&h, 2, 100, Some(&dir)).unwrap();
        let b = diagonalize_sector_cached(&h, 2, 100, Some(&dir)).unwrap();
        assert_eq!(a.energies, b.energies);
        assert_eq!(a.vectors, b.vectors);
        let other = hamiltonian_hash(&dimer(1.0, 3.0));
        let file = std::fs::read_dir(&dir).unwrap().next().unwrap().unwrap().path();
        assert!(matches!(load_spectrum(&file, &other), Err(Error::Cache(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
