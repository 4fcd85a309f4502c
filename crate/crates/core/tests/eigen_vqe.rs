mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qgf::eigen::{
    diagonalize_sector, diagonalize_sector_cached, diagonalize_sector_with_budget, ideal_qpe_sample,
    ideal_qpe_sample_group, number_conservation_error, sector_basis, SectorSpectrum,
};
use qgf::hamiltonian::{build_qubit_hamiltonian, hf_orbital_energies, MolecularIntegrals};
use qgf::pauli::{PauliSum, PauliTerm};
use qgf::sim::StateVector;
use qgf::vqe::{builtin_ansatz, energy, optimize, prepare_reference, Ansatz, OptimizerConfig, BUILTIN_ANSATZE};
use qgf::Error;

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Dense sector block eigenvalues straight from the Kronecker Hamiltonian.
fn dense_sector_energies(ints: &MolecularIntegrals, n_elec: usize) -> Vec<f64> {
    let h = dense_hamiltonian(ints);
    let idx: Vec<usize> = (0..h.nrows()).filter(|b| b.count_ones() as usize == n_elec).collect();
    let block = DMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])]);
    let mut e: Vec<f64> = block.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn sector_basis_examples() {
    assert_eq!(sector_basis(2, 1).unwrap(), vec![0b01, 0b10]);
    assert_eq!(sector_basis(4, 0).unwrap(), vec![0]);
    let b = sector_basis(12, 5).unwrap();
    assert_eq!(b.len() as u64, binomial(12, 5));
    assert!(b.windows(2).all(|w| w[0] < w[1]));
    assert!(b.iter().all(|x| x.count_ones() == 5));
    assert!(sector_basis(4, 5).is_err());
}

#[test]
fn single_level_is_spin_degenerate() {
    let sys = model("single_level", &[("eps", -0.7), ("u", 0.4)]);
    let spec = diagonalize_sector(&sys.h, 1).unwrap();
    assert_eq!(spec.energies.len(), 2);
    assert!((spec.energies[0] + 0.7).abs() < 1e-14 && (spec.energies[1] + 0.7).abs() < 1e-14);
    assert_eq!(spec.groups().len(), 1);
}

#[test]
fn hubbard_dimer_ground_energy_closed_form() {
    let sys = model("hubbard_dimer", &[("t", 1.0), ("U", 2.0)]);
    let spec = diagonalize_sector(&sys.h, 2).unwrap();
    assert!((spec.ground_energy() - (1.0 - 5f64.sqrt())).abs() < 1e-12);
}

#[test]
fn sector_spectra_match_dense_hamiltonian() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n_orb in 1..=3 {
        let ints = random_integrals(n_orb, 2, &mut rng);
        let h = build_qubit_hamiltonian(&ints).unwrap();
        let hd = dense_hamiltonian(&ints);
        for n_e in 0..=2 * n_orb {
            let spec = diagonalize_sector(&h, n_e).unwrap();
            assert_eq!(spec.dim() as u64, binomial(2 * n_orb as u64, n_e as u64));
            let want = dense_sector_energies(&ints, n_e);
            for (a, b) in spec.energies.iter().zip(&want) {
                assert!((a - b).abs() < 1e-10, "n_orb {n_orb} N {n_e}: {a} vs {b}");
            }
            for lam in 0..spec.dim() {
                let v = spec.state(lam);
                let hv = mat_vec(&hd, v.amplitudes());
                let ev: Vec<Complex64> = v.amplitudes().iter().map(|a| a * spec.energies[lam]).collect();
                assert!(max_diff(&hv, &ev) < 1e-9 * spec.energies[lam].abs().max(1.0));
                for mu in 0..lam {
                    assert!(v.inner(&spec.state(mu)).norm() < 1e-10);
                }
                assert!((v.norm_sqr() - 1.0).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn group_weights_are_complete() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ints = random_integrals(3, 2, &mut rng);
    let h = build_qubit_hamiltonian(&ints).unwrap();
    for n_e in 1..=4 {
        let spec = diagonalize_sector(&h, n_e).unwrap();
        for _ in 0..5 {
            let s = random_sector_state(6, n_e, &mut rng);
            let w = spec.group_weights(&s).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }
}

fn permuted(ints: &MolecularIntegrals, perm: &[usize]) -> MolecularIntegrals {
    let n = ints.n_orb;
    let mut out = MolecularIntegrals::new(n, ints.n_elec);
    out.e_nucl = ints.e_nucl;
    for p in 0..n {
        for q in 0..n {
            out.set_h(perm[p], perm[q], ints.h(p, q));
            for r in 0..n {
                for s in 0..n {
                    out.set_eri(perm[p], perm[q], perm[r], perm[s], ints.eri(p, q, r, s));
                }
            }
        }
    }
    out
}

#[test]
fn spectrum_invariant_under_orbital_relabeling() {
    let sys = model("hubbard_dimer", &[("t", 0.8), ("U", 3.0)]);
    let swapped = build_qubit_hamiltonian(&permuted(&sys.ints, &[1, 0])).unwrap();
    for n_e in 0..=4 {
        let a = diagonalize_sector(&sys.h, n_e).unwrap();
        let b = diagonalize_sector(&swapped, n_e).unwrap();
        for (x, y) in a.energies.iter().zip(&b.energies) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn sector_budget_is_enforced() {
    let sys = molecule("lih_sto3g.fcidump");
    let err = diagonalize_sector_with_budget(&sys.h, 4, 100).unwrap_err();
    assert!(matches!(err, Error::Resource { dim: 495, budget: 100 }));
}

#[test]
fn non_number_conserving_operator_is_rejected() {
    let mut h = model("hubbard_dimer", &[("U", 1.0)]).h;
    h.add_term(PauliTerm::from_label(4, "X0").unwrap().scaled(c(0.1, 0.0)))
        .unwrap();
    assert!(number_conservation_error(&h).unwrap() > 0.05);
    assert!(matches!(diagonalize_sector(&h, 2), Err(Error::NotNumberConserving(_))));
}

#[test]
fn cached_spectrum_round_trips() {
    let sys = model("hubbard_dimer", &[("U", 2.0)]);
    let dir = std::env::temp_dir().join(format!("qgf-cache-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let a = diagonalize_sector_cached(&sys.h, 3, 4096, Some(&dir)).unwrap();
    let b = diagonalize_sector_cached(&sys.h, 3, 4096, Some(&dir)).unwrap();
    assert_eq!(a.energies, b.energies);
    assert_eq!(a.vectors, b.vectors);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn qpe_on_eigenstate_is_deterministic() {
    let sys = model("hubbard_dimer", &[("U", 2.0)]);
    let spec = diagonalize_sector(&sys.h, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for lam in [0, 3, 5] {
        let s = spec.state(lam);
        for _ in 0..50 {
            let e = ideal_qpe_sample(&s, &spec, &mut rng).unwrap();
            assert!((e - spec.energies[lam]).abs() < 1e-9);
        }
    }
}

#[test]
fn qpe_equal_superposition_splits_evenly() {
    let sys = model("hubbard_dimer", &[("U", 2.0)]);
    let spec = diagonalize_sector(&sys.h, 2).unwrap();
    let (s0, s5) = (spec.state(0), spec.state(5));
    let amps: Vec<Complex64> = s0
        .amplitudes()
        .iter()
        .zip(s5.amplitudes())
        .map(|(a, b)| (a + b) * std::f64::consts::FRAC_1_SQRT_2)
        .collect();
    let s = StateVector::from_amplitudes(4, amps).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shots = 100_000u64;
    let k = (0..shots)
        .filter(|_| (ideal_qpe_sample(&s, &spec, &mut rng).unwrap() - spec.energies[0]).abs() < 1e-9)
        .count() as u64;
    assert!(binomial_two_sided(k, shots, 0.5) >= FOUR_SIGMA_TAIL);
}

#[test]
fn qpe_histogram_of_added_electron_matches_transition_weights() {
    let sys = model("hubbard_dimer", &[("t", 1.0), ("U", 2.0)]);
    let (problem, _) = fci_problem(&sys);
    let plus: &SectorSpectrum = problem.plus.as_ref().unwrap();
    let residues = brute_force_residues(&problem.gs, plus, true);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for m in 0..4 {
        let img = create_bits(problem.gs.amplitudes(), m);
        let p: f64 = img.iter().map(|a| a.norm_sqr()).sum();
        let mut reg = StateVector::from_amplitudes(4, img).unwrap();
        reg.normalize();
        let shots = 20_000u64;
        let mut counts = vec![0u64; plus.groups().len()];
        for _ in 0..shots {
            counts[ideal_qpe_sample_group(&reg, plus, &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts.len(), residues.len());
        for (g, (e, b)) in residues.iter().enumerate() {
            assert!((plus.groups()[g].energy - e).abs() < 1e-9);
            let q = b[(m, m)].re / p;
            assert!(
                binomial_two_sided(counts[g], shots, q) >= FOUR_SIGMA_TAIL,
                "m {m} group {g}"
            );
        }
    }
}

#[test]
fn qpe_rejects_register_outside_sector() {
    let sys = model("hubbard_dimer", &[("U", 2.0)]);
    let spec = diagonalize_sector(&sys.h, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let s = random_state(4, &mut rng);
    assert!(matches!(
        ideal_qpe_sample(&s, &spec, &mut rng),
        Err(Error::SectorLeak { .. })
    ));
}

#[test]
fn reference_state_occupies_lowest_orbitals() {
    let s = prepare_reference(12, 4).unwrap();
    assert_eq!(s.amplitudes()[0b1111], c(1.0, 0.0));
    assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    assert!(prepare_reference(4, 5).is_err());
}

#[test]
fn ansatz_rejects_non_unit_generators() {
    let g = PauliTerm::from_label(4, "Y3 X2 X1 X0").unwrap().scaled(c(0.5, 0.0));
    assert!(Ansatz::new(4, 2, vec![g]).is_err());
    let g = PauliTerm::from_label(4, "Y3 X2 X1 X0").unwrap().scaled(c(0.0, 1.0));
    assert!(Ansatz::new(4, 2, vec![g]).is_err());
}

fn dense_rotation(p: &PauliTerm, theta: f64) -> CMat {
    let d = p.to_dense();
    let id = CMat::identity(d.nrows(), d.ncols());
    id * c((theta / 2.0).cos(), 0.0) - d * c(0.0, (theta / 2.0).sin())
}

#[test]
fn ansatz_energy_matches_dense_oracle() {
    let sys = model("hubbard_dimer", &[("t", 1.0), ("U", 2.0)]);
    let gens = vec![
        PauliTerm::from_label(4, "Y3 X2 X1 X0").unwrap(),
        PauliTerm::from_label(4, "Y2 X0").unwrap().scaled(c(-1.0, 0.0)),
    ];
    let a = Ansatz::new(4, 2, gens.clone()).unwrap();
    let hd = dense_hamiltonian(&sys.ints);
    for theta in [[0.0, 0.0], [0.3, -0.2], [2.0, 1.1]] {
        let mut psi = vec![c(0.0, 0.0); 16];
        psi[0b0011] = c(1.0, 0.0);
        for (g, t) in gens.iter().zip(theta) {
            psi = mat_vec(&dense_rotation(g, t), &psi);
        }
        let want = inner(&psi, &mat_vec(&hd, &psi)).re;
        assert!((energy(&a, &theta, &sys.h).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn energy_is_4pi_periodic_in_each_parameter() {
    let sys = molecule("lih_sto3g.fcidump");
    let a = builtin_ansatz("lih_u1").unwrap();
    let theta = [0.37, -1.2];
    let e0 = energy(&a, &theta, &sys.h).unwrap();
    for k in 0..2 {
        let mut t = theta;
        t[k] += 4.0 * std::f64::consts::PI;
        assert!((energy(&a, &t, &sys.h).unwrap() - e0).abs() < 1e-10);
        // 2π flips the state's sign only
        t[k] -= 2.0 * std::f64::consts::PI;
        assert!((energy(&a, &t, &sys.h).unwrap() - e0).abs() < 1e-10);
    }
}

#[test]
fn first_order_expansion_of_rotation() {
    let a = builtin_ansatz("lih_u1").unwrap();
    let eps = 1e-6;
    let s = a.state(&[eps, 0.0]).unwrap();
    // exp(-iεP/2)|ref> ≈ |ref> - iε/2 P|ref>
    let p = PauliSum::from_term(a.generators[0]);
    let reference = prepare_reference(12, 4).unwrap();
    let pr = reference.apply_pauli_sum(&p).unwrap();
    let want: Vec<Complex64> = reference
        .amplitudes()
        .iter()
        .zip(pr.amplitudes())
        .map(|(r, q)| r - c(0.0, eps / 2.0) * q)
        .collect();
    assert!(max_diff(s.amplitudes(), &want) < 1e-12);
}

#[test]
fn optimized_energies_are_ordered_and_variational() {
    for (file, u1, u2) in [
        ("lih_sto3g.fcidump", "lih_u1", "lih_u2"),
        ("h2o_sto3g.fcidump", "h2o_u1", "h2o_u2"),
    ] {
        let sys = molecule(file);
        let eps = hf_orbital_energies(&sys.ints).unwrap();
        let e_hf = sys.ints.hf_energy(&eps);
        let e_fci = diagonalize_sector(&sys.h, sys.ints.n_elec).unwrap().ground_energy();
        let run = |tag: &str| {
            let a = builtin_ansatz(tag).unwrap();
            let e_ref = energy(&a, &vec![0.0; a.n_params()], &sys.h).unwrap();
            assert!((e_ref - e_hf).abs() < 1e-10, "reference energy equals RHF");
            let r = optimize(&a, &sys.h, &vec![0.0; a.n_params()], &OptimizerConfig::default()).unwrap();
            assert!(r.converged);
            assert!(r.energy <= e_ref + 1e-12);
            r.energy
        };
        let (e1, e2) = (run(u1), run(u2));
        assert!(
            e_fci <= e1 && e1 <= e2 && e2 <= e_hf,
            "{file}: {e_fci} {e1} {e2} {e_hf}"
        );
    }
}

#[test]
fn builtin_ansatz_states_stay_near_the_electron_sector() {
    // single Pauli-string generators do not commute with N; the optimized
    // states still keep all but a small fraction of their weight in sector
    for tag in BUILTIN_ANSATZE {
        let file = if tag.starts_with("lih") {
            "lih_sto3g.fcidump"
        } else {
            "h2o_sto3g.fcidump"
        };
        let sys = molecule(file);
        let a = builtin_ansatz(tag).unwrap();
        let r = optimize(&a, &sys.h, &vec![0.0; a.n_params()], &OptimizerConfig::default()).unwrap();
        let s = a.state(&r.theta).unwrap();
        let leak = 1.0 - s.sector_weight(sys.ints.n_elec);
        assert!(leak < 1e-4, "{tag}: {leak}");
    }
}

#[test]
fn trace_csv_has_one_row_per_iteration() {
    let sys = molecule("lih_sto3g.fcidump");
    let a = builtin_ansatz("lih_u2").unwrap();
    let r = optimize(&a, &sys.h, &[0.0, 0.0], &OptimizerConfig::default()).unwrap();
    let csv = r.trace_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "iteration,theta_0,theta_1,energy_ha");
    assert_eq!(lines.count(), r.trace.len());
    let last = r.trace.last().unwrap();
    assert!((last.energy - r.energy).abs() < 1e-15);
}

#[test]
fn optimizer_budget_exhaustion_reports_unconverged() {
    let sys = molecule("lih_sto3g.fcidump");
    let a = builtin_ansatz("lih_u1").unwrap();
    let cfg = OptimizerConfig {
        max_evals: 5,
        ..OptimizerConfig::default()
    };
    let r = optimize(&a, &sys.h, &[0.0, 0.0], &cfg).unwrap();
    assert!(!r.converged);
    assert!(r.evaluations <= 5);
}
