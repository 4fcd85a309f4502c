//! Galitskii–Migdal total energy from a Lehmann Green's function, split as
//! `E_GM = E_HF + ΔE1 + ΔE2`:
//!
//! ```text
//! ΔE1 = ½ Σ_σ Tr[(h + ε)(γ_σ - γ_σ^HF)]
//! ΔE2 = ½ Σ_σ (1/2πi) ∮ Tr[Σ_c,σ(z) G_σ(z)] dz
//! ```
//!
//! with the contour enclosing the hole poles only.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lehmann::{density_matrix, LehmannGF};
use super::transitions::Branch;
use crate::error::{Error, Result};
use crate::hamiltonian::{ha_to_ev, MolecularIntegrals, OrbitalEnergies};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourConfig {
    /// Distance of the left edge below the lowest pole (Ha).
    pub margin: f64,
    pub half_height: f64,
    pub initial_nodes: usize,
    pub max_nodes: usize,
    /// Stop doubling once ΔE2 changes by less than this (Ha).
    pub tol: f64,
    /// Minimum allowed distance between a pole and the contour (Ha).
    pub min_pole_distance: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self {
            margin: 0.5,
            half_height: 0.5,
            initial_nodes: 64,
            max_nodes: 1 << 14,
            tol: 1e-8,
            min_pole_distance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourInfo {
    pub left: f64,
    pub right: f64,
    pub half_height: f64,
    pub nodes_per_edge: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmReport {
    pub e_hf_ha: f64,
    pub delta_e1_ha: f64,
    pub delta_e2_ha: f64,
    pub e_gm_ha: f64,
    pub e_hf_ev: f64,
    pub delta_e1_ev: f64,
    pub delta_e2_ev: f64,
    pub e_gm_ev: f64,
    /// Residue-sum value of ΔE2, kept as a check on the quadrature.
    pub delta_e2_residue_ha: f64,
    pub mu_ha: f64,
    pub contour: Option<ContourInfo>,
    /// Density matrix per spin as `[re, im]` pairs, row major.
    pub gamma: [Vec<Vec<[f64; 2]>>; 2],
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn spin_orbital_eps(eps: &OrbitalEnergies, n_modes: usize) -> Vec<f64> {
    (0..n_modes).map(|m| eps.eps[m / 2]).collect()
}

/// `½ (1/2πi) ∮ Tr[(z - ε) G(z) - I] dz`, the spin sum of `Tr[Σ_c G]`,
/// on a rectangle around the hole poles.
fn contour_delta_e2(gf: &LehmannGF, eps_so: &[f64], cfg: &ContourConfig) -> Result<(f64, ContourInfo)> {
    // per pole: Tr B and Σ_m ε_m B_mm, so Tr[(z-ε)B]/(z-ω) = (z t - s)/(z-ω)
    let weights: Vec<(f64, Complex64, Complex64)> = gf
        .poles
        .iter()
        .map(|p| {
            let s: Complex64 = (0..gf.n_modes).map(|m| p.residue[(m, m)] * eps_so[m]).sum();
            (p.omega, p.trace(), s)
        })
        .collect();

    let Some(lowest) = gf.poles.iter().map(|p| p.omega).reduce(f64::min) else {
        return Ok((
            0.0,
            ContourInfo {
                left: gf.mu,
                right: gf.mu,
                half_height: 0.0,
                nodes_per_edge: 0,
            },
        ));
    };
    let left = lowest - cfg.margin;
    let right = gf.mu;
    let hh = cfg.half_height;

    let hole_max = gf.hole_poles().map(|p| p.omega).reduce(f64::max);
    let elec_min = gf.electron_poles().map(|p| p.omega).reduce(f64::min);
    if let (Some(h), Some(e)) = (hole_max, elec_min) {
        if e - h <= 0.0 {
            return Err(Error::ContourTooClose {
                pole: e,
                distance: 0.0,
                suggested: h - e + cfg.min_pole_distance,
            });
        }
    }
    for p in &gf.poles {
        let d = if p.omega >= left && p.omega <= right {
            (p.omega - left).min(right - p.omega).min(hh)
        } else {
            (p.omega - right).abs().min((p.omega - left).abs())
        };
        let enclosed = p.omega > left && p.omega < right;
        if d < cfg.min_pole_distance || enclosed != (p.branch == Branch::Hole) {
            return Err(Error::ContourTooClose {
                pole: p.omega,
                distance: d,
                suggested: (cfg.min_pole_distance - d).max(cfg.min_pole_distance),
            });
        }
    }

    let n_modes = gf.n_modes as f64;
    let integrand = |z: Complex64| -> Complex64 {
        weights
            .iter()
            .map(|&(w, t, s)| (z * t - s) / (z - w))
            .sum::<Complex64>()
            - n_modes
    };
    let corners = [
        Complex64::new(left, -hh),
        Complex64::new(right, -hh),
        Complex64::new(right, hh),
        Complex64::new(left, hh),
    ];
    let integrate = |nodes: usize| -> f64 {
        let (x, w) = gauss_legendre(nodes);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            let half = (b - a) * 0.5;
            let mid = (a + b) * 0.5;
            for (xi, wi) in x.iter().zip(&w) {
                acc += integrand(mid + half * *xi) * half * *wi;
            }
        }
        // ½ from the spin-sum convention, 1/(2πi) from the residue theorem
        (acc / Complex64::new(0.0, 2.0 * std::f64::consts::PI)).re * 0.5
    };

    let mut nodes = cfg.initial_nodes;
    let mut prev = integrate(nodes);
    let mut change = f64::INFINITY;
    loop {
        let next_nodes = nodes * 2;
        if next_nodes > cfg.max_nodes {
            return Err(Error::ContourNotConverged(change));
        }
        let next = integrate(next_nodes);
        change = (next - prev).abs();
        if change < cfg.tol {
            return Ok((
                next,
                ContourInfo {
                    left,
                    right,
                    half_height: hh,
                    nodes_per_edge: next_nodes,
                },
            ));
        }
        prev = next;
        nodes = next_nodes;
    }
}

/// `½ Σ_{hole λ} Σ_m (ω_λ - ε_m) B_λ,mm`.
pub fn delta_e2_residues(gf: &LehmannGF, eps: &OrbitalEnergies) -> f64 {
    let eps_so = spin_orbital_eps(eps, gf.n_modes);
    0.5 * gf
        .hole_poles()
        .map(|p| {
            (0..gf.n_modes)
                .map(|m| (p.omega - eps_so[m]) * p.residue[(m, m)].re)
                .sum::<f64>()
        })
        .sum::<f64>()
}

/// `½ Σ_σ Tr[(h + ε)(γ_σ - γ^HF)]` with the closed-shell reference occupation.
pub fn delta_e1(gamma: &[DMatrix<Complex64>; 2], ints: &MolecularIntegrals, eps: &OrbitalEnergies) -> f64 {
    let n = ints.n_orb;
    let occ = ints.n_occupied();
    let mut acc = 0.0;
    for g in gamma {
        for p in 0..n {
            for q in 0..n {
                let f = ints.h(p, q) + if p == q { eps.eps[p] } else { 0.0 };
                let hf = if p == q && p < occ { 1.0 } else { 0.0 };
                acc += f * (g[(q, p)].re - hf);
            }
        }
    }
    0.5 * acc
}

pub fn gm_energy(gf: &LehmannGF, ints: &MolecularIntegrals, eps: &OrbitalEnergies) -> Result<GmReport> {
    gm_energy_with(gf, ints, eps, &ContourConfig::default())
}

pub fn gm_energy_with(
    gf: &LehmannGF,
    ints: &MolecularIntegrals,
    eps: &OrbitalEnergies,
    cfg: &ContourConfig,
) -> Result<GmReport> {
    if eps.eps.len() != ints.n_orb || gf.n_modes != ints.n_qubits() {
        return Err(Error::Dimension {
            expected: ints.n_qubits(),
            found: gf.n_modes,
        });
    }
    let gamma = density_matrix(gf);
    let de1 = delta_e1(&gamma, ints, eps);
    let eps_so = spin_orbital_eps(eps, gf.n_modes);
    let (de2, contour) = contour_delta_e2(gf, &eps_so, cfg)?;
    let de2_res = delta_e2_residues(gf, eps);
    let e_hf = ints.hf_energy(eps);
    let e_gm = e_hf + de1 + de2;
    let to_pairs = |m: &DMatrix<Complex64>| -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
            .collect()
    };
    Ok(GmReport {
        e_hf_ha: e_hf,
        delta_e1_ha: de1,
        delta_e2_ha: de2,
        e_gm_ha: e_gm,
        e_hf_ev: ha_to_ev(e_hf),
        delta_e1_ev: ha_to_ev(de1),
        delta_e2_ev: ha_to_ev(de2),
        e_gm_ev: ha_to_ev(e_gm),
        delta_e2_residue_ha: de2_res,
        mu_ha: gf.mu,
        contour: Some(contour),
        gamma: [to_pairs(&gamma[0]), to_pairs(&gamma[1])],
    })
}
