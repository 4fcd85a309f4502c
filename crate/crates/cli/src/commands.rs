use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use qgf::gf::{
    calc_gf, exact_transitions, frequency_grid, gm_energy, grid_to_absolute, self_energy_csv, spectral_function,
    spectrum_csv, transitions_json, GfMode, GfProblem, GmReport, LehmannGF, Sampler,
};
use qgf::hamiltonian::{ha_to_ev, hf_orbital_energies};
use qgf::pipeline::{prepare_problem, run_vqe, GroundState, System};
use qgf::vqe::{OptimizerConfig, VqeResult};

use crate::config::{Mode, RunConfig};
use crate::error::CliError;

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(qgf::Error::from)?;
    text.push('\n');
    write(dir, name, &text)
}

fn prepare_out(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    write_json(&cfg.out, "config.json", cfg)
}

fn optimizer(cfg: &RunConfig) -> OptimizerConfig {
    OptimizerConfig {
        max_iter: cfg.max_iter,
        ..OptimizerConfig::default()
    }
}

fn unconverged(r: &VqeResult) -> CliError {
    CliError::Unconverged {
        iterations: r.iterations,
        energy_ev: ha_to_ev(r.energy),
    }
}

/// Loads the system and builds the Green's function problem; an ansatz that
/// fails to converge aborts the run.
fn problem(cfg: &RunConfig) -> Result<(System, GfProblem), CliError> {
    let system = System::load(&cfg.system)?;
    let gs: GroundState = cfg.ansatz.parse()?;
    let (p, vqe) = prepare_problem(
        &system,
        &gs,
        &optimizer(cfg),
        cfg.max_sector_dim,
        cfg.cache_dir.as_deref(),
    )?;
    if let Some(r) = vqe.filter(|r| !r.converged) {
        return Err(unconverged(&r));
    }
    eprintln!("ground state ({gs}): E = {:.6} eV", ha_to_ev(p.e_gs));
    Ok((system, p))
}

pub fn vqe(cfg: &RunConfig) -> Result<(), CliError> {
    let system = System::load(&cfg.system)?;
    if cfg.ansatz == "fci" {
        return Err(CliError::Usage("vqe needs an ansatz tag or 'none', not 'fci'".into()));
    }
    let (ansatz, r) = run_vqe(&system, &cfg.ansatz, &optimizer(cfg))?;
    let state = ansatz.state(&r.theta)?;
    let e_rhf = hf_orbital_energies(&system.ints)
        .map(|eps| system.ints.hf_energy(&eps))
        .ok();
    prepare_out(cfg)?;
    let result = json!({
        "system": cfg.system,
        "ansatz": cfg.ansatz,
        "n_qubits": system.n_qubits(),
        "n_electrons": system.ints.n_elec,
        "theta": r.theta,
        "energy_ha": r.energy,
        "energy_ev": ha_to_ev(r.energy),
        "e_rhf_ha": e_rhf,
        "e_rhf_ev": e_rhf.map(ha_to_ev),
        "sector_weight": state.sector_weight(system.ints.n_elec),
        "iterations": r.iterations,
        "evaluations": r.evaluations,
        "converged": r.converged,
    });
    write_json(&cfg.out, "vqe.json", &result)?;
    write(&cfg.out, "vqe_trace.csv", &r.trace_csv())?;
    println!("E = {:.6} eV after {} iterations", ha_to_ev(r.energy), r.iterations);
    if !r.converged {
        return Err(unconverged(&r));
    }
    Ok(())
}

pub fn spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let mode = match cfg.mode {
        Mode::Exact => GfMode::Exact,
        Mode::Sampled => match cfg.n_meas[..] {
            [n_meas] => GfMode::Sampled { n_meas, seed: cfg.seed },
            _ => return Err(CliError::Usage("spectrum takes a single --nmeas value".into())),
        },
    };
    let grid = frequency_grid(cfg.omega_min_ev, cfg.omega_max_ev, cfg.omega_step_ev)?;
    let (system, p) = problem(cfg)?;
    let td = match mode {
        GfMode::Exact => exact_transitions(&p)?,
        GfMode::Sampled { n_meas, seed } => Sampler::new(&p)?.transitions(n_meas, seed, 0)?,
    };
    let gf = LehmannGF::from_transitions(&td, &p);
    let a = spectral_function(&gf, &grid_to_absolute(&gf, &grid), cfg.delta_au)?;
    let self_energy = if cfg.self_energy {
        let eps = hf_orbital_energies(&system.ints)?;
        Some(self_energy_csv(&gf, &eps, &grid, cfg.delta_au)?)
    } else {
        None
    };

    prepare_out(cfg)?;
    write(&cfg.out, "spectrum.csv", &spectrum_csv(&grid, &a))?;
    write_json(&cfg.out, "transitions.json", &transitions_json(&td, gf.mu))?;
    if let Some(csv) = self_energy {
        write(&cfg.out, "self_energy.csv", &csv)?;
    }
    println!("{} poles, mu = {:.6} eV", gf.poles.len(), ha_to_ev(gf.mu));
    Ok(())
}

struct ScatterRow {
    n_meas: u64,
    repetition: u64,
    report: GmReport,
}

pub fn gm_study(cfg: &RunConfig) -> Result<(), CliError> {
    let (system, p) = problem(cfg)?;
    let eps = hf_orbital_energies(&system.ints)?;
    let exact = gm_energy(&calc_gf(&p, GfMode::Exact)?, &system.ints, &eps)?;
    let sampler = match cfg.mode {
        Mode::Sampled => Some(Sampler::new(&p)?),
        Mode::Exact => None,
    };

    let jobs: Vec<(u64, u64)> = cfg
        .n_meas
        .iter()
        .flat_map(|&n| (0..cfg.repetitions).map(move |rep| (n, rep)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(n_meas, repetition)| {
            let report = match &sampler {
                None => exact.clone(),
                Some(s) => {
                    let td = s.transitions(n_meas, cfg.seed, repetition)?;
                    gm_energy(&LehmannGF::from_transitions(&td, &p), &system.ints, &eps)?
                }
            };
            Ok(ScatterRow {
                n_meas,
                repetition,
                report,
            })
        })
        .collect::<Result<Vec<_>, qgf::Error>>()?;

    let mut scatter = String::from("n_meas,repetition,delta_e1_ev,delta_e2_ev\n");
    for r in &rows {
        let _ = writeln!(
            scatter,
            "{},{},{:.8},{:.8}",
            r.n_meas, r.repetition, r.report.delta_e1_ev, r.report.delta_e2_ev
        );
    }

    let exact_total = exact.delta_e1_ev + exact.delta_e2_ev;
    let mut summary = String::from("n_meas,mean_delta_e1_ev,mean_delta_e2_ev,sd_total_ev,max_abs_dev_ev\n");
    for &n in &cfg.n_meas {
        let group: Vec<&GmReport> = rows.iter().filter(|r| r.n_meas == n).map(|r| &r.report).collect();
        let k = group.len() as f64;
        let totals: Vec<f64> = group.iter().map(|g| g.delta_e1_ev + g.delta_e2_ev).collect();
        let mean = totals.iter().sum::<f64>() / k;
        let sd = if group.len() > 1 {
            (totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        let dev = totals.iter().map(|t| (t - exact_total).abs()).fold(0.0, f64::max);
        let _ = writeln!(
            summary,
            "{n},{:.8},{:.8},{sd:.8},{dev:.8}",
            group.iter().map(|g| g.delta_e1_ev).sum::<f64>() / k,
            group.iter().map(|g| g.delta_e2_ev).sum::<f64>() / k,
        );
    }

    prepare_out(cfg)?;
    write(&cfg.out, "gm_scatter.csv", &scatter)?;
    write(&cfg.out, "gm_summary.csv", &summary)?;
    write_json(
        &cfg.out,
        "gm_reference.json",
        &json!({
            "ansatz": cfg.ansatz,
            "e_gs_ev": ha_to_ev(p.e_gs),
            "exact": exact,
        }),
    )?;
    println!(
        "reference: dE1 = {:.6} eV, dE2 = {:.6} eV, E_GM = {:.6} eV",
        exact.delta_e1_ev, exact.delta_e2_ev, exact.e_gm_ev
    );
    Ok(())
}
