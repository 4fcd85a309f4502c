use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use super::MolecularIntegrals;
use crate::error::{Error, Result};

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn check_keys(params: &BTreeMap<String, f64>, allowed: &[&str], model: &str) -> Result<()> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Invalid(format!("model {model} has no parameter '{k}'")));
        }
    }
    Ok(())
}

/// Built-in model systems expressed as integrals.
///
/// * `single_level`: one spatial orbital, parameters `eps` (default -1),
///   `u` (on-site repulsion, default 0), `n_elec` (default 2).
/// * `hubbard_dimer`: two sites at half filling, parameters `t` (default 1)
///   and `U` (default 0), emitted in the bonding/antibonding basis.
pub fn builtin_model(name: &str, params: &BTreeMap<String, f64>) -> Result<MolecularIntegrals> {
    match name {
        "single_level" => {
            check_keys(params, &["eps", "u", "n_elec"], name)?;
            let n_elec = param(params, "n_elec", 2.0);
            if !(0.0..=2.0).contains(&n_elec) || n_elec.fract() != 0.0 {
                return Err(Error::Invalid(format!(
                    "single_level n_elec must be 0, 1 or 2, got {n_elec}"
                )));
            }
            let mut ints = MolecularIntegrals::new(1, n_elec as usize);
            ints.set_h(0, 0, param(params, "eps", -1.0));
            ints.set_eri(0, 0, 0, 0, param(params, "u", 0.0));
            Ok(ints)
        }
        "hubbard_dimer" => {
            check_keys(params, &["t", "U"], name)?;
            Ok(hubbard_dimer(param(params, "t", 1.0), param(params, "U", 0.0)))
        }
        _ => Err(Error::Unknown {
            kind: "model",
            name: name.to_string(),
        }),
    }
}

fn hubbard_dimer(t: f64, u: f64) -> MolecularIntegrals {
    // columns: bonding (1,1)/√2, antibonding (1,-1)/√2 over the two sites
    let c = [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]];
    let h_site = [[0.0, -t], [-t, 0.0]];
    let mut ints = MolecularIntegrals::new(2, 2);
    for p in 0..2 {
        for q in 0..=p {
            let mut v = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    v += c[i][p] * h_site[i][j] * c[j][q];
                }
            }
            ints.set_h(p, q, v);
        }
    }
    for p in 0..2 {
        for q in 0..2 {
            for r in 0..2 {
                for s in 0..2 {
                    let v: f64 = (0..2).map(|i| u * c[i][p] * c[i][q] * c[i][r] * c[i][s]).sum();
                    ints.set_eri(p, q, r, s, v);
                }
            }
        }
    }
    ints
}
