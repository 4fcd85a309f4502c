use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sampled,
}

/// Settings as given on the command line or in a config file; every field is
/// optional so the two sources can be layered.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// FCIDUMP path or `builtin:<model>[,key=value...]`
    #[arg(long)]
    pub system: Option<String>,
    /// lih_u1 | lih_u2 | h2o_u1 | h2o_u2 | none | fci
    #[arg(long)]
    pub ansatz: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Shots per circuit component; a comma-separated list for gm-study
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub nmeas: Option<Vec<u64>>,
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Lorentzian broadening (Ha)
    #[arg(long)]
    pub delta_au: Option<f64>,
    /// Frequency window relative to the chemical potential (eV)
    #[arg(long, allow_negative_numbers = true)]
    pub omega_min_ev: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega_max_ev: Option<f64>,
    #[arg(long)]
    pub omega_step_ev: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optimizer iteration limit
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Largest sector dimension to diagonalize
    #[arg(long)]
    pub max_sector_dim: Option<usize>,
    /// Directory for cached sector spectra
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Also write the correlation self-energy trace
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub self_energy: Option<bool>,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<u64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(u64),
        Many(Vec<u64>),
    }
    Ok(match Option::<OneOrMany>::deserialize(d)? {
        None => None,
        Some(OneOrMany::One(v)) => Some(vec![v]),
        Some(OneOrMany::Many(v)) => Some(v),
    })
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }

    /// Fields set in `self` win over `other`.
    pub fn or(self, other: Settings) -> Settings {
        Settings {
            system: self.system.or(other.system),
            ansatz: self.ansatz.or(other.ansatz),
            mode: self.mode.or(other.mode),
            nmeas: self.nmeas.or(other.nmeas),
            reps: self.reps.or(other.reps),
            seed: self.seed.or(other.seed),
            delta_au: self.delta_au.or(other.delta_au),
            omega_min_ev: self.omega_min_ev.or(other.omega_min_ev),
            omega_max_ev: self.omega_max_ev.or(other.omega_max_ev),
            omega_step_ev: self.omega_step_ev.or(other.omega_step_ev),
            out: self.out.or(other.out),
            max_iter: self.max_iter.or(other.max_iter),
            max_sector_dim: self.max_sector_dim.or(other.max_sector_dim),
            cache_dir: self.cache_dir.or(other.cache_dir),
            self_energy: self.self_energy.or(other.self_energy),
        }
    }
}

/// Fully resolved run settings. Serialized next to the outputs; the output
/// directory itself is left out so reruns elsewhere compare equal.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub system: String,
    pub ansatz: String,
    pub mode: Mode,
    pub n_meas: Vec<u64>,
    pub repetitions: u64,
    pub seed: u64,
    pub delta_au: f64,
    pub omega_min_ev: f64,
    pub omega_max_ev: f64,
    pub omega_step_ev: f64,
    pub max_iter: usize,
    pub max_sector_dim: usize,
    pub self_energy: bool,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(s: Settings) -> Result<Self, CliError> {
        let cfg = RunConfig {
            system: s.system.ok_or_else(|| CliError::Usage("--system is required".into()))?,
            ansatz: s.ansatz.ok_or_else(|| CliError::Usage("--ansatz is required".into()))?,
            mode: s.mode.unwrap_or(Mode::Exact),
            n_meas: s.nmeas.unwrap_or_else(|| vec![32_000]),
            repetitions: s.reps.unwrap_or(1),
            seed: s.seed.unwrap_or(1),
            delta_au: s.delta_au.unwrap_or(0.02),
            omega_min_ev: s.omega_min_ev.unwrap_or(-80.0),
            omega_max_ev: s.omega_max_ev.unwrap_or(100.0),
            omega_step_ev: s.omega_step_ev.unwrap_or(0.05),
            max_iter: s.max_iter.unwrap_or(2000),
            max_sector_dim: s.max_sector_dim.unwrap_or(qgf::eigen::DEFAULT_MAX_SECTOR_DIM),
            self_energy: s.self_energy.unwrap_or(false),
            out: s.out.unwrap_or_else(|| PathBuf::from("qgf_out")),
            cache_dir: s.cache_dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.n_meas.is_empty() || self.n_meas.contains(&0) {
            return Err(CliError::Usage("every --nmeas value must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(CliError::Usage("--reps must be at least 1".into()));
        }
        if !(self.delta_au > 0.0 && self.delta_au.is_finite()) {
            return Err(CliError::Usage(format!(
                "--delta-au must be positive, got {}",
                self.delta_au
            )));
        }
        Ok(())
    }
}
