use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qgf::Error),

    #[error("{0}")]
    Usage(String),

    #[error("config file {}: {msg}", path.display())]
    Config { path: PathBuf, msg: String },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("VQE stopped after {iterations} iterations without converging (best energy {energy_ev:.6} eV)")]
    Unconverged { iterations: usize, energy_ev: f64 },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2: bad input, 3: unconverged optimizer, 4: resource limit, 1: anything else.
    pub fn exit_code(&self) -> u8 {
        use qgf::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::Core(E::Parse { .. } | E::Source { .. } | E::Unknown { .. }) => 2,
            CliError::Unconverged { .. } => 3,
            CliError::Core(E::Resource { .. }) => 4,
            _ => 1,
        }
    }
}
