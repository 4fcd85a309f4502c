use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("index {index} out of range for {len} modes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("auxiliary ladder operators need two distinct modes, got {0} twice")]
    InvalidPair(usize),

    #[error("operator is not Hermitian (anti-Hermitian part {0:.3e})")]
    NonHermitian(f64),

    #[error("operator is not unitary: {0}")]
    NonUnitary(String),

    #[error("FCIDUMP parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("bad system source '{source_str}': {msg}")]
    Source { source_str: String, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error("odd electron count {0}; a closed-shell reference is required")]
    OddElectronCount(usize),

    #[error("Hamiltonian does not conserve particle number (leak {0:.3e})")]
    NotNumberConserving(f64),

    #[error("sector dimension {dim} exceeds the memory budget of {budget}")]
    Resource { dim: usize, budget: usize },

    #[error("state has weight {weight:.3e} outside the {n_electrons}-electron sector")]
    SectorLeak { n_electrons: usize, weight: f64 },

    #[error("G(z) is numerically singular at z = {re:.6} + {im:.6}i; shift the frequency grid away from the pole")]
    PoleProximity { re: f64, im: f64 },

    #[error("integration contour passes within {distance:.3e} Ha of a pole at {pole:.8} Ha; widen the gap or move the contour by at least {suggested:.3e} Ha")]
    ContourTooClose { pole: f64, distance: f64, suggested: f64 },

    #[error("contour quadrature did not converge (last change {0:.3e} Ha)")]
    ContourNotConverged(f64),

    #[error("cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
