//! Statevector simulation: gates, circuits and projective measurement.

mod circuit;
mod state;

pub use circuit::{build_diag_circuit, build_offdiag_circuit, Circuit, Gate};
pub use state::{MeasurementRecord, StateVector};
