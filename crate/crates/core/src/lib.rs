//! Green's functions of molecular Hamiltonians from sampled ancilla circuits.

pub mod eigen;
pub mod error;
pub mod gf;
pub mod hamiltonian;
pub mod jw;
pub mod pauli;
pub mod pipeline;
pub mod rng;
pub mod sim;
pub mod vqe;

pub use error::{Error, Result};
