//! Transition matrices, Lehmann Green's functions and derived quantities.

mod gm;
mod lehmann;
mod output;
mod sampling;
mod transitions;

pub use gm::{
    delta_e1, delta_e2_residues, gauss_legendre, gm_energy, gm_energy_with, ContourConfig, ContourInfo, GmReport,
};
pub use lehmann::{
    calc_gf, density_matrix, density_matrix_spin_orbital, frequency_grid, grid_to_absolute, self_energy,
    self_energy_csv, spectral_function, spectrum_csv, GfMode, LehmannGF, Pole,
};
pub use output::transitions_json;
pub use sampling::{
    all_components, circuit_output, replay_histogram, sample_diag, sample_offdiag, transitions_from_histograms,
    Component, Histogram, Sampler, ShotTable,
};
pub use transitions::{
    exact_aux_probabilities, exact_transitions, recover_offdiagonal, AuxProbabilities, Branch, GfProblem, Provenance,
    TransitionData, TransitionGroup,
};
