//! Truncated-basis quantum mechanics of the deformed box.

mod deformation;
mod hamiltonian;
mod perturbation;

pub use deformation::{
    deformation_fourier, deformation_profile, fourier_coefficient, u_magnitude_estimate, u_matrix_element,
    BoxState, DeformationTable,
};
pub use hamiltonian::{
    build_and_diagonalize, build_and_diagonalize_with, enumerate_basis, participation_number, DiagonalizeOptions,
    EigenSolution, SpectralWindow, DEFAULT_BUFFER_FRACTION,
};
pub use perturbation::{
    f0_element, f_matrix, fopt_estimates, sum_rule_deviation, window_analytics, FMatrix, FoptEstimates,
    WindowAnalytics,
};
