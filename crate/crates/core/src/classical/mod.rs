//! Classical billiard dynamics and the spectral content of the piston force.

mod analytic;
mod geometry;
mod spectrum;
mod trajectory;

pub use analytic::{
    analytic_moments, comb_spectrum, gc_classical, instability_exponent, low_frequency_spectrum,
    AnalyticMoments, LowFrequencyMode,
};
pub use geometry::{propagate_to_next_collision, ParticleState, Table, Vec2, Wall, GRAZING_COS};
pub use spectrum::{
    number_variance_c0, spike_spectrum, spike_spectrum_with, CountWeight, SpectrumEstimate,
    SpectrumOptions,
};
pub use trajectory::{simulate_from, simulate_trajectory, CollisionSequence, PistonCollision};
