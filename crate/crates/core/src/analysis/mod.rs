//! Probability densities, parameter sweeps and curve fits.

mod fit;
mod probability;
mod sweep;

pub use fit::{linspace, log_log_fit, power_law_fit, LogLogFit, PowerLawFit};
pub use probability::{
    exciton_probability, hf_difference, hf_probability, trion_probability, DifferenceGrid, ProbabilityGrid,
};
pub use sweep::{
    default_epsilon_grid, default_r_grid, sigma_spread, sweep_epsilon, sweep_model_comparison, sweep_species,
    EpsilonRow, EpsilonSweep, Method, ModelRow, SigmaCase, SpeciesEnergies, SpeciesRow, SpeciesSummary,
    SpeciesSweep,
    DETECTION_THRESHOLD_MEV,
};
