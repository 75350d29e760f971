//! Grids, potential families, cutoffs and the executable envelope conditions.

mod conditions;
mod cutoff;
mod grid;
mod potential;

pub use conditions::{validate_conditions, validate_conditions_with, ClauseVerdicts, EnvelopeReport, DEFAULT_TREND_TOL};
pub use cutoff::{chi, chi_n, chi_n_prime, chi_prime, CHI_PRIME_MAX};
pub use grid::{build_grid, grid_with_spacing, RadialGrid, BOUNDARY_LAYER};
pub use potential::{
    builtin_potential, Params, PotentialFamily, PotentialModel, PotentialRegistry,
};
