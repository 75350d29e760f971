//! Truncated-domain resolvent solves and epsilon sweeps toward the boundary values.

mod extrapolate;
mod solve;
mod sweep;

pub use extrapolate::{extrapolate_scalar, extrapolate_states, limit_extrapolate, Extrapolation};
pub use solve::{
    radiation_bc, solve, BcTag, BoundaryCondition, ClosureOrder, FactoredResolvent, SolveResult,
    SpectralParam, CONDITION_CAP, SOLVER_TOL,
};
pub use sweep::{
    eps_sweep, standard_metrics, Metric, MetricContext, SweepOptions, SweepRecord, SweepRow,
    TruncationAudit,
};
pub use sweep::metrics;
