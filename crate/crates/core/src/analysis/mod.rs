//! Monte Carlo experiments on the schemes.
//!
//! All experiments draw path `i` from ChaCha stream `i` of the master seed and
//! reduce per-path results in path order, so their output does not depend on
//! how rayon schedules the work.

mod energy;
mod scaling;
mod shift;
mod stationary;
mod stats;
mod strong;

pub use energy::{energy_growth_test, system_energy, EnergyConfig, EnergyReport};
pub use scaling::{increment_scaling_test, ScalingConfig, ScalingReport};
pub use shift::{is_nonincreasing, shift_convergence_test};
pub use stationary::{stationary_test, StationaryConfig, StationaryReport};
pub use stats::{fit_rate, linear_fit, mean_and_se, sha256_hex, Fit, Z_95};
pub use strong::{
    strong_error_experiment, ErrorReport, ErrorRow, ExperimentConfig, GridLayout, OracleKind, RateFitEntry,
    MAX_BLOWUP_FRACTION,
};
