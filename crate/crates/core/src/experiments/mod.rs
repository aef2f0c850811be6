//! Experiment drivers: single realizations, batches, parameter sweeps, the
//! coupling-based chaos rate study and energy diagnostics.

pub mod batch;
pub mod cbo_limit;
pub mod chaos;
pub mod energy;
pub mod run;
pub mod stats;

pub use batch::{run_batch, sigma_sweep, BatchStats, SigmaSweepRow, FITNESS_EXCLUSION};
pub use cbo_limit::{cbo_limit_sweep, CboLimitRow, LimitMethod};
pub use chaos::{chaos_experiment, coupled_error, coupled_trajectory, ChaosReport, ChaosSettings};
pub use energy::{admissible_gamma, energy_decay_study, energy_functional, EnergyReport};
pub use run::{
    run_realization, Coordinates, RunOptions, RunResult, StallMonitor, StallSettings, VelocityInit,
};
