use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::SwarmConfig;
use crate::error::{Result, SwarmError};
use crate::noise::realization_seed;
use crate::objectives::ObjectiveSpec;

use super::run::{run_realization, RunOptions, RunResult};
use super::stats::mean;

/// Fitness values above this are left out of the sigma-sweep fitness means.
pub const FITNESS_EXCLUSION: f64 = 1e7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub n_runs: usize,
    pub success_rate: f64,
    pub mean_fitness_gap: f64,
    pub mean_linf_error: f64,
    pub per_run: Vec<RunResult>,
}

impl BatchStats {
    pub fn from_runs(per_run: Vec<RunResult>) -> Self {
        let n_runs = per_run.len();
        let successes = per_run.iter().filter(|r| r.success).count();
        let gaps: Vec<f64> = per_run.iter().map(|r| r.fitness_gap).collect();
        let errs: Vec<f64> = per_run.iter().map(|r| r.linf_error).collect();
        BatchStats {
            n_runs,
            success_rate: successes as f64 / n_runs as f64,
            mean_fitness_gap: mean(&gaps),
            mean_linf_error: mean(&errs),
            per_run,
        }
    }

    pub fn linf_errors(&self) -> Vec<f64> {
        self.per_run.iter().map(|r| r.linf_error).collect()
    }
}

/// Runs `n_runs` realizations in parallel; run `i` uses
/// `realization_seed(root_seed, i)` and results keep index order.
pub fn run_batch(
    objective: &ObjectiveSpec,
    cfg: &SwarmConfig,
    opts: &RunOptions,
    n_runs: usize,
    root_seed: u64,
) -> Result<BatchStats> {
    if n_runs == 0 {
        return Err(SwarmError::config("n_runs", "must be >= 1"));
    }
    cfg.validate()?;
    let runs = (0..n_runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = realization_seed(root_seed, i);
            let obj = objective.for_realization(seed);
            run_realization(&obj, cfg, seed, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BatchStats::from_runs(runs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSweepRow {
    pub sigma: f64,
    pub success_rate: f64,
    /// Mean over runs whose gap does not exceed [`FITNESS_EXCLUSION`].
    pub mean_fitness_gap: f64,
    pub mean_linf_error: f64,
    pub excluded_runs: usize,
}

/// One batch per diffusion gain, all sharing `root_seed`.
pub fn sigma_sweep(
    objective: &ObjectiveSpec,
    cfg: &SwarmConfig,
    opts: &RunOptions,
    sigmas: &[f64],
    n_runs: usize,
    root_seed: u64,
) -> Result<Vec<SigmaSweepRow>> {
    if sigmas.is_empty() {
        return Err(SwarmError::config("sigmas", "must not be empty"));
    }
    sigmas
        .iter()
        .map(|&sigma| {
            let cfg = SwarmConfig {
                sigma,
                ..cfg.clone()
            };
            let stats = run_batch(objective, &cfg, opts, n_runs, root_seed)?;
            let kept: Vec<f64> = stats
                .per_run
                .iter()
                .map(|r| r.fitness_gap)
                .filter(|g| *g <= FITNESS_EXCLUSION)
                .collect();
            Ok(SigmaSweepRow {
                sigma,
                success_rate: stats.success_rate,
                mean_fitness_gap: mean(&kept),
                mean_linf_error: stats.mean_linf_error,
                excluded_runs: stats.n_runs - kept.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{make_objective, ObjectiveId};

    fn small() -> (ObjectiveSpec, SwarmConfig, RunOptions) {
        let obj = make_objective(ObjectiveId::Schwefel220, 3, 0).unwrap();
        let cfg = SwarmConfig {
            dim: 3,
            n_particles: 20,
            ..SwarmConfig::default()
        };
        let opts = RunOptions {
            k_max: 50,
            ..RunOptions::default()
        };
        (obj, cfg, opts)
    }

    #[test]
    fn single_run_rate_is_zero_or_one() {
        let (obj, cfg, opts) = small();
        let b = run_batch(&obj, &cfg, &opts, 1, 4).unwrap();
        assert!(b.success_rate == 0.0 || b.success_rate == 1.0);
    }

    #[test]
    fn batch_is_deterministic_and_aggregates() {
        let (obj, cfg, opts) = small();
        let a = run_batch(&obj, &cfg, &opts, 6, 9).unwrap();
        let b = run_batch(&obj, &cfg, &opts, 6, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(BatchStats::from_runs(a.per_run.clone()), a);
        assert_eq!(a.per_run[2].seed, realization_seed(9, 2));
    }

    #[test]
    fn xsy_draws_new_coefficients_per_run() {
        let obj = make_objective(ObjectiveId::XsyRandom, 3, 0).unwrap();
        let a = obj.for_realization(1);
        let b = obj.for_realization(2);
        assert_ne!(a.xsy_coeffs, b.xsy_coeffs);
    }

    #[test]
    fn empty_sweep_rejected() {
        let (obj, cfg, opts) = small();
        assert!(sigma_sweep(&obj, &cfg, &opts, &[], 2, 0).is_err());
        let rows = sigma_sweep(&obj, &cfg, &opts, &[0.0, 0.5], 2, 0).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].sigma, 0.5);
    }
}
