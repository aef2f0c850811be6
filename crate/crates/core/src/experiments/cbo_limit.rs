//! Scaled jump swarm versus the CBO baseline as the scaling parameter shrinks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::{sigma_from_tilde, SwarmConfig, Variant};
use crate::error::{Result, SwarmError};
use crate::noise::NoiseKind;
use crate::objectives::ObjectiveSpec;

use super::batch::run_batch;
use super::run::RunOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitMethod {
    Scaled,
    Cbo,
}

impl fmt::Display for LimitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitMethod::Scaled => "scaled",
            LimitMethod::Cbo => "cbo",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CboLimitRow {
    /// Scaling parameter; `0` marks the CBO baseline.
    pub eps: f64,
    pub sigma_tilde: f64,
    pub method: LimitMethod,
    pub mean_linf_error: f64,
    pub success_rate: f64,
    pub linf_errors: Vec<f64>,
}

/// Scaled-variant rows for every `(eps, sigma_tilde)` in order, followed by
/// one CBO row per `sigma_tilde`.
///
/// Both methods use the same root seed, so run `i` of every batch starts from
/// the same particles and reads the same random stream.
pub fn cbo_limit_sweep(
    objective: &ObjectiveSpec,
    cfg: &SwarmConfig,
    opts: &RunOptions,
    eps_values: &[f64],
    sigma_tilde_grid: &[f64],
    n_runs: usize,
    root_seed: u64,
) -> Result<Vec<CboLimitRow>> {
    if eps_values.is_empty() || eps_values.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
        return Err(SwarmError::config("eps_values", "must be nonempty and lie in (0, 1]"));
    }
    if sigma_tilde_grid.is_empty() || sigma_tilde_grid.iter().any(|s| !(*s >= 0.0)) {
        return Err(SwarmError::config("sigma_tilde_grid", "must be nonempty and nonnegative"));
    }
    if cfg.noise != NoiseKind::Gaussian {
        return Err(SwarmError::config("noise", "the CBO comparison uses gaussian noise"));
    }

    let mut rows = Vec::with_capacity((eps_values.len() + 1) * sigma_tilde_grid.len());
    for &eps in eps_values {
        for &sigma_tilde in sigma_tilde_grid {
            let scaled = SwarmConfig {
                variant: Variant::ScaledJump,
                eps,
                sigma: sigma_from_tilde(sigma_tilde, eps, cfg.dt),
                cbo_sigma_tilde: sigma_tilde,
                ..cfg.clone()
            };
            let stats = run_batch(objective, &scaled, opts, n_runs, root_seed)?;
            rows.push(CboLimitRow {
                eps,
                sigma_tilde,
                method: LimitMethod::Scaled,
                mean_linf_error: stats.mean_linf_error,
                success_rate: stats.success_rate,
                linf_errors: stats.linf_errors(),
            });
        }
    }
    for &sigma_tilde in sigma_tilde_grid {
        let cbo = SwarmConfig {
            variant: Variant::Cbo,
            cbo_sigma_tilde: sigma_tilde,
            ..cfg.clone()
        };
        let stats = run_batch(objective, &cbo, opts, n_runs, root_seed)?;
        rows.push(CboLimitRow {
            eps: 0.0,
            sigma_tilde,
            method: LimitMethod::Cbo,
            mean_linf_error: stats.mean_linf_error,
            success_rate: stats.success_rate,
            linf_errors: stats.linf_errors(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{make_objective, ObjectiveId};

    #[test]
    fn unit_eps_equals_plain_jump_with_rescaled_sigma() {
        let obj = make_objective(ObjectiveId::Ackley, 4, 0).unwrap();
        let cfg = SwarmConfig {
            dim: 4,
            n_particles: 30,
            ..SwarmConfig::default()
        };
        let opts = RunOptions {
            k_max: 60,
            ..RunOptions::default()
        };
        let rows = cbo_limit_sweep(&obj, &cfg, &opts, &[1.0], &[1.5], 3, 7).unwrap();
        assert_eq!(rows.len(), 2);
        let jump = SwarmConfig {
            sigma: 1.5 / cfg.dt.sqrt(),
            ..cfg.clone()
        };
        let plain = run_batch(&obj, &jump, &opts, 3, 7).unwrap();
        assert_eq!(rows[0].linf_errors, plain.linf_errors());
        assert_eq!(rows[1].method, LimitMethod::Cbo);
    }

    #[test]
    fn row_layout_and_validation() {
        let obj = make_objective(ObjectiveId::Schwefel220, 2, 0).unwrap();
        let cfg = SwarmConfig {
            dim: 2,
            n_particles: 10,
            ..SwarmConfig::default()
        };
        let opts = RunOptions {
            k_max: 10,
            ..RunOptions::default()
        };
        let rows = cbo_limit_sweep(&obj, &cfg, &opts, &[1.0, 0.5], &[0.0, 1.0, 2.0], 2, 1).unwrap();
        assert_eq!(rows.len(), 2 * 3 + 3);
        assert_eq!(rows.iter().filter(|r| r.method == LimitMethod::Cbo).count(), 3);
        assert!(cbo_limit_sweep(&obj, &cfg, &opts, &[0.0], &[1.0], 1, 1).is_err());
        assert!(cbo_limit_sweep(&obj, &cfg, &opts, &[1.0], &[], 1, 1).is_err());
    }
}
