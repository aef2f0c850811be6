//! Empirical propagation-of-chaos rate.
//!
//! For each particle count `N`, an `N`-particle interacting system is run
//! next to a reference cloud of `n_ref` particles that plays the role of the
//! mean-field law. The first `N` cloud particles start from the same data as
//! the interacting system and consume the same refresh and noise draws, so
//! the pair is a synchronous coupling. The reported error is
//! `(1/N) sum_i |X_i - Xbar_i| + |V_i - Vbar_i|` at the horizon.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{apply_step, ParticleState, SwarmConfig, Variant};
use crate::error::{Result, SwarmError};
use crate::noise::{realization_rng, realization_seed, StepDraws};
use crate::objectives::ObjectiveSpec;

use super::run::update_consensus;
use super::stats::{least_squares, mean, LinearFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosSettings {
    pub n_values: Vec<usize>,
    pub n_ref: usize,
    pub horizon: f64,
    pub n_trials: usize,
}

impl Default for ChaosSettings {
    fn default() -> Self {
        ChaosSettings {
            n_values: vec![32, 64, 128, 256, 512, 1024],
            n_ref: 4096,
            horizon: 5.0,
            n_trials: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosReport {
    pub n_values: Vec<usize>,
    pub n_ref: usize,
    pub horizon: f64,
    pub steps: usize,
    /// Trial-mean coupled error per `N`.
    pub coupled_errors: Vec<f64>,
    /// `per_trial[j][t]`: error for `n_values[j]` in trial `t`.
    pub per_trial: Vec<Vec<f64>>,
    pub fitted_slope: f64,
    pub fit: LinearFit,
}

/// Mean over particles of `|X_i - Y_i| + |V_i - W_i|` (Euclidean norms).
pub fn coupled_error(a: &ParticleState, b: &ParticleState) -> f64 {
    let d = a.dim;
    let n = a.n.min(b.n);
    let dist = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let total: f64 = (0..n)
        .map(|i| {
            let r = i * d..(i + 1) * d;
            dist(&a.positions[r.clone()], &b.positions[r.clone()])
                + dist(&a.velocities[r.clone()], &b.velocities[r])
        })
        .sum();
    total / n as f64
}

/// Error history `e_0..=e_steps` of one coupled pair.
pub fn coupled_trajectory(
    objective: &ObjectiveSpec,
    cfg: &SwarmConfig,
    n: usize,
    n_ref: usize,
    steps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let d = cfg.dim;
    let mut rng = realization_rng(seed);
    let mut cloud = ParticleState::uniform(n_ref, d, cfg.domain_lo, cfg.domain_hi, &mut rng);
    let mut system = cloud.prefix(n);

    let mut fit_cloud = vec![0.0; n_ref];
    let mut fit_system = vec![0.0; n];
    let mut scratch = Vec::with_capacity(d);
    let mut xa_cloud = vec![0.0; d];
    let mut xa_system = vec![0.0; d];
    let mut draws = StepDraws::new(n_ref, d);
    let keep_prob = cfg.keep_probability();

    let mut errors = Vec::with_capacity(steps + 1);
    errors.push(coupled_error(&system, &cloud));
    for k in 1..=steps {
        update_consensus(objective, &cloud, cfg.alpha, &mut fit_cloud, &mut scratch, &mut xa_cloud)?;
        update_consensus(objective, &system, cfg.alpha, &mut fit_system, &mut scratch, &mut xa_system)?;
        draws.fill(&mut rng, keep_prob, cfg.noise);
        apply_step(&mut cloud, &xa_cloud, cfg, &draws)?;
        apply_step(&mut system, &xa_system, cfg, &draws)?;
        if !cloud.is_finite() || !system.is_finite() {
            return Err(SwarmError::NonFinite { step: k });
        }
        errors.push(coupled_error(&system, &cloud));
    }
    Ok(errors)
}

pub fn chaos_experiment(
    objective: &ObjectiveSpec,
    cfg: &SwarmConfig,
    settings: &ChaosSettings,
    root_seed: u64,
) -> Result<ChaosReport> {
    cfg.validate()?;
    if cfg.variant != Variant::ProjectedJump {
        return Err(SwarmError::config("variant", "the chaos experiment needs projected_jump"));
    }
    if !(cfg.dt > 0.0 && cfg.dt <= 1.0) {
        return Err(SwarmError::config("dt", "must lie in (0, 1] for the chaos experiment"));
    }
    let ns = &settings.n_values;
    if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SwarmError::config("n_values", "must be nonempty, positive and strictly increasing"));
    }
    let n_max = *ns.last().expect("nonempty");
    if settings.n_ref < 4 * n_max {
        return Err(SwarmError::config(
            "n_ref",
            format!("must be at least 4 * max(n_values) = {}", 4 * n_max),
        ));
    }
    if settings.n_trials == 0 {
        return Err(SwarmError::config("n_trials", "must be >= 1"));
    }
    if !(settings.horizon > 0.0) {
        return Err(SwarmError::config("horizon", "must be > 0"));
    }
    let steps = ((settings.horizon / cfg.dt).round() as usize).max(1);

    let jobs: Vec<(usize, usize)> = (0..ns.len())
        .flat_map(|j| (0..settings.n_trials).map(move |t| (j, t)))
        .collect();
    let finals = jobs
        .par_iter()
        .map(|&(j, t)| {
            // the cloud of trial t is the same for every N
            let seed = realization_seed(root_seed, t as u64);
            coupled_trajectory(objective, cfg, ns[j], settings.n_ref, steps, seed)
                .map(|e| *e.last().expect("nonempty"))
        })
        .collect::<Result<Vec<_>>>()?;

    let per_trial: Vec<Vec<f64>> = finals.chunks(settings.n_trials).map(<[f64]>::to_vec).collect();
    let coupled_errors: Vec<f64> = per_trial.iter().map(|v| mean(v)).collect();
    if coupled_errors.iter().any(|e| !(*e > 0.0)) {
        return Err(SwarmError::InvalidArgument(
            "coupled error vanished; the log-log fit is undefined".into(),
        ));
    }
    let log_n: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let log_e: Vec<f64> = coupled_errors.iter().map(|e| e.ln()).collect();
    let fit = least_squares(&log_n, &log_e)?;
    Ok(ChaosReport {
        n_values: ns.clone(),
        n_ref: settings.n_ref,
        horizon: settings.horizon,
        steps,
        coupled_errors,
        per_trial,
        fitted_slope: fit.slope,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{make_objective, ObjectiveId};

    fn setup() -> (ObjectiveSpec, SwarmConfig) {
        let obj = make_objective(ObjectiveId::Ackley, 3, 0).unwrap();
        let cfg = SwarmConfig {
            dim: 3,
            variant: Variant::ProjectedJump,
            sigma0: 0.01,
            alpha: 1.0,
            ..SwarmConfig::default()
        };
        (obj, cfg)
    }

    #[test]
    fn full_cloud_coupling_has_zero_error_throughout() {
        let (obj, cfg) = setup();
        let e = coupled_trajectory(&obj, &cfg, 64, 64, 20, 5).unwrap();
        assert!(e.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn error_starts_at_zero_and_stays_nonnegative() {
        let (obj, cfg) = setup();
        let e = coupled_trajectory(&obj, &cfg, 16, 128, 20, 5).unwrap();
        assert_eq!(e[0], 0.0);
        assert!(e.iter().all(|v| *v >= 0.0));
        assert!(e[20] > 0.0);
    }

    #[test]
    fn rejects_bad_settings() {
        let (obj, cfg) = setup();
        let small_ref = ChaosSettings {
            n_values: vec![8, 16],
            n_ref: 32,
            horizon: 1.0,
            n_trials: 1,
        };
        assert!(chaos_experiment(&obj, &cfg, &small_ref, 0).is_err());
        let jump = SwarmConfig {
            variant: Variant::Jump,
            ..cfg.clone()
        };
        let ok = ChaosSettings {
            n_ref: 64,
            ..small_ref.clone()
        };
        assert!(chaos_experiment(&obj, &jump, &ok, 0).is_err());
        let unsorted = ChaosSettings {
            n_values: vec![16, 8],
            ..ok.clone()
        };
        assert!(chaos_experiment(&obj, &cfg, &unsorted, 0).is_err());
        let report = chaos_experiment(&obj, &cfg, &ok, 0).unwrap();
        assert_eq!(report.coupled_errors.len(), 2);
        assert_eq!(report.steps, 10);
    }
}
