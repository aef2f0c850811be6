//! Joint position-velocity error functional and its decay study.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ParticleState, SwarmConfig};
use crate::error::{Result, SwarmError};
use crate::noise::realization_seed;
use crate::objectives::ObjectiveSpec;

use super::run::{run_realization, RunOptions};
use super::stats::{mean, median};

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// Empirical `(1/N) sum_i [gamma |X_i - x*| + |V_i - lambda (x* - X_i)|]`.
pub fn energy_functional(state: &ParticleState, x_star: &[f64], lambda: f64, gamma: f64) -> f64 {
    let d = state.dim;
    let total: f64 = state
        .positions
        .chunks_exact(d)
        .zip(state.velocities.chunks_exact(d))
        .map(|(x, v)| {
            let pos = norm(x.iter().zip(x_star).map(|(a, b)| a - b));
            let vel = norm(
                v.iter()
                    .zip(x)
                    .zip(x_star)
                    .map(|((vl, xl), sl)| vl - lambda * (sl - xl)),
            );
            gamma * pos + vel
        })
        .sum();
    total / state.n as f64
}

/// Interval of energy weights for which the error functional contracts:
/// `[nu 4 sigma sqrt(d) / lambda + 2 lambda, nu - 2 lambda]`, or `None` when empty.
///
/// The interval is nonempty iff `lambda > 4 sigma sqrt(d)` and
/// `nu (1 - 4 sigma sqrt(d) / lambda) >= 4 lambda`.
pub fn admissible_gamma(lambda: f64, sigma: f64, nu: f64, d: usize) -> Option<(f64, f64)> {
    let lo = nu * 4.0 * sigma * (d as f64).sqrt() / lambda + 2.0 * lambda;
    let hi = nu - 2.0 * lambda;
    (lo <= hi).then_some((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub gamma: f64,
    pub n_runs: usize,
    pub window: usize,
    /// Median over runs of the energy at step 0.
    pub h0: f64,
    /// Median over runs at every step.
    pub median_history: Vec<f64>,
    /// Mean of the median history over consecutive windows.
    pub window_means: Vec<f64>,
    /// Window means never increase while above `0.1 * h0`.
    pub monotone_until_plateau: bool,
    /// Some window mean fell below `0.1 * h0`.
    pub plateau_reached: bool,
}

impl EnergyReport {
    pub fn passed(&self) -> bool {
        self.monotone_until_plateau && self.plateau_reached
    }
}

/// Runs `n_runs` realizations without stall stopping and summarizes the
/// windowed median energy.
pub fn energy_decay_study(
    objective: &ObjectiveSpec,
    cfg: &SwarmConfig,
    gamma: f64,
    n_runs: usize,
    k_max: usize,
    window: usize,
    root_seed: u64,
) -> Result<EnergyReport> {
    if !(gamma > 0.0) {
        return Err(SwarmError::config("gamma", "must be > 0"));
    }
    if n_runs == 0 || window == 0 {
        return Err(SwarmError::InvalidArgument("n_runs and window must be >= 1".into()));
    }
    let opts = RunOptions {
        k_max,
        stall: None,
        energy_gamma: Some(gamma),
        ..RunOptions::default()
    };
    let histories = (0..n_runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = realization_seed(root_seed, i);
            let obj = objective.for_realization(seed);
            run_realization(&obj, cfg, seed, &opts)
                .map(|r| r.energy_history.expect("energy recorded"))
        })
        .collect::<Result<Vec<_>>>()?;

    let steps = histories[0].len();
    let median_history: Vec<f64> = (0..steps)
        .map(|k| median(&histories.iter().map(|h| h[k]).collect::<Vec<_>>()))
        .collect();
    let h0 = median_history[0];
    let window_means: Vec<f64> = median_history.chunks(window).map(mean).collect();
    let threshold = 0.1 * h0;
    let monotone_until_plateau = window_means
        .windows(2)
        .take_while(|w| w[0] >= threshold)
        .all(|w| w[1] <= w[0]);
    let plateau_reached = window_means.iter().any(|m| *m < threshold);
    Ok(EnergyReport {
        gamma,
        n_runs,
        window,
        h0,
        median_history,
        window_means,
        monotone_until_plateau,
        plateau_reached,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn energy_zero_at_minimizer_at_rest() {
        let s = ParticleState::new(vec![0.2, 0.3, 0.2, 0.3], vec![0.0; 4], 2).unwrap();
        assert_eq!(energy_functional(&s, &[0.2, 0.3], 1.0, 5.0), 0.0);
    }

    #[test]
    fn energy_of_moving_particle_at_minimizer_is_speed() {
        let s = ParticleState::new(vec![0.0, 0.0], vec![3.0, 4.0], 2).unwrap();
        assert_abs_diff_eq!(energy_functional(&s, &[0.0, 0.0], 1.0, 2.0), 5.0, epsilon = 1e-15);
    }

    #[test]
    fn energy_mixes_position_and_velocity_terms() {
        // x - x* = (1, 0), v = (0, 0): gamma * 1 + |lambda * (1, 0)|
        let s = ParticleState::new(vec![1.0, 0.0], vec![0.0, 0.0], 2).unwrap();
        assert_abs_diff_eq!(energy_functional(&s, &[0.0, 0.0], 2.0, 3.0), 5.0, epsilon = 1e-15);
    }

    #[test]
    fn admissible_interval_arithmetic() {
        let (lo, hi) = admissible_gamma(1.0, 0.05, 10.0, 2).unwrap();
        assert_abs_diff_eq!(lo, 2.0 + 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(0.5 * (lo + hi), 6.414_213_562_373_095, epsilon = 1e-12);
    }

    #[test]
    fn admissible_interval_empty_cases() {
        assert!(admissible_gamma(1.0, 0.25, 8.0, 2).is_none());
        // nu <= 2 lambda leaves no room
        assert!(admissible_gamma(1.0, 0.001, 2.0, 1).is_none());
        // lambda = 4 sigma sqrt(d): lower end is nu + 2 lambda > nu - 2 lambda for every nu
        for nu in [1.0, 1e3, 1e9] {
            assert!(admissible_gamma(1.0, 0.25 / 2f64.sqrt(), nu, 2).is_none());
        }
    }
}
