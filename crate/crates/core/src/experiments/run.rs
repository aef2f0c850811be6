use serde::{Deserialize, Serialize};

use crate::consensus::{consensus_error, consensus_point_into, ConsensusInput};
use crate::dynamics::{apply_step, ParticleState, SwarmConfig};
use crate::error::{Result, SwarmError};
use crate::noise::{realization_rng, StepDraws};
use crate::objectives::ObjectiveSpec;

use super::energy::energy_functional;

/// Coordinates in which the success radius is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    Native,
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityInit {
    Zero,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StallSettings {
    pub tol: f64,
    pub window: usize,
}

impl Default for StallSettings {
    fn default() -> Self {
        StallSettings {
            tol: 1e-4,
            window: 500,
        }
    }
}

/// Per-realization controls that are not algorithm parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub k_max: usize,
    pub stall: Option<StallSettings>,
    pub success_radius: f64,
    pub success_coordinates: Coordinates,
    pub velocity_init: VelocityInit,
    pub record_consensus: bool,
    /// Records the energy functional with this weight at every step.
    pub energy_gamma: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            k_max: 1000,
            stall: Some(StallSettings::default()),
            success_radius: 0.25,
            success_coordinates: Coordinates::Native,
            velocity_init: VelocityInit::Zero,
            record_consensus: false,
            energy_gamma: None,
        }
    }
}

/// Counts consecutive steps in which the consensus point moved less than `tol`.
#[derive(Debug, Clone)]
pub struct StallMonitor {
    pub tol: f64,
    pub window: usize,
    pub counter: usize,
    pub prev_consensus: Vec<f64>,
}

impl StallMonitor {
    pub fn new(settings: StallSettings, initial: &[f64]) -> Self {
        StallMonitor {
            tol: settings.tol,
            window: settings.window,
            counter: 0,
            prev_consensus: initial.to_vec(),
        }
    }

    /// Feeds the newest consensus point; returns `true` once the run should stop.
    pub fn observe(&mut self, current: &[f64]) -> bool {
        let moved = self
            .prev_consensus
            .iter()
            .zip(current)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if moved < self.tol {
            self.counter += 1;
        } else {
            self.counter = 0;
        }
        self.prev_consensus.copy_from_slice(current);
        self.counter > self.window
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    /// Final consensus point in native coordinates.
    pub final_consensus: Vec<f64>,
    pub stop_step: usize,
    pub fitness_gap: f64,
    /// Infinity-norm distance to the minimizer in native coordinates.
    pub linf_error: f64,
    pub success: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consensus_history: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_history: Option<Vec<f64>>,
}

/// Evaluates every particle and writes the consensus point into `xa`.
pub(crate) fn update_consensus(
    objective: &ObjectiveSpec,
    state: &ParticleState,
    alpha: f64,
    fitness: &mut [f64],
    scratch: &mut Vec<f64>,
    xa: &mut [f64],
) -> Result<()> {
    for (f, x) in fitness.iter_mut().zip(state.positions.chunks_exact(state.dim)) {
        *f = objective.evaluate_unit(x, scratch);
    }
    consensus_point_into(
        ConsensusInput {
            positions: &state.positions,
            dim: state.dim,
            fitnesses: fitness,
            alpha,
        },
        xa,
    )
}

/// Runs one realization from uniform initial positions on the unit box.
pub fn run_realization(
    objective: &ObjectiveSpec,
    cfg: &SwarmConfig,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunResult> {
    cfg.validate()?;
    if cfg.dim != objective.dim {
        return Err(SwarmError::DimensionMismatch {
            expected: objective.dim,
            got: cfg.dim,
        });
    }
    if opts.k_max == 0 {
        return Err(SwarmError::config("k_max", "must be >= 1"));
    }
    let (n, d) = (cfg.n_particles, cfg.dim);
    let mut rng = realization_rng(seed);
    let mut state = ParticleState::uniform(n, d, cfg.domain_lo, cfg.domain_hi, &mut rng);
    if opts.velocity_init == VelocityInit::Gaussian {
        state.randomize_velocities(&mut rng);
    }

    let x_star_unit = objective.minimizer_unit();
    let mut fitness = vec![0.0; n];
    let mut scratch = Vec::with_capacity(d);
    let mut xa = vec![0.0; d];
    update_consensus(objective, &state, cfg.alpha, &mut fitness, &mut scratch, &mut xa)?;

    let mut consensus_history = opts.record_consensus.then(|| vec![xa.clone()]);
    let mut energy_history = opts
        .energy_gamma
        .map(|g| vec![energy_functional(&state, &x_star_unit, cfg.lambda, g)]);
    let mut stall = opts.stall.map(|s| StallMonitor::new(s, &xa));
    let mut draws = StepDraws::new(n, d);
    let keep_prob = cfg.keep_probability();

    let mut stop_step = opts.k_max;
    for k in 1..=opts.k_max {
        draws.fill(&mut rng, keep_prob, cfg.noise);
        apply_step(&mut state, &xa, cfg, &draws)?;
        if !state.is_finite() {
            return Err(SwarmError::NonFinite { step: k });
        }
        update_consensus(objective, &state, cfg.alpha, &mut fitness, &mut scratch, &mut xa)?;
        if let Some(h) = consensus_history.as_mut() {
            h.push(xa.clone());
        }
        if let (Some(h), Some(g)) = (energy_history.as_mut(), opts.energy_gamma) {
            h.push(energy_functional(&state, &x_star_unit, cfg.lambda, g));
        }
        if stall.as_mut().is_some_and(|s| s.observe(&xa)) {
            stop_step = k;
            break;
        }
    }

    let final_consensus = objective.from_unit(&xa)?;
    let f_star = objective.evaluate(&objective.minimizer)?;
    let fitness_gap = objective.evaluate(&final_consensus)? - f_star;
    let linf_error = consensus_error(&final_consensus, &objective.minimizer)?.linf;
    let measured = match opts.success_coordinates {
        Coordinates::Native => linf_error,
        Coordinates::Unit => linf_error / objective.unit_scale(),
    };
    Ok(RunResult {
        seed,
        final_consensus,
        stop_step,
        fitness_gap,
        linf_error,
        success: measured <= opts.success_radius,
        consensus_history,
        energy_history,
    })
}
