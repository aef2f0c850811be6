//! Particle update rules.
//!
//! Four variants share one state layout:
//!
//! * [`Variant::Jump`]: velocities are kept with probability `exp(-nu dt)` and
//!   otherwise resampled from the jump law `lambda (xa - x) + sigma |xa - x| xi`;
//!   positions then move with the new velocity and are clamped to the box.
//! * [`Variant::ProjectedJump`]: same, with the non-degenerate jump law
//!   `lambda (xa - x) + sigma (sigma0 + |xa - x|) xi`.
//! * [`Variant::ScaledJump`]: keep probability `exp(-nu dt / eps^2)` and jump
//!   amplitude `sigma / eps`.
//! * [`Variant::Cbo`]: first-order consensus-based update
//!   `x + lambda dt (xa - x) + sigma_tilde sqrt(dt) |x - xa| xi`.
//!
//! The consensus point is computed once per step from pre-step positions and
//! passed in by the caller. All variants consume the same per-step stream
//! layout (see [`crate::noise`]), so runs with the same seed see common random
//! numbers across variants.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwarmError};
use crate::noise::{NoiseKind, StepDraws};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Jump,
    ProjectedJump,
    ScaledJump,
    Cbo,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Jump => "jump",
            Variant::ProjectedJump => "projected_jump",
            Variant::ScaledJump => "scaled_jump",
            Variant::Cbo => "cbo",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = SwarmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jump" => Ok(Variant::Jump),
            "projected_jump" => Ok(Variant::ProjectedJump),
            "scaled_jump" => Ok(Variant::ScaledJump),
            "cbo" => Ok(Variant::Cbo),
            other => Err(SwarmError::InvalidArgument(format!("unknown variant `{other}`"))),
        }
    }
}

/// Algorithm parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig {
    /// Drift gain toward the consensus point.
    pub lambda: f64,
    /// Diffusion gain of the jump law.
    pub sigma: f64,
    /// Non-degeneracy floor (used by [`Variant::ProjectedJump`]).
    pub sigma0: f64,
    /// Jump frequency.
    pub nu: f64,
    pub dt: f64,
    /// Consensus weight exponent.
    pub alpha: f64,
    /// Diffusive scaling (used by [`Variant::ScaledJump`]).
    pub eps: f64,
    pub n_particles: usize,
    pub dim: usize,
    pub noise: NoiseKind,
    pub variant: Variant,
    pub domain_lo: f64,
    pub domain_hi: f64,
    /// Diffusion gain of the CBO baseline.
    pub cbo_sigma_tilde: f64,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            lambda: 1.0,
            sigma: 0.75,
            sigma0: 0.0,
            nu: 1.0,
            dt: 0.1,
            alpha: 1e5,
            eps: 1.0,
            n_particles: 200,
            dim: 20,
            noise: NoiseKind::Gaussian,
            variant: Variant::Jump,
            domain_lo: -1.0,
            domain_hi: 1.0,
            cbo_sigma_tilde: 0.0,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SwarmError::config(field, format!("must be > 0, got {v}")))
    }
}

fn nonnegative(field: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SwarmError::config(field, format!("must be >= 0, got {v}")))
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        positive("lambda", self.lambda)?;
        nonnegative("sigma", self.sigma)?;
        nonnegative("sigma0", self.sigma0)?;
        positive("nu", self.nu)?;
        positive("dt", self.dt)?;
        nonnegative("alpha", self.alpha)?;
        positive("eps", self.eps)?;
        nonnegative("sigma_tilde", self.cbo_sigma_tilde)?;
        if self.n_particles == 0 {
            return Err(SwarmError::config("n_particles", "must be >= 1"));
        }
        if self.dim == 0 {
            return Err(SwarmError::config("dim", "must be >= 1"));
        }
        if !(self.domain_lo < self.domain_hi) {
            return Err(SwarmError::config(
                "domain_lo",
                format!("must be below domain_hi ({} >= {})", self.domain_lo, self.domain_hi),
            ));
        }
        if self.variant == Variant::Cbo && self.noise != NoiseKind::Gaussian {
            return Err(SwarmError::config("noise", "the cbo variant requires gaussian noise"));
        }
        if self.variant == Variant::ScaledJump && self.eps < (self.nu * self.dt / 10.0).sqrt() {
            log::warn!(
                "eps = {} is small: keep probability exp(-nu dt / eps^2) = {:.3e}",
                self.eps,
                self.keep_probability()
            );
        }
        Ok(())
    }

    /// Probability that a particle keeps its velocity during one step.
    pub fn keep_probability(&self) -> f64 {
        match self.variant {
            Variant::ScaledJump => (-self.nu * self.dt / (self.eps * self.eps)).exp(),
            _ => (-self.nu * self.dt).exp(),
        }
    }
}

/// Jump-law gain `sigma` that matches a CBO diffusion `sigma_tilde` at scaling `eps`.
pub fn sigma_from_tilde(sigma_tilde: f64, eps: f64, dt: f64) -> f64 {
    sigma_tilde * eps / dt.sqrt()
}

/// Positions and velocities of `N` particles in `d` dimensions, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub n: usize,
    pub dim: usize,
    pub step: usize,
}

impl ParticleState {
    pub fn new(positions: Vec<f64>, velocities: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || positions.len() % dim != 0 || positions.is_empty() {
            return Err(SwarmError::InvalidArgument(format!(
                "{} coordinates do not form points of dimension {dim}",
                positions.len()
            )));
        }
        if velocities.len() != positions.len() {
            return Err(SwarmError::DimensionMismatch {
                expected: positions.len(),
                got: velocities.len(),
            });
        }
        let n = positions.len() / dim;
        Ok(ParticleState {
            positions,
            velocities,
            n,
            dim,
            step: 0,
        })
    }

    /// Positions uniform on `[lo, hi]^d`, velocities zero.
    pub fn uniform<R: Rng + ?Sized>(n: usize, dim: usize, lo: f64, hi: f64, rng: &mut R) -> Self {
        let positions = (0..n * dim).map(|_| rng.random_range(lo..=hi)).collect();
        ParticleState {
            positions,
            velocities: vec![0.0; n * dim],
            n,
            dim,
            step: 0,
        }
    }

    /// Replaces velocities with standard normal components.
    pub fn randomize_velocities<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for v in self.velocities.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }

    /// First `n` particles as a separate state.
    pub fn prefix(&self, n: usize) -> ParticleState {
        let len = n * self.dim;
        ParticleState {
            positions: self.positions[..len].to_vec(),
            velocities: self.velocities[..len].to_vec(),
            n,
            dim: self.dim,
            step: self.step,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.positions.iter().chain(&self.velocities).all(|v| v.is_finite())
    }
}

/// Euclidean projection onto the box `[lo, hi]^d`.
pub fn project_box(x: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    x.iter().map(|v| v.clamp(lo, hi)).collect()
}

#[inline]
fn project_in_place(x: &mut [f64], lo: f64, hi: f64) {
    for v in x {
        *v = v.clamp(lo, hi);
    }
}

/// Writes `lambda g + amp (floor + |g|) xi` componentwise, `g = xa - x`.
#[inline]
fn jump_law(out: &mut [f64], xa: &[f64], x: &[f64], xi: &[f64], lambda: f64, amp: f64, floor: f64) {
    for (((o, a), b), z) in out.iter_mut().zip(xa).zip(x).zip(xi) {
        let g = a - b;
        *o = lambda * g + amp * (floor + g.abs()) * z;
    }
}

/// Draws one fresh velocity from the non-degenerate jump law.
pub fn velocity_jump_sample<R: Rng + ?Sized>(
    xa: &[f64],
    x: &[f64],
    cfg: &SwarmConfig,
    rng: &mut R,
) -> Vec<f64> {
    let xi = crate::noise::sample(cfg.noise, x.len(), rng);
    let mut w = vec![0.0; x.len()];
    jump_law(&mut w, xa, x, &xi, cfg.lambda, cfg.sigma, cfg.sigma0);
    w
}

/// Jump step with explicit law parameters: refresh, transport, project.
fn jump_step(
    state: &mut ParticleState,
    xa: &[f64],
    draws: &StepDraws,
    cfg: &SwarmConfig,
    amp: f64,
    floor: f64,
) {
    let d = state.dim;
    let rows = state
        .positions
        .chunks_exact_mut(d)
        .zip(state.velocities.chunks_exact_mut(d))
        .zip(draws.keep.iter().zip(draws.noise.chunks_exact(d)));
    for ((x, v), (&keep, xi)) in rows {
        if !keep {
            jump_law(v, xa, x, xi, cfg.lambda, amp, floor);
        }
        for (xl, vl) in x.iter_mut().zip(v.iter()) {
            *xl += cfg.dt * vl;
        }
        project_in_place(x, cfg.domain_lo, cfg.domain_hi);
    }
    state.step += 1;
}

fn cbo_step(state: &mut ParticleState, xa: &[f64], draws: &StepDraws, cfg: &SwarmConfig) {
    let d = state.dim;
    let drift = cfg.lambda * cfg.dt;
    let diffusion = cfg.cbo_sigma_tilde * cfg.dt.sqrt();
    for (x, xi) in state.positions.chunks_exact_mut(d).zip(draws.noise.chunks_exact(d)) {
        for ((xl, a), z) in x.iter_mut().zip(xa).zip(xi) {
            let g = *xl - a;
            *xl += -drift * g + diffusion * g.abs() * z;
        }
        project_in_place(x, cfg.domain_lo, cfg.domain_hi);
    }
    state.step += 1;
}

fn check_draws(state: &ParticleState, xa: &[f64], draws: &StepDraws) -> Result<()> {
    if xa.len() != state.dim {
        return Err(SwarmError::DimensionMismatch {
            expected: state.dim,
            got: xa.len(),
        });
    }
    if draws.dim != state.dim || draws.n_particles() < state.n {
        return Err(SwarmError::InvalidArgument(format!(
            "draws for {} particles of dimension {} cannot drive {} particles of dimension {}",
            draws.n_particles(),
            draws.dim,
            state.n,
            state.dim
        )));
    }
    Ok(())
}

/// Advances `state` by one step of `cfg.variant` using pre-drawn randomness.
///
/// `draws` may cover more particles than `state`; particle `i` uses row `i`.
/// This is how a smaller system replays the draws of a larger coupled one.
pub fn apply_step(
    state: &mut ParticleState,
    xa: &[f64],
    cfg: &SwarmConfig,
    draws: &StepDraws,
) -> Result<()> {
    check_draws(state, xa, draws)?;
    match cfg.variant {
        Variant::Jump => jump_step(state, xa, draws, cfg, cfg.sigma, 0.0),
        Variant::ProjectedJump => jump_step(state, xa, draws, cfg, cfg.sigma, cfg.sigma0),
        Variant::ScaledJump => {
            if !(cfg.eps > 0.0) {
                return Err(SwarmError::InvalidArgument(
                    "eps must be > 0 for the scaled variant; use cbo for the limit".into(),
                ));
            }
            jump_step(state, xa, draws, cfg, cfg.sigma / cfg.eps, 0.0)
        }
        Variant::Cbo => cbo_step(state, xa, draws, cfg),
    }
    Ok(())
}

/// Draws one step of randomness and applies `cfg.variant`.
pub fn step<R: Rng + ?Sized>(
    state: &mut ParticleState,
    xa: &[f64],
    cfg: &SwarmConfig,
    rng: &mut R,
) -> Result<StepDraws> {
    if cfg.variant == Variant::ScaledJump && !(cfg.eps > 0.0) {
        return Err(SwarmError::InvalidArgument("eps must be > 0".into()));
    }
    let draws = StepDraws::draw(rng, state.n, state.dim, cfg.keep_probability(), cfg.noise);
    apply_step(state, xa, cfg, &draws)?;
    Ok(draws)
}

fn with_variant(cfg: &SwarmConfig, variant: Variant) -> SwarmConfig {
    SwarmConfig {
        variant,
        ..cfg.clone()
    }
}

/// One step of the jump swarm (degenerate jump law, box clamping).
pub fn step_swarm_jump<R: Rng + ?Sized>(
    state: &mut ParticleState,
    xa: &[f64],
    cfg: &SwarmConfig,
    rng: &mut R,
) -> Result<()> {
    step(state, xa, &with_variant(cfg, Variant::Jump), rng).map(drop)
}

/// One step of the projected jump swarm with non-degeneracy floor `sigma0`.
pub fn step_projected<R: Rng + ?Sized>(
    state: &mut ParticleState,
    xa: &[f64],
    cfg: &SwarmConfig,
    rng: &mut R,
) -> Result<()> {
    step(state, xa, &with_variant(cfg, Variant::ProjectedJump), rng).map(drop)
}

/// One step of the diffusively scaled jump swarm.
pub fn step_scaled<R: Rng + ?Sized>(
    state: &mut ParticleState,
    xa: &[f64],
    cfg: &SwarmConfig,
    rng: &mut R,
) -> Result<()> {
    step(state, xa, &with_variant(cfg, Variant::ScaledJump), rng).map(drop)
}

/// One step of anisotropic CBO; velocities are left untouched.
pub fn step_cbo<R: Rng + ?Sized>(
    state: &mut ParticleState,
    xa: &[f64],
    cfg: &SwarmConfig,
    rng: &mut R,
) -> Result<()> {
    step(state, xa, &with_variant(cfg, Variant::Cbo), rng).map(drop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::realization_rng;
    use approx::assert_abs_diff_eq;

    fn cfg(n: usize, dim: usize) -> SwarmConfig {
        SwarmConfig {
            n_particles: n,
            dim,
            ..SwarmConfig::default()
        }
    }

    fn forced(n: usize, dim: usize, keep: bool, noise: f64) -> StepDraws {
        StepDraws {
            keep: vec![keep; n],
            noise: vec![noise; n * dim],
            dim,
        }
    }

    #[test]
    fn projection_clamps_and_fixes_interior() {
        assert_eq!(project_box(&[1.5, -2.3], -1.0, 1.0), vec![1.0, -1.0]);
        assert_eq!(project_box(&[0.2, -0.9], -1.0, 1.0), vec![0.2, -0.9]);
    }

    #[test]
    fn deterministic_jump_law() {
        let mut c = cfg(1, 2);
        c.sigma = 0.0;
        let mut rng = realization_rng(1);
        let w = velocity_jump_sample(&[1.0, -1.0], &[0.5, 0.5], &c, &mut rng);
        assert_eq!(w, vec![0.5, -1.5]);
    }

    #[test]
    fn jump_law_vanishes_at_consensus_without_floor() {
        let c = cfg(1, 3);
        let mut rng = realization_rng(2);
        let w = velocity_jump_sample(&[0.1, 0.2, 0.3], &[0.1, 0.2, 0.3], &c, &mut rng);
        assert_eq!(w, vec![0.0; 3]);
    }

    #[test]
    fn jump_law_floor_noise_at_consensus() {
        let mut c = cfg(1, 3);
        c.sigma = 1.0;
        c.sigma0 = 0.1;
        let x = [0.1, 0.2, 0.3];
        let w = velocity_jump_sample(&x, &x, &c, &mut realization_rng(3));
        let xi = crate::noise::sample(NoiseKind::Gaussian, 3, &mut realization_rng(3));
        for (wl, z) in w.iter().zip(&xi) {
            assert_abs_diff_eq!(*wl, 0.1 * z, epsilon = 1e-15);
        }
    }

    #[test]
    fn forced_refresh_without_noise_is_drift() {
        let mut c = cfg(2, 2);
        c.sigma = 0.0;
        let mut s = ParticleState::new(vec![0.5, 0.5, -0.5, 0.0], vec![0.3; 4], 2).unwrap();
        let xa = [0.1, 0.2];
        let before = s.clone();
        apply_step(&mut s, &xa, &c, &forced(2, 2, false, 0.7)).unwrap();
        for i in 0..2 {
            for l in 0..2 {
                let x0 = before.position(i)[l];
                let expected = x0 + c.dt * c.lambda * (xa[l] - x0);
                assert_abs_diff_eq!(s.position(i)[l], expected, epsilon = 1e-15);
            }
        }
        assert_eq!(s.step, 1);
    }

    #[test]
    fn forced_keep_is_pure_transport() {
        let c = cfg(2, 2);
        let v = vec![0.5, -1.0, 2.0, 0.0];
        let mut s = ParticleState::new(vec![0.0, 0.0, 0.1, 0.2], v.clone(), 2).unwrap();
        apply_step(&mut s, &[0.9, 0.9], &c, &forced(2, 2, true, 3.0)).unwrap();
        assert_eq!(s.velocities, v);
        assert_abs_diff_eq!(s.position(0)[0], 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(s.position(0)[1], -0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(s.position(1)[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(s.position(1)[1], 0.2, epsilon = 1e-15);
    }

    #[test]
    fn single_particle_freezes_after_refresh() {
        let mut c = cfg(1, 3);
        c.sigma = 0.0;
        let mut s = ParticleState::new(vec![0.2, -0.4, 0.6], vec![1.0, 1.0, 1.0], 3).unwrap();
        let x0 = s.positions.clone();
        apply_step(&mut s, &x0, &c, &forced(1, 3, false, 1.0)).unwrap();
        assert_eq!(s.velocities, vec![0.0; 3]);
        assert_eq!(s.positions, x0);
    }

    #[test]
    fn corner_particles_stay_pinned() {
        let c = cfg(2, 2);
        let mut s = ParticleState::new(vec![1.0, 1.0, 1.0, 1.0], vec![5.0; 4], 2).unwrap();
        apply_step(&mut s, &[1.0, 1.0], &c, &forced(2, 2, true, 0.0)).unwrap();
        assert_eq!(s.positions, vec![1.0; 4]);
    }

    #[test]
    fn projected_without_floor_matches_jump_on_huge_box() {
        let mut c = cfg(20, 4);
        c.domain_lo = -1e12;
        c.domain_hi = 1e12;
        let mut rng = realization_rng(4);
        let start = ParticleState::uniform(20, 4, -1.0, 1.0, &mut rng);
        let xa = vec![0.1; 4];
        let (mut a, mut b) = (start.clone(), start);
        step_swarm_jump(&mut a, &xa, &c, &mut realization_rng(8)).unwrap();
        step_projected(&mut b, &xa, &c, &mut realization_rng(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scaled_with_unit_eps_matches_jump() {
        let c = cfg(10, 3);
        let start = ParticleState::uniform(10, 3, -1.0, 1.0, &mut realization_rng(5));
        let xa = vec![0.0; 3];
        let (mut a, mut b) = (start.clone(), start);
        step_swarm_jump(&mut a, &xa, &c, &mut realization_rng(6)).unwrap();
        step_scaled(&mut b, &xa, &c, &mut realization_rng(6)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scaled_keep_probability_and_sigma_map() {
        let c = SwarmConfig {
            variant: Variant::ScaledJump,
            eps: 0.1,
            ..SwarmConfig::default()
        };
        assert_abs_diff_eq!(c.keep_probability(), 4.539_992_976_248_485e-5, epsilon = 1e-18);
        assert_abs_diff_eq!(sigma_from_tilde(1.0, 0.5, 0.1), 1.581_138_830_084_189_5, epsilon = 1e-14);
    }

    #[test]
    fn scaled_rejects_zero_eps() {
        let c = SwarmConfig {
            eps: 0.0,
            ..cfg(2, 2)
        };
        let mut s = ParticleState::uniform(2, 2, -1.0, 1.0, &mut realization_rng(1));
        assert!(step_scaled(&mut s, &[0.0, 0.0], &c, &mut realization_rng(1)).is_err());
    }

    #[test]
    fn cbo_without_noise_contracts() {
        let c = SwarmConfig {
            variant: Variant::Cbo,
            ..cfg(1, 2)
        };
        let mut s = ParticleState::new(vec![1.0, -0.5], vec![0.0; 2], 2).unwrap();
        step_cbo(&mut s, &[0.0, 0.0], &c, &mut realization_rng(3)).unwrap();
        assert_abs_diff_eq!(s.positions[0], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(s.positions[1], -0.45, epsilon = 1e-15);
    }

    #[test]
    fn cbo_formula_per_coordinate() {
        let c = SwarmConfig {
            variant: Variant::Cbo,
            cbo_sigma_tilde: 1.0,
            ..cfg(1, 3)
        };
        let mut s = ParticleState::new(vec![0.5, -0.5, 0.0], vec![0.0; 3], 3).unwrap();
        let draws = forced(1, 3, false, 0.2);
        apply_step(&mut s, &[-0.5, -0.5, 0.0], &c, &draws).unwrap();
        // x - xa = (1, 0, 0): drift -0.1, noise sqrt(0.1) * 0.2
        assert_abs_diff_eq!(s.positions[0], 0.4 + 0.1f64.sqrt() * 0.2, epsilon = 1e-15);
        assert_eq!(&s.positions[1..], &[-0.5, 0.0]);
    }

    #[test]
    fn cbo_fixed_point_at_consensus() {
        let c = SwarmConfig {
            variant: Variant::Cbo,
            cbo_sigma_tilde: 2.0,
            ..cfg(3, 2)
        };
        let mut s = ParticleState::new(vec![0.3, 0.4].repeat(3), vec![0.0; 6], 2).unwrap();
        let before = s.positions.clone();
        step_cbo(&mut s, &[0.3, 0.4], &c, &mut realization_rng(9)).unwrap();
        assert_eq!(s.positions, before);
    }

    #[test]
    fn config_validation_names_field() {
        let bad = SwarmConfig {
            dt: -0.1,
            ..SwarmConfig::default()
        };
        match bad.validate() {
            Err(SwarmError::Config { field, .. }) => assert_eq!(field, "dt"),
            other => panic!("unexpected {other:?}"),
        }
        let cauchy_cbo = SwarmConfig {
            variant: Variant::Cbo,
            noise: NoiseKind::Cauchy,
            ..SwarmConfig::default()
        };
        assert!(cauchy_cbo.validate().is_err());
        assert!(SwarmConfig::default().validate().is_ok());
    }
}
