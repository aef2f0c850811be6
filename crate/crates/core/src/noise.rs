//! Random inputs of the particle dynamics and the seeding scheme.
//!
//! Each realization owns one [`ChaCha8Rng`] seeded with a per-realization
//! seed from [`realization_seed`]. Within a step the stream is consumed in a
//! fixed order: the `N` refresh uniforms first, then the `N x d` noise
//! components, particle-major. [`StepDraws`] materializes one step's worth of
//! randomness so that two coupled systems can replay identical draws.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwarmError};

pub type SwarmRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    Cauchy,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Cauchy => "cauchy",
        }
    }

    /// Draws one scalar component.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            NoiseKind::Gaussian => StandardNormal.sample(rng),
            NoiseKind::Cauchy => standard_cauchy().sample(rng),
        }
    }
}

fn standard_cauchy() -> Cauchy<f64> {
    Cauchy::new(0.0, 1.0).expect("unit scale is valid")
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = SwarmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "cauchy" => Ok(NoiseKind::Cauchy),
            other => Err(SwarmError::InvalidArgument(format!("unknown noise `{other}`"))),
        }
    }
}

/// `d` independent components of the given distribution.
pub fn sample<R: Rng + ?Sized>(kind: NoiseKind, d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| kind.draw(rng)).collect()
}

/// SplitMix64 finalizer; decorrelates nearby integers.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of realization `index` under `root_seed`.
///
/// `splitmix64(splitmix64(root) ^ index)`: distinct indices give unrelated
/// seeds, and a realization can be rerun on its own from the recorded seed.
pub fn realization_seed(root_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(root_seed) ^ index)
}

/// Generator driving the particle dynamics of one realization.
pub fn realization_rng(seed: u64) -> SwarmRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All randomness consumed by one step of an `n`-particle system.
#[derive(Debug, Clone, Default)]
pub struct StepDraws {
    /// `true` when particle `i` keeps its velocity this step.
    pub keep: Vec<bool>,
    /// Row-major `n x dim` noise components.
    pub noise: Vec<f64>,
    pub dim: usize,
}

impl StepDraws {
    pub fn new(n: usize, dim: usize) -> Self {
        StepDraws {
            keep: vec![false; n],
            noise: vec![0.0; n * dim],
            dim,
        }
    }

    pub fn n_particles(&self) -> usize {
        self.keep.len()
    }

    /// Refills the buffers from `rng`: refresh uniforms first, compared
    /// against `keep_prob`, then the noise block.
    pub fn fill<R: Rng + ?Sized>(&mut self, rng: &mut R, keep_prob: f64, kind: NoiseKind) {
        for k in self.keep.iter_mut() {
            *k = rng.random::<f64>() < keep_prob;
        }
        match kind {
            NoiseKind::Gaussian => {
                for z in self.noise.iter_mut() {
                    *z = StandardNormal.sample(rng);
                }
            }
            NoiseKind::Cauchy => {
                let c = standard_cauchy();
                for z in self.noise.iter_mut() {
                    *z = c.sample(rng);
                }
            }
        }
    }

    pub fn draw<R: Rng + ?Sized>(
        rng: &mut R,
        n: usize,
        dim: usize,
        keep_prob: f64,
        kind: NoiseKind,
    ) -> Self {
        let mut draws = StepDraws::new(n, dim);
        draws.fill(rng, keep_prob, kind);
        draws
    }

    /// Noise row of particle `i`.
    #[inline]
    pub fn noise_of(&self, i: usize) -> &[f64] {
        &self.noise[i * self.dim..(i + 1) * self.dim]
    }
}
