//! Swarm-based global optimization with jump velocity updates.
//!
//! Particles carry a position and a velocity. At every step each velocity is
//! either kept or, with probability `1 - exp(-nu dt)`, replaced by a fresh
//! sample drifting toward the weighted consensus point with anisotropic
//! noise. The crate also provides a non-degenerate projected variant, a
//! diffusively scaled variant, a consensus-based optimization (CBO) baseline
//! and the experiment harness used by the `swarm-jump` binary.

pub mod cli;
pub mod consensus;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod noise;
pub mod objectives;

pub use consensus::{consensus_error, consensus_point, ConsensusError, ConsensusInput};
pub use dynamics::{ParticleState, SwarmConfig, Variant};
pub use error::{Result, SwarmError};
pub use noise::NoiseKind;
pub use objectives::{make_objective, ObjectiveId, ObjectiveSpec};
