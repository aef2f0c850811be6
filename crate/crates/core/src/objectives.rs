//! Benchmark objective functions on their native search boxes.
//!
//! Every function has a known global minimizer with value zero. Optimizers
//! work in the unit box `[-1, 1]^d`; [`ObjectiveSpec::to_unit`] and
//! [`ObjectiveSpec::from_unit`] convert between the two coordinate systems.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwarmError};

/// ChaCha stream reserved for drawing random objective coefficients.
const OBJECTIVE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveId {
    Ackley,
    Rastrigin,
    Griewank,
    Rosenbrock,
    Salomon,
    Schwefel220,
    XsyRandom,
}

impl ObjectiveId {
    pub const ALL: [ObjectiveId; 7] = [
        ObjectiveId::Ackley,
        ObjectiveId::Rastrigin,
        ObjectiveId::Griewank,
        ObjectiveId::Rosenbrock,
        ObjectiveId::Salomon,
        ObjectiveId::Schwefel220,
        ObjectiveId::XsyRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveId::Ackley => "ackley",
            ObjectiveId::Rastrigin => "rastrigin",
            ObjectiveId::Griewank => "griewank",
            ObjectiveId::Rosenbrock => "rosenbrock",
            ObjectiveId::Salomon => "salomon",
            ObjectiveId::Schwefel220 => "schwefel220",
            ObjectiveId::XsyRandom => "xsy_random",
        }
    }

    /// Symmetric native search box `[-h, h]^d`, returned as `h`.
    pub fn half_width(self) -> f64 {
        match self {
            ObjectiveId::Ackley | ObjectiveId::XsyRandom => 5.0,
            ObjectiveId::Rastrigin => 5.12,
            ObjectiveId::Griewank => 600.0,
            ObjectiveId::Rosenbrock | ObjectiveId::Salomon | ObjectiveId::Schwefel220 => 100.0,
        }
    }
}

impl fmt::Display for ObjectiveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveId {
    type Err = SwarmError;

    fn from_str(s: &str) -> Result<Self> {
        ObjectiveId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| SwarmError::InvalidArgument(format!("unknown objective `{s}`")))
    }
}

/// A benchmark function instance: identifier, dimension, native box and minimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub id: ObjectiveId,
    pub dim: usize,
    pub native_lo: f64,
    pub native_hi: f64,
    pub minimizer: Vec<f64>,
    /// Coefficients `eta_i` in `[0, 1)`, present only for [`ObjectiveId::XsyRandom`].
    pub xsy_coeffs: Option<Vec<f64>>,
}

/// Builds an objective with its native bounds. For `XsyRandom` the
/// coefficients are drawn once from a generator seeded with `seed`.
pub fn make_objective(id: ObjectiveId, dim: usize, seed: u64) -> Result<ObjectiveSpec> {
    if dim == 0 {
        return Err(SwarmError::InvalidArgument("dimension must be at least 1".into()));
    }
    let h = id.half_width();
    let minimizer = match id {
        ObjectiveId::Rosenbrock => vec![1.0; dim],
        _ => vec![0.0; dim],
    };
    let xsy_coeffs = (id == ObjectiveId::XsyRandom).then(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(OBJECTIVE_STREAM);
        (0..dim).map(|_| rng.random::<f64>()).collect()
    });
    Ok(ObjectiveSpec {
        id,
        dim,
        native_lo: -h,
        native_hi: h,
        minimizer,
        xsy_coeffs,
    })
}

impl ObjectiveSpec {
    /// The objective to use for one realization seeded with `seed`.
    ///
    /// Deterministic functions are returned unchanged; the random XSY
    /// function gets fresh coefficients for every realization.
    pub fn for_realization(&self, seed: u64) -> ObjectiveSpec {
        match self.id {
            ObjectiveId::XsyRandom => make_objective(self.id, self.dim, seed)
                .expect("dimension already validated"),
            _ => self.clone(),
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(SwarmError::DimensionMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }

    /// Evaluates the function at a point given in native coordinates.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let d = x.len() as f64;
        match self.id {
            ObjectiveId::Ackley => {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let cos_mean = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
                -20.0 * (-0.2 * norm / d.sqrt()).exp() - cos_mean.exp() + 20.0 + E
            }
            ObjectiveId::Rastrigin => {
                x.iter()
                    .map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0)
                    .sum::<f64>()
                    / d
            }
            ObjectiveId::Griewank => {
                let sum = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                // 1-based index inside the cosine
                let prod = x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v / (i + 1) as f64).cos())
                    .product::<f64>();
                1.0 + sum - prod
            }
            ObjectiveId::Rosenbrock => x
                .windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
                .sum(),
            ObjectiveId::Salomon => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                1.0 - (2.0 * PI * r).cos() + 0.1 * r
            }
            ObjectiveId::Schwefel220 => x.iter().map(|v| v.abs()).sum(),
            ObjectiveId::XsyRandom => {
                let eta = self.xsy_coeffs.as_deref().expect("xsy coefficients present");
                x.iter()
                    .zip(eta)
                    .enumerate()
                    .map(|(i, (v, e))| e * v.abs().powi(i as i32 + 1))
                    .sum()
            }
        }
    }

    /// Evaluates at a point given in unit-box coordinates. `scratch` is
    /// reused for the native-coordinate image.
    pub fn evaluate_unit(&self, x_unit: &[f64], scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        scratch.extend(x_unit.iter().map(|u| self.unit_to_native(*u)));
        self.eval_unchecked(scratch)
    }

    fn center(&self) -> f64 {
        0.5 * (self.native_lo + self.native_hi)
    }

    fn half_span(&self) -> f64 {
        0.5 * (self.native_hi - self.native_lo)
    }

    #[inline]
    fn unit_to_native(&self, u: f64) -> f64 {
        self.center() + self.half_span() * u
    }

    /// Maps native coordinates to the unit box `[-1, 1]^d`.
    pub fn to_unit(&self, x_native: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x_native.len())?;
        let (c, h) = (self.center(), self.half_span());
        Ok(x_native.iter().map(|x| (x - c) / h).collect())
    }

    /// Maps unit-box coordinates back to the native box.
    pub fn from_unit(&self, x_unit: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x_unit.len())?;
        Ok(x_unit.iter().map(|u| self.unit_to_native(*u)).collect())
    }

    /// Length of one unit-box coordinate in native units.
    pub fn unit_scale(&self) -> f64 {
        self.half_span()
    }

    pub fn minimizer_unit(&self) -> Vec<f64> {
        self.to_unit(&self.minimizer).expect("minimizer has matching dimension")
    }
}
