//! Weighted consensus point of a particle ensemble.

use crate::error::{Result, SwarmError};

/// Positions (row-major `n x dim`) together with their fitness values.
#[derive(Debug, Clone, Copy)]
pub struct ConsensusInput<'a> {
    pub positions: &'a [f64],
    pub dim: usize,
    pub fitnesses: &'a [f64],
    pub alpha: f64,
}

/// Computes `sum_i x_i w_i / sum_i w_i` with `w_i = exp(-alpha F(x_i))`.
///
/// Fitnesses are shifted by their minimum before exponentiation, so the best
/// particle always carries weight exactly one and the denominator never
/// underflows.
pub fn consensus_point(input: ConsensusInput<'_>) -> Result<Vec<f64>> {
    let mut out = vec![0.0; input.dim];
    consensus_point_into(input, &mut out)?;
    Ok(out)
}

/// Same as [`consensus_point`], writing into a caller-provided buffer.
pub fn consensus_point_into(input: ConsensusInput<'_>, out: &mut [f64]) -> Result<()> {
    let ConsensusInput {
        positions,
        dim,
        fitnesses,
        alpha,
    } = input;
    let n = fitnesses.len();
    if n == 0 {
        return Err(SwarmError::InvalidArgument("empty particle set".into()));
    }
    if positions.len() != n * dim || out.len() != dim {
        return Err(SwarmError::DimensionMismatch {
            expected: n * dim,
            got: positions.len(),
        });
    }
    if !(alpha >= 0.0) {
        return Err(SwarmError::InvalidArgument(format!("alpha must be >= 0, got {alpha}")));
    }
    let mut f_min = f64::INFINITY;
    for &f in fitnesses {
        if f.is_nan() {
            return Err(SwarmError::InvalidArgument("NaN fitness".into()));
        }
        f_min = f_min.min(f);
    }
    if !f_min.is_finite() {
        return Err(SwarmError::InvalidArgument("non-finite fitness".into()));
    }

    out.fill(0.0);
    let mut norm = 0.0;
    for (x, &f) in positions.chunks_exact(dim).zip(fitnesses) {
        let w = (-alpha * (f - f_min)).exp();
        if w == 0.0 {
            continue;
        }
        norm += w;
        for (o, xi) in out.iter_mut().zip(x) {
            *o += w * xi;
        }
    }
    for o in out.iter_mut() {
        *o /= norm;
    }
    // rounding can push a coordinate a hair outside the hull
    for (l, o) in out.iter_mut().enumerate() {
        let (lo, hi) = positions
            .chunks_exact(dim)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x[l]), hi.max(x[l]))
            });
        *o = o.clamp(lo, hi);
    }
    Ok(())
}

/// Distance between a consensus point and the minimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusError {
    pub linf: f64,
    pub l2: f64,
}

pub fn consensus_error(xa: &[f64], x_star: &[f64]) -> Result<ConsensusError> {
    if xa.len() != x_star.len() {
        return Err(SwarmError::DimensionMismatch {
            expected: x_star.len(),
            got: xa.len(),
        });
    }
    let (linf, sq) = xa
        .iter()
        .zip(x_star)
        .fold((0.0f64, 0.0f64), |(m, s), (a, b)| {
            let e = (a - b).abs();
            (m.max(e), s + e * e)
        });
    Ok(ConsensusError { linf, l2: sq.sqrt() })
}
