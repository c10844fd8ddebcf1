//! Functional independence via the numerical rank of Jacobians.

use nalgebra::DMatrix;
use serde::Serialize;

use super::sampling::{Sampler, STREAM_RANK};
use crate::domain::Domain;
use crate::expr::{Expr, ZeroTestError};

/// Singular values below `RANK_CUTOFF · σ_max` count as zero.
pub const RANK_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub sampled_points: Vec<Vec<f64>>,
    pub jacobian_ranks: Vec<usize>,
    pub consensus_rank: usize,
    pub tolerance: f64,
}

/// Numerical rank of an `k × n` matrix given row by row.
pub fn matrix_rank(rows: &[Vec<f64>], n: usize) -> usize {
    if rows.is_empty() || n == 0 {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_CUTOFF * smax).count()
}

/// Evaluates the Jacobian of `funcs` at up to `num_points` sample points and
/// reports the largest rank seen.
pub fn independence_rank(
    funcs: &[Expr],
    domain: &Domain,
    num_points: usize,
    seed: u64,
) -> Result<IndependenceReport, ZeroTestError> {
    let n = domain.dim();
    let grads: Vec<Vec<Expr>> = funcs.iter().map(|f| (0..n).map(|v| f.diff(v)).collect()).collect();
    let mut sampler = Sampler::new(domain, seed, STREAM_RANK);
    let mut points = Vec::new();
    let mut ranks = Vec::new();
    let mut attempts = 0;
    while points.len() < num_points && attempts < 4 * num_points.max(1) {
        attempts += 1;
        let Some(p) = sampler.draw_valid(1, 1).pop() else {
            continue;
        };
        let rows: Result<Vec<Vec<f64>>, _> = grads
            .iter()
            .map(|g| g.iter().map(|d| d.evaluate(&p)).collect::<Result<Vec<f64>, _>>())
            .collect();
        if let Ok(rows) = rows {
            ranks.push(matrix_rank(&rows, n));
            points.push(p);
        }
    }
    let required = num_points.min(16);
    if points.len() < required {
        return Err(ZeroTestError::InsufficientSamples {
            obtained: points.len(),
            required,
        });
    }
    Ok(IndependenceReport {
        consensus_rank: ranks.iter().copied().max().unwrap_or(0),
        sampled_points: points,
        jacobian_ranks: ranks,
        tolerance: RANK_CUTOFF,
    })
}
