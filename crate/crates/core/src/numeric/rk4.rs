//! Fixed-step classical Runge–Kutta integration and drift measurement.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::field::VectorField;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("vector field cannot be evaluated at the starting point: {0}")]
    ImmediateDomainError(EvalError),
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("starting point has {found} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub step: f64,
    pub method: &'static str,
    /// Set when integration stopped early because the field could not be
    /// evaluated; the stored path ends at the last good point.
    pub aborted: bool,
}

impl Trajectory {
    pub fn endpoint(&self) -> &[f64] {
        self.points.last().expect("trajectory has at least its start")
    }
}

fn axpy(p: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    p.iter().zip(k).map(|(pi, ki)| pi + a * ki).collect()
}

fn rk4_step(x: &VectorField, p: &[f64], h: f64) -> Result<Vec<f64>, EvalError> {
    let k1 = x.evaluate(p)?;
    let k2 = x.evaluate(&axpy(p, 0.5 * h, &k1))?;
    let k3 = x.evaluate(&axpy(p, 0.5 * h, &k2))?;
    let k4 = x.evaluate(&axpy(p, h, &k3))?;
    let out: Vec<f64> = (0..p.len())
        .map(|i| p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(EvalError::NonFinite)
    }
}

/// Integrates `ṗ = X(p)` from `p0` over `[0, t_end]` with step `h`; the last
/// step is shortened to land on `t_end`.
pub fn integrate_trajectory(x: &VectorField, p0: &[f64], t_end: f64, h: f64) -> Result<Trajectory, TrajectoryError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(TrajectoryError::BadStep(h));
    }
    if p0.len() != x.dim() {
        return Err(TrajectoryError::DimensionMismatch {
            expected: x.dim(),
            found: p0.len(),
        });
    }
    x.evaluate(p0).map_err(TrajectoryError::ImmediateDomainError)?;
    let steps = (t_end / h).ceil().max(0.0) as usize;
    let mut traj = Trajectory {
        times: vec![0.0],
        points: vec![p0.to_vec()],
        step: h,
        method: "rk4",
        aborted: false,
    };
    let mut t = 0.0;
    for i in 0..steps {
        let dt = if i + 1 == steps { t_end - t } else { h };
        if dt <= 0.0 {
            break;
        }
        match rk4_step(x, traj.endpoint(), dt) {
            Ok(next) => {
                t = if i + 1 == steps { t_end } else { (i + 1) as f64 * h };
                traj.times.push(t);
                traj.points.push(next);
            }
            Err(_) => {
                traj.aborted = true;
                break;
            }
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub max_drift: f64,
    pub pass: bool,
    /// Trajectory points where `H` could not be evaluated.
    pub skipped: usize,
}

/// `max_t |H(p(t)) − H(p₀)| / (1 + |H(p₀)|)` along the trajectory.
pub fn conservation_check(h: &Expr, traj: &Trajectory, tol: f64) -> ConservationReport {
    let mut skipped = 0;
    let mut base = None;
    let mut max_drift = 0.0f64;
    for p in &traj.points {
        match h.evaluate(p) {
            Ok(v) => match base {
                None => base = Some(v),
                Some(h0) => {
                    let d = (v - h0).abs() / (1.0 + f64::abs(h0));
                    max_drift = max_drift.max(d);
                }
            },
            Err(_) => skipped += 1,
        }
    }
    ConservationReport {
        max_drift,
        pass: base.is_some() && max_drift <= tol,
        skipped,
    }
}
