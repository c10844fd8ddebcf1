//! Axis-aligned coordinate boxes with optional excluded zero sets.

use serde::Serialize;

use crate::expr::Expr;

/// Magnitude below which a point counts as lying on an excluded zero set.
pub const ZERO_SET_CUTOFF: f64 = 1e-8;

/// A box `[lo₁, hi₁] × … × [loₙ, hiₙ]` minus the zero sets of the expressions
/// in `excluded` (for example `Z_f`, the zeros of an integrating factor).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domain {
    pub bounds: Vec<(f64, f64)>,
    #[serde(skip)]
    pub excluded: Vec<Expr>,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        Domain {
            bounds,
            excluded: Vec::new(),
        }
    }

    /// `[-1, 1]ⁿ`
    pub fn unit(n: usize) -> Self {
        Domain::new(vec![(-1.0, 1.0); n])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn is_valid(&self) -> bool {
        !self.bounds.is_empty()
            && self
                .bounds
                .iter()
                .all(|(a, b)| a.is_finite() && b.is_finite() && a <= b)
    }

    pub fn excluding(mut self, zero_set_of: Expr) -> Self {
        if !zero_set_of.is_constant() {
            self.excluded.push(zero_set_of);
        }
        self
    }

    /// True when `p` is within [`ZERO_SET_CUTOFF`] of an excluded zero set or
    /// an excluded expression cannot be evaluated there.
    pub fn is_excluded(&self, p: &[f64]) -> bool {
        self.excluded
            .iter()
            .any(|g| g.evaluate(p).map(|v| v.abs() < ZERO_SET_CUTOFF).unwrap_or(true))
    }
}
