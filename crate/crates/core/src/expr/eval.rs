//! Floating-point evaluation.

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use super::Expr;

/// Default cutoff below which a denominator counts as a pole.
pub const DEFAULT_POLE_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("pole: denominator magnitude {0:e} below cutoff")]
    Pole(f64),
    #[error("fractional power of a negative base")]
    NegativeBase,
    #[error("non-finite value")]
    NonFinite,
    #[error("variable {0} has no value at the evaluation point")]
    MissingVariable(usize),
}

/// Value of an expression together with the largest magnitude of any of its
/// subterms, used to put residuals on a relative scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub max_subterm: f64,
}

impl Expr {
    pub fn evaluate(&self, point: &[f64]) -> Result<f64, EvalError> {
        Ok(self.evaluate_with(point, DEFAULT_POLE_CUTOFF)?.value)
    }

    pub fn evaluate_with(&self, point: &[f64], pole_cutoff: f64) -> Result<Evaluation, EvalError> {
        let mut max = 0.0f64;
        let value = eval(self, point, pole_cutoff, &mut max)?;
        Ok(Evaluation {
            value,
            max_subterm: max,
        })
    }
}

fn eval(e: &Expr, p: &[f64], cutoff: f64, max: &mut f64) -> Result<f64, EvalError> {
    let v = match e {
        Expr::Const(c) => c.to_f64().ok_or(EvalError::NonFinite)?,
        Expr::Var(i) => *p.get(*i).ok_or(EvalError::MissingVariable(*i))?,
        Expr::Sum(ts) => {
            let mut s = 0.0;
            for t in ts {
                s += eval(t, p, cutoff, max)?;
            }
            s
        }
        Expr::Product(fs) => {
            let mut s = 1.0;
            for f in fs {
                s *= eval(f, p, cutoff, max)?;
            }
            s
        }
        Expr::Pow(b, q) => {
            let b = eval(b, p, cutoff, max)?;
            if q.is_negative() && b.abs() < cutoff {
                return Err(EvalError::Pole(b.abs()));
            }
            if q.is_integer() {
                let k = q.to_integer().to_i32().ok_or(EvalError::NonFinite)?;
                b.powi(k)
            } else {
                let qf = q.to_f64().ok_or(EvalError::NonFinite)?;
                if b >= 0.0 {
                    b.powf(qf)
                } else if q.denom().is_odd() {
                    let mag = (-b).powf(qf);
                    if q.numer().is_odd() {
                        -mag
                    } else {
                        mag
                    }
                } else {
                    return Err(EvalError::NegativeBase);
                }
            }
        }
        Expr::Exp(a) => eval(a, p, cutoff, max)?.exp(),
    };
    if !v.is_finite() {
        return Err(EvalError::NonFinite);
    }
    *max = max.max(v.abs());
    Ok(v)
}
