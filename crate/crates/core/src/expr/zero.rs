//! Zero testing: exact on canonical forms, otherwise by sampling.

use serde::Serialize;
use thiserror::Error;

use super::Expr;
use crate::domain::Domain;
use crate::numeric::sampling::{Sampler, STREAM_ZERO_TEST};

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTestConfig {
    pub samples: usize,
    /// Absolute bound on `|value| / (1 + largest subterm magnitude)`.
    pub threshold: f64,
    pub pole_cutoff: f64,
    pub min_samples: usize,
    pub seed: u64,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig {
            samples: 64,
            threshold: 1e-7,
            pole_cutoff: 1e-12,
            min_samples: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    ProvenZero,
    ProvenNonzero {
        #[serde(skip_serializing_if = "Option::is_none")]
        witness: Option<Vec<f64>>,
    },
    NumericZero {
        sample_count: usize,
        max_abs_residual: f64,
        threshold: f64,
    },
}

impl Verdict {
    pub fn is_proven_zero(&self) -> bool {
        matches!(self, Verdict::ProvenZero)
    }

    pub fn is_proven_nonzero(&self) -> bool {
        matches!(self, Verdict::ProvenNonzero { .. })
    }

    pub fn is_numeric_zero(&self) -> bool {
        matches!(self, Verdict::NumericZero { .. })
    }

    /// Conjunction of two claims that something vanishes.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (v @ ProvenNonzero { .. }, _) | (_, v @ ProvenNonzero { .. }) => v,
            (ProvenZero, v) | (v, ProvenZero) => v,
            (
                NumericZero {
                    sample_count: a,
                    max_abs_residual: ra,
                    threshold: ta,
                },
                NumericZero {
                    sample_count: b,
                    max_abs_residual: rb,
                    threshold: tb,
                },
            ) => NumericZero {
                sample_count: a.min(b),
                max_abs_residual: ra.max(rb),
                threshold: ta.max(tb),
            },
        }
    }

    pub fn all<I: IntoIterator<Item = Verdict>>(vs: I) -> Verdict {
        vs.into_iter().fold(Verdict::ProvenZero, Verdict::and)
    }

    pub fn label(&self) -> String {
        match self {
            Verdict::ProvenZero => "ProvenZero".into(),
            Verdict::ProvenNonzero { witness: Some(w) } => {
                let pts: Vec<String> = w.iter().map(|v| format!("{v:.6}")).collect();
                format!("ProvenNonzero (witness {})", pts.join(" "))
            }
            Verdict::ProvenNonzero { witness: None } => "ProvenNonzero".into(),
            Verdict::NumericZero {
                sample_count,
                max_abs_residual,
                threshold,
            } => format!(
                "NumericZero (samples {sample_count}, max residual {max_abs_residual:.3e}, threshold {threshold:.1e})"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZeroTestError {
    #[error(
        "only {obtained} valid sample points (need {required}); the domain lies mostly on poles or excluded zero sets"
    )]
    InsufficientSamples { obtained: usize, required: usize },
}

/// Decides whether `e` vanishes on `domain`.
pub fn is_zero(e: &Expr, domain: &Domain, cfg: &ZeroTestConfig) -> Result<Verdict, ZeroTestError> {
    let s = e.simplify();
    if let Some(c) = s.as_constant() {
        return Ok(if num_traits::Zero::is_zero(c) {
            Verdict::ProvenZero
        } else {
            Verdict::ProvenNonzero { witness: None }
        });
    }
    let mut sampler = Sampler::new(domain, cfg.seed, STREAM_ZERO_TEST);
    let mut valid = 0;
    let mut worst = 0.0f64;
    let max_attempts = cfg.samples * 4;
    let mut attempts = 0;
    while valid < cfg.samples && attempts < max_attempts {
        attempts += 1;
        let p = sampler.draw();
        if domain.is_excluded(&p) {
            continue;
        }
        let Ok(ev) = s.evaluate_with(&p, cfg.pole_cutoff) else {
            continue;
        };
        valid += 1;
        let r = ev.value.abs() / (1.0 + ev.max_subterm);
        if r > cfg.threshold {
            return Ok(Verdict::ProvenNonzero { witness: Some(p) });
        }
        worst = worst.max(r);
    }
    if valid < cfg.min_samples {
        return Err(ZeroTestError::InsufficientSamples {
            obtained: valid,
            required: cfg.min_samples,
        });
    }
    Ok(Verdict::NumericZero {
        sample_count: valid,
        max_abs_residual: worst,
        threshold: cfg.threshold,
    })
}
