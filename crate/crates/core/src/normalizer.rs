//! Solving `[X,Y] = λX + μY` for the functions `λ`, `μ`.
//!
//! With a component pair `(i, j)` whose minor `XᵢYⱼ − XⱼYᵢ` does not vanish,
//! Cramer's rule on components `i, j` of `B = [X,Y]` determines `λ` and `μ`
//! over the field of rational functions; the remaining components are then
//! checked through the residual.

use serde::Serialize;
use thiserror::Error;

use crate::domain::Domain;
use crate::expr::{is_zero, Expr, Verdict, ZeroTestConfig, ZeroTestError};
use crate::field::{is_zero_field, lie_bracket, lie_scalar, FieldError, VectorField};
use crate::numeric::sampling::{Sampler, STREAM_PROBE};

const PROBE_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormalizerKind {
    /// `μ = 0`
    ExactNormalizer,
    Generalized,
    /// `Y = hX`
    DegenerateParallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizerSolution {
    pub lambda: Expr,
    pub mu: Expr,
    /// `[X,Y] − λX − μY`
    pub residual: VectorField,
    pub kind: NormalizerKind,
    pub verdict: Verdict,
    /// Component pair used by Cramer's rule; `None` in the parallel case.
    pub pair: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormalizerError {
    #[error("the relation [X,Y] = λX + μY needs at least two dimensions")]
    TooFewDimensions,
    #[error("no λ, μ satisfy [X,Y] = λX + μY: residual is nonzero ({})", .0.verdict.label())]
    NoSolution(Box<Unsolved>),
    #[error("every nonvanishing 2x2 minor of (X, Y) is numerically zero; rank cannot be decided")]
    UnresolvedRank,
    #[error("component pair ({0}, {1}) has an identically zero minor")]
    SingularPair(usize, usize),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

/// The best candidate found when the relation has no solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Unsolved {
    pub lambda: Expr,
    pub mu: Expr,
    pub verdict: Verdict,
}

fn minor(x: &VectorField, y: &VectorField, i: usize, j: usize) -> Expr {
    &(x.component(i) * y.component(j)) - &(x.component(j) * y.component(i))
}

/// The relation residual `[X,Y] − λX − μY`.
pub fn relation_residual(
    x: &VectorField,
    y: &VectorField,
    lambda: &Expr,
    mu: &Expr,
) -> Result<VectorField, FieldError> {
    let b = lie_bracket(x, y)?;
    Ok(b.sub(&x.scale(lambda)).sub(&y.scale(mu)))
}

/// Per-component zero test of `[X,Y] − λX − μY`.
pub fn check_relation(
    x: &VectorField,
    y: &VectorField,
    lambda: &Expr,
    mu: &Expr,
    domain: &Domain,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, NormalizerError> {
    let r = relation_residual(x, y, lambda, mu)?;
    Ok(is_zero_field(&r, domain, cfg)?)
}

fn min_abs_on_probes(e: &Expr, probes: &[Vec<f64>]) -> f64 {
    probes
        .iter()
        .map(|p| e.evaluate(p).map(f64::abs).unwrap_or(0.0))
        .fold(f64::INFINITY, f64::min)
}

/// Finds `λ, μ` with `[X,Y] = λX + μY`, or reports why none can be given.
pub fn solve_lambda_mu(
    x: &VectorField,
    y: &VectorField,
    domain: &Domain,
    cfg: &ZeroTestConfig,
) -> Result<NormalizerSolution, NormalizerError> {
    if x.dim() != y.dim() {
        return Err(FieldError::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        }
        .into());
    }
    let n = x.dim();
    if n < 2 {
        return Err(NormalizerError::TooFewDimensions);
    }
    let mut candidates = Vec::new();
    let mut undecided = false;
    for i in 0..n {
        for j in i + 1..n {
            let m = minor(x, y, i, j);
            if m.is_zero() {
                continue;
            }
            match is_zero(&m, domain, cfg)? {
                Verdict::ProvenNonzero { .. } => candidates.push((i, j, m)),
                _ => undecided = true,
            }
        }
    }
    if candidates.is_empty() {
        if undecided {
            return Err(NormalizerError::UnresolvedRank);
        }
        return solve_parallel(x, y, domain, cfg);
    }
    let mut sampler = Sampler::new(domain, cfg.seed, STREAM_PROBE);
    let probes = sampler.draw_valid(PROBE_POINTS, 4 * PROBE_POINTS);
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (k, (_, _, m)) in candidates.iter().enumerate() {
        let s = min_abs_on_probes(m, &probes);
        if s > best_score {
            best = k;
            best_score = s;
        }
    }
    let (i, j, m) = candidates.swap_remove(best);
    cramer(x, y, i, j, &m, domain, cfg)
}

/// Solves with a caller-chosen component pair.
pub fn solve_with_pair(
    x: &VectorField,
    y: &VectorField,
    pair: (usize, usize),
    domain: &Domain,
    cfg: &ZeroTestConfig,
) -> Result<NormalizerSolution, NormalizerError> {
    let (i, j) = pair;
    let m = minor(x, y, i, j);
    if m.is_zero() {
        return Err(NormalizerError::SingularPair(i, j));
    }
    cramer(x, y, i, j, &m, domain, cfg)
}

fn cramer(
    x: &VectorField,
    y: &VectorField,
    i: usize,
    j: usize,
    m: &Expr,
    domain: &Domain,
    cfg: &ZeroTestConfig,
) -> Result<NormalizerSolution, NormalizerError> {
    let b = lie_bracket(x, y)?;
    let inv = m.recip().expect("minor is not identically zero");
    let lambda = &(&(b.component(i) * y.component(j)) - &(b.component(j) * y.component(i))) * &inv;
    let mu = &(&(x.component(i) * b.component(j)) - &(x.component(j) * b.component(i))) * &inv;
    let residual = b.sub(&x.scale(&lambda)).sub(&y.scale(&mu));
    let verdict = is_zero_field(&residual, domain, cfg)?;
    if verdict.is_proven_nonzero() {
        return Err(NormalizerError::NoSolution(Box::new(Unsolved { lambda, mu, verdict })));
    }
    let kind = if mu.is_zero() {
        NormalizerKind::ExactNormalizer
    } else {
        NormalizerKind::Generalized
    };
    Ok(NormalizerSolution {
        lambda,
        mu,
        residual,
        kind,
        verdict,
        pair: Some((i, j)),
    })
}

/// All minors vanish identically, so `Y = hX` wherever `X ≠ 0`.
fn solve_parallel(
    x: &VectorField,
    y: &VectorField,
    domain: &Domain,
    cfg: &ZeroTestConfig,
) -> Result<NormalizerSolution, NormalizerError> {
    let h = match x.components().iter().position(|c| !c.is_zero()) {
        Some(k) => y.component(k) * &x.component(k).recip().expect("nonzero component"),
        // X = 0: the bracket vanishes and any λ works
        None => Expr::zero(),
    };
    let lambda = lie_scalar(x, &h);
    let mu = Expr::zero();
    let residual = relation_residual(x, y, &lambda, &mu)?;
    let verdict = is_zero_field(&residual, domain, cfg)?;
    if verdict.is_proven_nonzero() {
        return Err(NormalizerError::NoSolution(Box::new(Unsolved { lambda, mu, verdict })));
    }
    Ok(NormalizerSolution {
        lambda,
        mu,
        residual,
        kind: NormalizerKind::DegenerateParallel,
        verdict,
        pair: None,
    })
}
