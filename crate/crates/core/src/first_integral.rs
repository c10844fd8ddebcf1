//! First integrals from an integrating factor `f` and a generalized
//! normalizer `Y` with `[X,Y] = λX + μY`:
//!
//! ```text
//! H = L_Y f / f + Div_Ω(Y) − λ,     g = H·f
//! ```
//!
//! `H` is conserved by `X` off the zero set of `f` provided `f` is an
//! integrating factor of `X` and `fμ` one of `Y`. Iterating `L_Y` on a first
//! integral gives more of them when `μ = 0`, and commuting-up-to-constants
//! families with independent divergences give complete integrability.

use serde::Serialize;
use thiserror::Error;

use crate::domain::Domain;
use crate::expr::{is_zero, Expr, Verdict, ZeroTestConfig, ZeroTestError};
use crate::field::{divergence, is_integrating_factor, lie_scalar, FieldError, VectorField, VolumeForm};
use crate::normalizer::{check_relation, relation_residual, NormalizerError};
use crate::numeric::rank::{independence_rank, IndependenceReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FirstIntegralError {
    #[error("integrating factor is identically zero")]
    ZeroFactor,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Normalizer(#[from] NormalizerError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    /// `Div_Ω(fX) = 0`
    pub integrating_factor: Verdict,
    /// `Div_Ω(fμY) = 0`
    pub mu_factor: Verdict,
    /// `[X,Y] − λX − μY = 0`
    pub relation: Verdict,
}

impl HypothesisReport {
    pub fn all_proven(&self) -> bool {
        self.integrating_factor.is_proven_zero() && self.mu_factor.is_proven_zero() && self.relation.is_proven_zero()
    }

    pub fn any_violated(&self) -> bool {
        self.integrating_factor.is_proven_nonzero()
            || self.mu_factor.is_proven_nonzero()
            || self.relation.is_proven_nonzero()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstIntegralResult {
    pub h: Expr,
    /// The second integrating factor `g = L_Y f + f·Div_Ω(Y) − λf`.
    pub g: Expr,
    pub hypotheses: HypothesisReport,
    /// Verdict on `L_X H`.
    pub conclusion: Verdict,
    /// Verdict on the gradient of `H`; zero means `H` is constant.
    pub trivial: Verdict,
    pub domain_note: String,
}

/// Runs the construction and checks its hypotheses. `H` is returned even when
/// a hypothesis fails; the report flags which one.
#[allow(clippy::too_many_arguments)]
pub fn theorem1(
    x: &VectorField,
    y: &VectorField,
    f: &Expr,
    lambda: &Expr,
    mu: &Expr,
    omega: &VolumeForm,
    domain: &Domain,
    cfg: &ZeroTestConfig,
) -> Result<FirstIntegralResult, FirstIntegralError> {
    if x.dim() != y.dim() {
        return Err(FieldError::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        }
        .into());
    }
    let f = f.try_simplify().map_err(|_| FirstIntegralError::ZeroFactor)?;
    if f.is_zero() {
        return Err(FirstIntegralError::ZeroFactor);
    }
    let u = domain.clone().excluding(f.clone());

    let yf = lie_scalar(y, &f);
    let div_y = divergence(y, omega);
    let h = Expr::sum([yf.checked_div(&f).expect("f is nonzero"), div_y.clone(), -lambda]);
    let g = Expr::sum([yf, &f * &div_y, -(lambda * &f)]);

    let integrating_factor = is_integrating_factor(&f, x, omega, &u, cfg)?;
    let f_mu = &f * mu;
    let mu_factor = if f_mu.is_zero() {
        Verdict::ProvenZero
    } else {
        is_integrating_factor(&f_mu, y, omega, &u, cfg)?
    };
    let relation = check_relation(x, y, lambda, mu, &u, cfg)?;
    let conclusion = is_zero(&lie_scalar(x, &h), &u, cfg)?;
    let trivial = is_trivial(&h, &u, cfg)?;

    let domain_note = if f.is_constant() {
        "f is a nonzero constant; H is defined on the whole domain".to_string()
    } else {
        format!(
            "H is defined on the domain minus the zero set of f = {}",
            f.display(x.vars())
        )
    };
    Ok(FirstIntegralResult {
        h,
        g,
        hypotheses: HypothesisReport {
            integrating_factor,
            mu_factor,
            relation,
        },
        conclusion,
        trivial,
        domain_note,
    })
}

/// Conjunction of zero tests on every partial derivative of `h`.
pub fn is_trivial(h: &Expr, domain: &Domain, cfg: &ZeroTestConfig) -> Result<Verdict, ZeroTestError> {
    let mut out = Verdict::ProvenZero;
    for v in 0..domain.dim() {
        out = out.and(is_zero(&h.diff(v), domain, cfg)?);
        if out.is_proven_nonzero() {
            break;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainStep {
    pub h: Expr,
    /// Verdict on `L_X` of this step's function.
    pub verdict: Verdict,
}

/// `H_j = L_Y H_{j−1}` for `j = 1..=k`, each checked as a first integral.
/// Requires `L_X H` not provably nonzero and `μ = 0`.
pub fn chain_hk(
    x: &VectorField,
    y: &VectorField,
    h: &Expr,
    mu: &Expr,
    k: usize,
    domain: &Domain,
    cfg: &ZeroTestConfig,
) -> Result<Vec<ChainStep>, FirstIntegralError> {
    if !is_zero(mu, domain, cfg)?.is_proven_zero() {
        return Err(FirstIntegralError::HypothesisViolated(
            "the chain needs [X,Y] = λX, but μ is not zero".into(),
        ));
    }
    if is_zero(&lie_scalar(x, h), domain, cfg)?.is_proven_nonzero() {
        return Err(FirstIntegralError::HypothesisViolated(
            "the starting function is not a first integral of X".into(),
        ));
    }
    let mut steps = Vec::with_capacity(k);
    let mut cur = h.clone();
    for _ in 0..k {
        cur = lie_scalar(y, &cur);
        let verdict = is_zero(&lie_scalar(x, &cur), domain, cfg)?;
        steps.push(ChainStep {
            h: cur.clone(),
            verdict,
        });
    }
    Ok(steps)
}

pub const COMPLETELY_INTEGRABLE: &str =
    "completely integrable (the remaining first integral exists on contractible domains, not constructed)";

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityReport {
    pub divergence_x: Verdict,
    /// The constants `cᵢ` with `[X,Yᵢ] = cᵢX`.
    pub constants: Vec<Expr>,
    /// Residual verdicts of `[X,Yᵢ] − cᵢX`.
    pub relations: Vec<Verdict>,
    /// `Hᵢ = Div_Ω(Yᵢ)`.
    pub integrals: Vec<Expr>,
    pub rank: IndependenceReport,
    pub completely_integrable: bool,
    pub conclusion: String,
}

/// For divergence-free `X` with `[X,Yᵢ] = cᵢX`, `cᵢ` constant, the
/// divergences of the `Yᵢ` are first integrals; `n − 2` independent ones make
/// `X` completely integrable.
pub fn integrability_report(
    x: &VectorField,
    ylist: &[VectorField],
    omega: &VolumeForm,
    domain: &Domain,
    num_points: usize,
    cfg: &ZeroTestConfig,
) -> Result<IntegrabilityReport, FirstIntegralError> {
    let divergence_x = is_zero(&divergence(x, omega), domain, cfg)?;
    if divergence_x.is_proven_nonzero() {
        return Err(FirstIntegralError::HypothesisViolated(
            "X is not divergence-free".into(),
        ));
    }
    let mut constants = Vec::new();
    let mut relations = Vec::new();
    for (i, y) in ylist.iter().enumerate() {
        let c = bracket_constant(x, y, i)?;
        let r = relation_residual(x, y, &c, &Expr::zero())?;
        let v = crate::field::is_zero_field(&r, domain, cfg)?;
        if v.is_proven_nonzero() {
            return Err(FirstIntegralError::HypothesisViolated(format!(
                "[X,Y{}] is not a constant multiple of X",
                i + 1
            )));
        }
        constants.push(c);
        relations.push(v);
    }
    let integrals: Vec<Expr> = ylist.iter().map(|y| divergence(y, omega)).collect();
    let rank = independence_rank(&integrals, domain, num_points, cfg.seed)?;
    let n = x.dim();
    let completely_integrable = n >= 2 && ylist.len() == n - 2 && rank.consensus_rank == n - 2;
    let conclusion = if completely_integrable {
        COMPLETELY_INTEGRABLE.to_string()
    } else {
        format!(
            "inconclusive: {} of the {} independent first integrals needed",
            rank.consensus_rank,
            n.saturating_sub(2)
        )
    };
    Ok(IntegrabilityReport {
        divergence_x,
        constants,
        relations,
        integrals,
        rank,
        completely_integrable,
        conclusion,
    })
}

/// Extracts `c` from `[X,Y] = cX` using any nonzero component of `X`, and
/// insists that it is a constant.
fn bracket_constant(x: &VectorField, y: &VectorField, index: usize) -> Result<Expr, FirstIntegralError> {
    let b = crate::field::lie_bracket(x, y)?;
    let Some(k) = x.components().iter().position(|c| !c.is_zero()) else {
        return Err(FirstIntegralError::HypothesisViolated("X is the zero field".into()));
    };
    let c = b.component(k) * &x.component(k).recip().expect("nonzero component");
    if !c.is_constant() {
        return Err(FirstIntegralError::HypothesisViolated(format!(
            "[X,Y{}] = cX with non-constant c",
            index + 1
        )));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expr;
    use std::sync::Arc;

    fn vars(names: &[&str]) -> Arc<Vec<String>> {
        Arc::new(names.iter().map(|s| s.to_string()).collect())
    }

    fn field(v: &Arc<Vec<String>>, comps: &[&str]) -> VectorField {
        VectorField::new(v.clone(), comps.iter().map(|c| parse_expr(c, v).unwrap()).collect()).unwrap()
    }

    #[test]
    fn parallel_normalizer_gives_zero() {
        let v = vars(&["x", "y"]);
        // rotation, preserved by the standard volume
        let x = field(&v, &["-y", "x"]);
        let h = parse_expr("x^2+y+1", &v).unwrap();
        let y = x.scale(&h);
        let lambda = lie_scalar(&x, &h);
        let r = theorem1(
            &x,
            &y,
            &Expr::one(),
            &lambda,
            &Expr::zero(),
            &VolumeForm::standard(),
            &Domain::unit(2),
            &ZeroTestConfig::default(),
        )
        .unwrap();
        assert!(r.h.is_zero());
        assert!(r.hypotheses.all_proven());
        assert!(r.trivial.is_proven_zero() && r.conclusion.is_proven_zero());
    }

    #[test]
    fn rotation_with_euler_normalizer() {
        // [−y∂x + x∂y, x∂x + y∂y] = 0 and Div(Euler) = 2
        let v = vars(&["x", "y"]);
        let x = field(&v, &["-y", "x"]);
        let y = field(&v, &["x", "y"]);
        let f = parse_expr("1/(x^2+y^2)", &v).unwrap();
        let r = theorem1(
            &x,
            &y,
            &f,
            &Expr::zero(),
            &Expr::zero(),
            &VolumeForm::standard(),
            &Domain::unit(2),
            &ZeroTestConfig::default(),
        )
        .unwrap();
        // L_Y f / f = −2, Div Y = 2
        assert!(r.h.is_zero());
        assert_eq!(&r.h * &f, r.g);
        assert!(r.domain_note.contains("zero set"));
    }

    #[test]
    fn zero_factor_rejected() {
        let v = vars(&["x", "y"]);
        let x = field(&v, &["1", "0"]);
        let err = theorem1(
            &x,
            &x,
            &Expr::zero(),
            &Expr::zero(),
            &Expr::zero(),
            &VolumeForm::standard(),
            &Domain::unit(2),
            &ZeroTestConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, FirstIntegralError::ZeroFactor);
    }

    #[test]
    fn failed_hypothesis_is_flagged_not_fatal() {
        let v = vars(&["x", "y"]);
        let x = field(&v, &["x", "0"]);
        let y = field(&v, &["0", "1"]);
        let r = theorem1(
            &x,
            &y,
            &Expr::one(),
            &Expr::zero(),
            &Expr::zero(),
            &VolumeForm::standard(),
            &Domain::unit(2),
            &ZeroTestConfig::default(),
        )
        .unwrap();
        assert!(r.hypotheses.integrating_factor.is_proven_nonzero());
        assert!(r.hypotheses.any_violated());
    }

    #[test]
    fn triviality() {
        let d = Domain::unit(2);
        let cfg = ZeroTestConfig::default();
        assert!(is_trivial(&Expr::int(5), &d, &cfg).unwrap().is_proven_zero());
        let h = parse_expr("2*(1+x^4+y^4)*exp(x)", &vars(&["x", "y"])).unwrap();
        assert!(is_trivial(&h, &d, &cfg).unwrap().is_proven_nonzero());
    }

    #[test]
    fn chain_of_constant_vanishes() {
        let v = vars(&["x", "y"]);
        let x = field(&v, &["-y", "x"]);
        let y = field(&v, &["x", "y"]);
        let d = Domain::unit(2);
        let cfg = ZeroTestConfig::default();
        let steps = chain_hk(&x, &y, &Expr::int(3), &Expr::zero(), 3, &d, &cfg).unwrap();
        assert!(steps.iter().all(|s| s.h.is_zero() && s.verdict.is_proven_zero()));
        // x²+y² is conserved; L_Y gives 2(x²+y²), then 4(x²+y²)
        let r2 = parse_expr("x^2+y^2", &v).unwrap();
        let steps = chain_hk(&x, &y, &r2, &Expr::zero(), 2, &d, &cfg).unwrap();
        assert_eq!(steps[1].h, r2.scale(&crate::expr::rational(4, 1)));
        assert!(matches!(
            chain_hk(&x, &y, &r2, &Expr::one(), 1, &d, &cfg),
            Err(FirstIntegralError::HypothesisViolated(_))
        ));
        assert!(matches!(
            chain_hk(&x, &y, &Expr::var(0), &Expr::zero(), 1, &d, &cfg),
            Err(FirstIntegralError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn integrability_edge_cases() {
        let v = vars(&["x", "y", "z"]);
        let x = field(&v, &["-y", "x", "0"]);
        let d = Domain::unit(3);
        let cfg = ZeroTestConfig::default();
        let om = VolumeForm::standard();
        let r = integrability_report(&x, std::slice::from_ref(&x), &om, &d, 20, &cfg).unwrap();
        assert_eq!(r.rank.consensus_rank, 0);
        assert!(!r.completely_integrable);
        let z = field(&v, &["0", "0", "z"]);
        let r = integrability_report(&x, &[z], &om, &d, 20, &cfg).unwrap();
        assert_eq!(r.integrals[0], Expr::one());
        assert!(!r.completely_integrable);
        let commuting = field(&v, &["x*z", "y*z", "0"]);
        let ok = integrability_report(&x, &[commuting], &om, &d, 20, &cfg);
        assert!(ok.is_ok(), "{ok:?}");
        let bad = field(&v, &["0", "x", "0"]);
        assert!(matches!(
            integrability_report(&x, &[bad], &om, &d, 20, &cfg),
            Err(FirstIntegralError::HypothesisViolated(_))
        ));
    }
}
