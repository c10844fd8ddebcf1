//! Worked examples with known answers, and random instances that satisfy the
//! hypotheses of the first-integral construction by design.
//!
//! Expected first integrals are stored next to the inputs and never fed into
//! the computation; tests compare them with what the pipeline derives.

use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::domain::Domain;
use crate::expr::{rational, Expr, Rational};
use crate::field::{lie_scalar, VectorField, VolumeForm};
use crate::numeric::sampling::{rng, STREAM_CATALOG};
use crate::parser::{parse_problem, Problem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("exponent {0} cannot be used: the potential u^α needs α ≠ 0")]
    UnrepresentableExponent(String),
    #[error("invalid size: {0}")]
    InvalidSize(String),
}

/// Angular momentum data for one pair `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularMomentum {
    pub i: usize,
    pub j: usize,
    pub y: VectorField,
    pub lambda: Expr,
    pub expected_h: Expr,
}

/// A particle in ℝⁿ under the potential `V(u) = u^α`, `u = |x|²`, on phase
/// space with coordinates `x₁…xₙ, p₁…pₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianInstance {
    pub n: usize,
    pub alpha: Rational,
    pub vars: Arc<Vec<String>>,
    pub x: VectorField,
    pub angular: Vec<AngularMomentum>,
    pub y_energy: VectorField,
    pub lambda_energy: Expr,
    pub expected_h_energy: Expr,
    /// `½|p|² + u^α`
    pub energy: Expr,
}

impl HamiltonianInstance {
    /// A problem with `f = 1`, the first angular momentum normalizer (or
    /// the energy one when `n = 1`) as `Y`, and every normalizer in `Ylist`.
    pub fn to_problem(&self) -> Problem {
        let (y, lambda) = match self.angular.first() {
            Some(a) => (a.y.clone(), a.lambda.clone()),
            None => (self.y_energy.clone(), self.lambda_energy.clone()),
        };
        let mut ylist: Vec<VectorField> = self.angular.iter().map(|a| a.y.clone()).collect();
        ylist.push(self.y_energy.clone());
        Problem {
            vars: self.vars.clone(),
            volume: VolumeForm::standard(),
            x: self.x.clone(),
            y: Some(y),
            ylist,
            f: Some(Expr::one()),
            lambda: Some(lambda),
            mu: Some(Expr::zero()),
            domain: Domain::unit(2 * self.n),
            seed: 0,
        }
    }
}

pub fn hamiltonian_homogeneous(n: usize, alpha: Rational) -> Result<HamiltonianInstance, CatalogError> {
    if n == 0 {
        return Err(CatalogError::InvalidSize(
            "particle dimension must be at least 1".into(),
        ));
    }
    if alpha.is_zero() {
        return Err(CatalogError::UnrepresentableExponent(alpha.to_string()));
    }
    let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    names.extend((1..=n).map(|i| format!("p{i}")));
    let vars = Arc::new(names);
    let xs: Vec<Expr> = (0..n).map(Expr::var).collect();
    let ps: Vec<Expr> = (n..2 * n).map(Expr::var).collect();
    let sq = |e: &Expr| e * e;
    let u = Expr::sum(xs.iter().map(sq));
    let c = |q: Rational| Expr::constant(q);
    let v_pot = u.pow(&alpha).expect("α ≠ 0");
    let dv = &c(alpha.clone()) * &u.pow(&(&alpha - Rational::one())).unwrap_or_else(|_| Expr::one());

    let mut comps: Vec<Expr> = ps.clone();
    comps.extend(xs.iter().map(|xi| &(&Expr::int(-2) * xi) * &dv));
    let x = VectorField::new(vars.clone(), comps).expect("2n components");

    let inv = alpha.recip();
    let mut r: Vec<Expr> = xs.iter().map(|xi| xi.scale(&inv)).collect();
    r.extend(ps.iter().cloned());
    let euler = VectorField::new(vars.clone(), r).expect("2n components");

    let n_q = rational(n as i64, 1);
    let one = Rational::one();
    let coef_ij = &n_q * (&one + &inv) + rational(2, 1);
    let coef_e = &n_q * (&one + &inv) + rational(3, 1) - &inv;
    let lam = &inv - &one;

    let mut angular = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let m = &(&xs[i] * &ps[j]) - &(&xs[j] * &ps[i]);
            angular.push(AngularMomentum {
                i,
                j,
                y: euler.scale(&m),
                lambda: m.scale(&lam),
                expected_h: m.scale(&coef_ij),
            });
        }
    }
    let energy = &Expr::sum(ps.iter().map(sq)).scale(&rational(1, 2)) + &v_pot;
    Ok(HamiltonianInstance {
        n,
        alpha,
        vars,
        x,
        angular,
        y_energy: euler.scale(&energy),
        lambda_energy: energy.scale(&lam),
        expected_h_energy: energy.scale(&coef_e),
        energy,
    })
}

pub const EXAMPLE5_TEXT: &str = include_str!("../examples/example5.prob");

#[derive(Debug, Clone)]
pub struct Example5 {
    pub problem: Problem,
    /// `2(1+x⁴+y⁴)eˣ`
    pub expected_h: Expr,
    /// `−e^{−x}/(1+x⁴+y⁴)`, a potential of the Lie 1-form.
    pub expected_potential: Expr,
}

pub fn example5() -> Example5 {
    let problem = parse_problem(EXAMPLE5_TEXT).expect("shipped example parses");
    let expected_h = problem.parse("2*(1+x^4+y^4)*exp(x)").expect("valid");
    let expected_potential = problem.parse("-exp(-x)/(1+x^4+y^4)").expect("valid");
    Example5 {
        problem,
        expected_h,
        expected_potential,
    }
}

/// How the normalizer of a random instance was built.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// `Y = hX`, so `λ = X(h)`, `μ = 0` and `H = 0`.
    Degenerate { h: Expr },
    /// `Y = c∂ₙ` with `X` and `f` independent of the last variable, so
    /// `[X,Y] = 0`, `Div Y = 0` and `H = 0`.
    Transverse { c: Rational },
}

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub problem: Problem,
    pub certificate: Certificate,
    /// The divergence-free polynomial field with `X = W/f`.
    pub w: VectorField,
}

fn random_monomial(r: &mut impl Rng, allowed: &[usize], max_degree: usize) -> Expr {
    let deg = r.random_range(0..=max_degree);
    let mut m = Expr::one();
    if allowed.is_empty() {
        return m;
    }
    for _ in 0..deg {
        let v = allowed[r.random_range(0..allowed.len())];
        m = &m * &Expr::var(v);
    }
    m
}

fn nonzero_int(r: &mut impl Rng, bound: i64) -> i64 {
    let k = r.random_range(1..=bound);
    if r.random_bool(0.5) {
        k
    } else {
        -k
    }
}

/// Builds `X = W/f` with `Div W = 0` from shear terms `a·m·∂ⱼ` (`m` free of
/// `xⱼ`) and `f = 1 + Σ cₖ mₖ²`, then attaches a normalizer with a known
/// certificate. Even seeds give degenerate certificates, odd seeds transverse
/// ones.
pub fn random_instance(seed: u64, dim: usize, degree: usize) -> Result<RandomInstance, CatalogError> {
    if dim < 2 {
        return Err(CatalogError::InvalidSize("dimension must be at least 2".into()));
    }
    if degree < 1 {
        return Err(CatalogError::InvalidSize("degree must be at least 1".into()));
    }
    let mut r = rng(seed, STREAM_CATALOG);
    let transverse = seed % 2 == 1;
    let vars = Arc::new((1..=dim).map(|i| format!("x{i}")).collect::<Vec<_>>());
    // variables the field and factor may depend on
    let active: Vec<usize> = if transverse {
        (0..dim - 1).collect()
    } else {
        (0..dim).collect()
    };

    let w = loop {
        let mut comps = vec![Expr::zero(); dim];
        for _ in 0..r.random_range(2..=4) {
            let j = r.random_range(0..dim);
            let allowed: Vec<usize> = active.iter().copied().filter(|&v| v != j).collect();
            let m = random_monomial(&mut r, &allowed, degree);
            comps[j] = &comps[j] + &m.scale(&rational(nonzero_int(&mut r, 3), 1));
        }
        if comps.iter().any(|c| !c.is_zero()) {
            break VectorField::new(vars.clone(), comps).expect("dim components");
        }
    };
    let mut f = Expr::one();
    for _ in 0..r.random_range(1..=2) {
        let mut m = random_monomial(&mut r, &active, degree);
        if m.is_constant() {
            m = Expr::var(active[r.random_range(0..active.len())]);
        }
        f = &f + &(&m * &m).scale(&rational(r.random_range(1..=3), 1));
    }
    let x = w.scale(&f.recip().expect("f ≥ 1"));

    let (y, lambda, certificate) = if transverse {
        let c = rational(nonzero_int(&mut r, 3), 1);
        let mut comps = vec![Expr::zero(); dim];
        comps[dim - 1] = Expr::constant(c.clone());
        let y = VectorField::new(vars.clone(), comps).expect("dim components");
        (y, Expr::zero(), Certificate::Transverse { c })
    } else {
        let mut h = Expr::zero();
        while h.is_constant() {
            h = &h + &random_monomial(&mut r, &active, degree).scale(&rational(nonzero_int(&mut r, 2), 1));
        }
        let lambda = lie_scalar(&x, &h);
        (x.scale(&h), lambda, Certificate::Degenerate { h })
    };
    let problem = Problem {
        vars,
        volume: VolumeForm::standard(),
        x,
        y: Some(y),
        ylist: Vec::new(),
        f: Some(f),
        lambda: Some(lambda),
        mu: Some(Expr::zero()),
        domain: Domain::unit(dim),
        seed,
    };
    Ok(RandomInstance {
        problem,
        certificate,
        w,
    })
}
