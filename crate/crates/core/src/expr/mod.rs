//! Symbolic expressions over an ordered list of coordinate variables.
//!
//! The expression class is rational functions of the variables with exact
//! rational coefficients, multiplied by exponentials of such functions, plus
//! rational powers of polynomial bases. Every constructor below returns the
//! canonical form produced by [`Expr::simplify`].

mod eval;
pub(crate) mod poly;
pub(crate) mod rf;
mod zero;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub use eval::{EvalError, Evaluation};
pub use zero::{is_zero, Verdict, ZeroTestConfig, ZeroTestError};

use rf::Rf;

pub type Rational = BigRational;

/// Expression tree. Compare structurally only after simplification.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Const(Rational),
    /// Index into the variable list of the owning problem.
    Var(usize),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    /// `base^q`, `q ≠ 0`. Integer `q` is an ordinary power; fractional `q`
    /// is the principal real power and needs a positive base.
    Pow(Box<Expr>, Rational),
    Exp(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("division by an expression that is identically zero")]
    DivisionByZero,
    #[error("zero exponent in power node")]
    ZeroExponent,
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Rational::one())
    }

    pub fn int(k: i64) -> Expr {
        Expr::Const(Rational::from_integer(BigInt::from(k)))
    }

    pub fn constant(c: Rational) -> Expr {
        Expr::Const(c)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    /// Literal zero; meaningful on canonical forms.
    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn as_constant(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Expr::Const(_))
    }

    /// Canonical form. Panics if the expression divides by something that is
    /// identically zero; use [`Expr::try_simplify`] for untrusted input.
    pub fn simplify(&self) -> Expr {
        self.try_simplify().expect("simplify")
    }

    pub fn try_simplify(&self) -> Result<Expr, ExprError> {
        Ok(Rf::from_expr(self)?.to_expr())
    }

    /// Expanded normal form. [`Expr::simplify`] keeps whatever polynomial
    /// factors arithmetic produced, so two equal expressions may differ in how
    /// their numerator is split; this multiplies numerators out first and is
    /// the form to compare structurally. It is slower to compute with.
    pub fn normal_form(&self) -> Expr {
        Rf::from_canonical(&self.simplify()).expanded().to_expr()
    }

    /// Partial derivative with respect to variable `v`, in canonical form.
    pub fn diff(&self, v: usize) -> Expr {
        Rf::from_expr(self).expect("diff").diff(v).to_expr()
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let parts = terms.into_iter().map(|t| Rf::from_canonical(&t)).collect();
        Rf::sum(parts).to_expr()
    }

    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut acc = Rf::one();
        for f in factors {
            acc = acc.mul(&Rf::from_canonical(&f));
        }
        acc.to_expr()
    }

    pub fn pow(&self, q: &Rational) -> Result<Expr, ExprError> {
        if q.is_zero() {
            return Err(ExprError::ZeroExponent);
        }
        Ok(Rf::from_canonical(self).pow(q)?.to_expr())
    }

    pub fn powi(&self, k: i64) -> Result<Expr, ExprError> {
        if k == 0 {
            return Ok(Expr::one());
        }
        self.pow(&Rational::from_integer(BigInt::from(k)))
    }

    pub fn recip(&self) -> Result<Expr, ExprError> {
        self.powi(-1)
    }

    pub fn checked_div(&self, d: &Expr) -> Result<Expr, ExprError> {
        Ok(self * &d.recip()?)
    }

    pub fn exp(&self) -> Expr {
        Expr::Exp(Box::new(self.clone())).simplify()
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        self * &Expr::Const(c.clone())
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Sum(ts) | Expr::Product(ts) => ts.iter().filter_map(Expr::max_var).max(),
            Expr::Pow(b, _) => b.max_var(),
            Expr::Exp(a) => a.max_var(),
        }
    }

    pub fn uses_var(&self, v: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(i) => *i == v,
            Expr::Sum(ts) | Expr::Product(ts) => ts.iter().any(|t| t.uses_var(v)),
            Expr::Pow(b, _) => b.uses_var(v),
            Expr::Exp(a) => a.uses_var(v),
        }
    }

    /// Renders with the given variable names in the parser's grammar.
    pub fn display<'a>(&'a self, vars: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, vars }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    vars: &'a [String],
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::print_expr(self.expr, self.vars))
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::sum([self.clone(), rhs.clone()])
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sum([self.clone(), -rhs])
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Rf::from_canonical(self).mul(&Rf::from_canonical(rhs)).to_expr()
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Rf::from_canonical(self).neg().to_expr()
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        &self + &rhs
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        &self - &rhs
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        &self * &rhs
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}
