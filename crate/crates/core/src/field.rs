//! Vector fields, volume densities, and the coordinate formulas for Lie
//! derivatives, Lie brackets and divergence on a box in ℝⁿ.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::domain::Domain;
use crate::expr::{is_zero, Expr, Verdict, ZeroTestConfig, ZeroTestError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("component uses undeclared variable index {0}")]
    UndeclaredVariable(usize),
    #[error("integrating factor is identically zero")]
    ZeroFactor,
    #[error("volume density is identically zero")]
    ZeroDensity,
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

/// `X = Σ Xᵢ ∂ᵢ` with canonical components.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    vars: Arc<Vec<String>>,
    components: Vec<Expr>,
}

impl VectorField {
    pub fn new(vars: Arc<Vec<String>>, components: Vec<Expr>) -> Result<Self, FieldError> {
        if components.len() != vars.len() {
            return Err(FieldError::DimensionMismatch {
                expected: vars.len(),
                found: components.len(),
            });
        }
        for c in &components {
            if let Some(i) = c.max_var() {
                if i >= vars.len() {
                    return Err(FieldError::UndeclaredVariable(i));
                }
            }
        }
        let components = components.iter().map(Expr::simplify).collect();
        Ok(VectorField { vars, components })
    }

    fn with(&self, components: Vec<Expr>) -> VectorField {
        VectorField {
            vars: self.vars.clone(),
            components,
        }
    }

    pub fn zero(vars: Arc<Vec<String>>) -> Self {
        let n = vars.len();
        VectorField {
            vars,
            components: vec![Expr::zero(); n],
        }
    }

    /// The coordinate field `∂ᵢ`.
    pub fn coordinate(vars: Arc<Vec<String>>, i: usize) -> Self {
        let mut v = VectorField::zero(vars);
        v.components[i] = Expr::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.components[i]
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }

    /// `h·X`
    pub fn scale(&self, h: &Expr) -> VectorField {
        self.with(self.components.iter().map(|c| h * c).collect())
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        self.with(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.with(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    fn check_same_dim(&self, other: &VectorField) -> Result<(), FieldError> {
        if self.dim() != other.dim() {
            return Err(FieldError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Evaluates every component at `p`.
    pub fn evaluate(&self, p: &[f64]) -> Result<Vec<f64>, crate::expr::EvalError> {
        self.components.iter().map(|c| c.evaluate(p)).collect()
    }

    /// Component texts in the problem-file syntax, `[a, b, ...]`.
    pub fn to_problem_syntax(&self) -> String {
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|c| c.display(&self.vars).to_string())
            .collect();
        format!("[ {} ]", parts.join(", "))
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_problem_syntax())
    }
}

/// `Ω = ρ dx₁∧…∧dxₙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeForm {
    density: Expr,
}

impl VolumeForm {
    pub fn new(density: Expr) -> Result<Self, FieldError> {
        let density = density.simplify();
        if density.is_zero() {
            return Err(FieldError::ZeroDensity);
        }
        Ok(VolumeForm { density })
    }

    pub fn standard() -> Self {
        VolumeForm { density: Expr::one() }
    }

    pub fn density(&self) -> &Expr {
        &self.density
    }
}

/// `L_X h = Σ Xᵢ ∂ᵢh`
pub fn lie_scalar(x: &VectorField, h: &Expr) -> Expr {
    Expr::sum(
        x.components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| c * &h.diff(i)),
    )
}

/// `[X,Y]ᵢ = X(Yᵢ) − Y(Xᵢ)`
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField, FieldError> {
    x.check_same_dim(y)?;
    let comps = (0..x.dim())
        .map(|i| &lie_scalar(x, &y.components[i]) - &lie_scalar(y, &x.components[i]))
        .collect();
    Ok(x.with(comps))
}

/// `Div_Ω(X) = (1/ρ) Σ ∂ᵢ(ρXᵢ)`
pub fn divergence(x: &VectorField, omega: &VolumeForm) -> Expr {
    let rho = omega.density();
    if rho.is_constant() {
        return Expr::sum(x.components.iter().enumerate().map(|(i, c)| c.diff(i)));
    }
    let flux = Expr::sum(x.components.iter().enumerate().map(|(i, c)| (rho * c).diff(i)));
    flux.checked_div(rho).expect("density is nonzero")
}

/// Conjunction of per-component zero tests.
pub fn is_zero_field(v: &VectorField, domain: &Domain, cfg: &ZeroTestConfig) -> Result<Verdict, ZeroTestError> {
    let mut out = Verdict::ProvenZero;
    for c in &v.components {
        out = out.and(is_zero(c, domain, cfg)?);
        if out.is_proven_nonzero() {
            break;
        }
    }
    Ok(out)
}

/// Tests `Div_Ω(fX) = 0`.
pub fn is_integrating_factor(
    f: &Expr,
    x: &VectorField,
    omega: &VolumeForm,
    domain: &Domain,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, FieldError> {
    if f.simplify().is_zero() {
        return Err(FieldError::ZeroFactor);
    }
    let d = divergence(&x.scale(f), omega);
    Ok(is_zero(&d, domain, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expr;

    fn vars(names: &[&str]) -> Arc<Vec<String>> {
        Arc::new(names.iter().map(|s| s.to_string()).collect())
    }

    fn field(v: &Arc<Vec<String>>, comps: &[&str]) -> VectorField {
        VectorField::new(v.clone(), comps.iter().map(|c| parse_expr(c, v).unwrap()).collect()).unwrap()
    }

    #[test]
    fn lie_derivative_examples() {
        let v = vars(&["x", "y"]);
        let dx = field(&v, &["1", "0"]);
        assert_eq!(lie_scalar(&dx, &Expr::var(0)), Expr::one());
        let euler = field(&v, &["x", "0"]);
        for k in 1..5 {
            let h = Expr::var(0).powi(k).unwrap();
            assert_eq!(lie_scalar(&euler, &h), h.scale(&crate::expr::rational(k, 1)));
        }
    }

    #[test]
    fn bracket_examples() {
        let v = vars(&["x", "y"]);
        let dx = field(&v, &["1", "0"]);
        let dy = field(&v, &["0", "1"]);
        assert!(lie_bracket(&dx, &dy).unwrap().is_structurally_zero());
        // [x∂y, y∂x] = x∂x − y∂y
        let a = field(&v, &["0", "x"]);
        let b = field(&v, &["y", "0"]);
        assert_eq!(lie_bracket(&a, &b).unwrap(), field(&v, &["x", "-y"]));
        // [∂x, x∂x] = ∂x
        let c = field(&v, &["x", "0"]);
        assert_eq!(lie_bracket(&dx, &c).unwrap(), dx);
    }

    #[test]
    fn divergence_examples() {
        let v = vars(&["x", "y", "z"]);
        let radial = field(&v, &["x", "y", "z"]);
        assert_eq!(divergence(&radial, &VolumeForm::standard()), Expr::int(3));
        let w = vars(&["x"]);
        let dx = field(&w, &["1"]);
        let omega = VolumeForm::new(parse_expr("exp(x)", &w).unwrap()).unwrap();
        assert_eq!(divergence(&dx, &omega), Expr::one());
    }

    #[test]
    fn integrating_factor_checks() {
        let v = vars(&["x"]);
        let dx = field(&v, &["1"]);
        let d = Domain::unit(1);
        let cfg = ZeroTestConfig::default();
        let verdict = is_integrating_factor(&Expr::var(0), &dx, &VolumeForm::standard(), &d, &cfg).unwrap();
        assert!(verdict.is_proven_nonzero());
        assert_eq!(
            is_integrating_factor(&Expr::zero(), &dx, &VolumeForm::standard(), &d, &cfg),
            Err(FieldError::ZeroFactor)
        );
    }

    #[test]
    fn construction_is_validated() {
        let v = vars(&["x", "y"]);
        assert_eq!(
            VectorField::new(v.clone(), vec![Expr::one()]).unwrap_err(),
            FieldError::DimensionMismatch { expected: 2, found: 1 }
        );
        assert_eq!(
            VectorField::new(v, vec![Expr::var(2), Expr::one()]).unwrap_err(),
            FieldError::UndeclaredVariable(2)
        );
    }
}
