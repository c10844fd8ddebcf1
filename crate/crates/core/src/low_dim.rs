//! Constructions specific to the plane and to three-space.
//!
//! In the plane the minor `ρ(X₁Y₂ − X₂Y₁)` of a normalizer pair gives an
//! integrating factor, and an integrating factor gives a normalizer; either
//! way the resulting first integral is constant. The closed 1-form
//! `ω = (−X₂ dx + X₁ dy)/(X₁Y₂ − X₂Y₁)` integrates to a nontrivial one.
//!
//! In three-space two commuting divergence-free fields give the closed form
//! `η(v) = Ω(Y, X, v)`, i.e. `η = ρ·(Y × X)`, whose potential is conserved.

use thiserror::Error;

use crate::domain::Domain;
use crate::expr::{is_zero, EvalError, Expr, Verdict, ZeroTestConfig, ZeroTestError};
use crate::field::{divergence, is_zero_field, lie_bracket, lie_scalar, FieldError, VectorField, VolumeForm};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LowDimError {
    #[error("this construction needs dimension {expected}, the problem has {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("X and Y are everywhere parallel; the minor vanishes identically")]
    RankDeficient,
    #[error("X is divergence-free; the normalizer construction is undefined")]
    DivergenceFree,
    #[error("integrating factor is identically zero")]
    ZeroFactor,
    #[error("every candidate path from the basepoint to the target meets a singularity")]
    PathThroughSingularity,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("point has {found} coordinates, expected {expected}")]
    PointDimension { expected: usize, found: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

fn require_dim(x: &VectorField, n: usize) -> Result<(), LowDimError> {
    if x.dim() != n {
        return Err(LowDimError::WrongDimension {
            expected: n,
            found: x.dim(),
        });
    }
    Ok(())
}

/// `ω = Σ ωᵢ dxᵢ`
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    vars: Arc<Vec<String>>,
    coefficients: Vec<Expr>,
}

impl OneForm {
    pub fn new(vars: Arc<Vec<String>>, coefficients: Vec<Expr>) -> Self {
        OneForm {
            vars,
            coefficients: coefficients.iter().map(Expr::simplify).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn coefficients(&self) -> &[Expr] {
        &self.coefficients
    }

    pub fn evaluate(&self, p: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.coefficients.iter().map(|c| c.evaluate(p)).collect()
    }

    /// The components `∂ᵢωⱼ − ∂ⱼωᵢ`, `i < j`, of `dω`.
    pub fn exterior_derivative(&self) -> Vec<Expr> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                out.push(&self.coefficients[j].diff(i) - &self.coefficients[i].diff(j));
            }
        }
        out
    }

    pub fn closedness(&self, domain: &Domain, cfg: &ZeroTestConfig) -> Result<Verdict, ZeroTestError> {
        let mut out = Verdict::ProvenZero;
        for c in self.exterior_derivative() {
            out = out.and(is_zero(&c, domain, cfg)?);
        }
        Ok(out)
    }

    /// Text of the form `[ ω₁, ω₂, … ]`.
    pub fn to_problem_syntax(&self) -> String {
        let parts: Vec<String> = self
            .coefficients
            .iter()
            .map(|c| c.display(&self.vars).to_string())
            .collect();
        format!("[ {} ]", parts.join(", "))
    }
}

fn planar_minor(x: &VectorField, y: &VectorField) -> Expr {
    &(x.component(0) * y.component(1)) - &(x.component(1) * y.component(0))
}

/// `f = 1/(ρ(X₁Y₂ − X₂Y₁))`
pub fn planar_f_from_y(x: &VectorField, y: &VectorField, omega: &VolumeForm) -> Result<Expr, LowDimError> {
    require_dim(x, 2)?;
    require_dim(y, 2)?;
    let m = omega.density() * &planar_minor(x, y);
    m.recip().map_err(|_| LowDimError::RankDeficient)
}

/// `Y = Z/(f²·Div_Ω X)` where `i_ZΩ = −df`, i.e. `Z = (−∂_y f, ∂_x f)/ρ`.
pub fn planar_y_from_f(x: &VectorField, f: &Expr, omega: &VolumeForm) -> Result<VectorField, LowDimError> {
    require_dim(x, 2)?;
    let f = f.simplify();
    if f.is_zero() {
        return Err(LowDimError::ZeroFactor);
    }
    let div = divergence(x, omega);
    if div.is_zero() {
        return Err(LowDimError::DivergenceFree);
    }
    let scale = (&(&f * &f) * &(omega.density() * &div)).recip().expect("nonzero");
    let comps = vec![-(&f.diff(1) * &scale), &f.diff(0) * &scale];
    Ok(VectorField::new(x.vars().clone(), comps)?)
}

/// The multiplier `λ = Div_Ω(Y) + L_Y f / f` that both planar constructions
/// predict for `[X,Y] = λX`.
pub fn planar_lambda(y: &VectorField, f: &Expr, omega: &VolumeForm) -> Result<Expr, LowDimError> {
    let quotient = lie_scalar(y, f).checked_div(f).map_err(|_| LowDimError::ZeroFactor)?;
    Ok(&divergence(y, omega) + &quotient)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieForm {
    pub form: OneForm,
    /// Verdict on `dω`.
    pub closedness: Verdict,
}

/// `ω = i_XΩ / (i_X i_YΩ) = (−X₂ dx + X₁ dy)/(X₁Y₂ − X₂Y₁)`
pub fn lie_one_form(
    x: &VectorField,
    y: &VectorField,
    domain: &Domain,
    cfg: &ZeroTestConfig,
) -> Result<LieForm, LowDimError> {
    require_dim(x, 2)?;
    require_dim(y, 2)?;
    let inv = planar_minor(x, y).recip().map_err(|_| LowDimError::RankDeficient)?;
    let form = OneForm::new(x.vars().clone(), vec![-(x.component(1) * &inv), x.component(0) * &inv]);
    let closedness = form.closedness(domain, cfg)?;
    Ok(LieForm { form, closedness })
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

pub const DEFAULT_PANELS: usize = 256;

/// `∫ ω` along the straight segment `a → b`, composite 5-point
/// Gauss–Legendre on `panels` equal panels.
pub fn segment_integral(omega: &OneForm, a: &[f64], b: &[f64], panels: usize) -> Result<f64, EvalError> {
    let d: Vec<f64> = a.iter().zip(b).map(|(ai, bi)| bi - ai).collect();
    if d.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let panels = panels.max(1);
    let width = 1.0 / panels as f64;
    let mut total = 0.0;
    let mut p = vec![0.0; a.len()];
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * width;
        let mut s = 0.0;
        for (node, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            let t = mid + 0.5 * width * node;
            for i in 0..a.len() {
                p[i] = a[i] + t * d[i];
            }
            let w_val = omega.evaluate(&p)?;
            let dot: f64 = w_val.iter().zip(&d).map(|(wi, di)| wi * di).sum();
            s += w * dot;
        }
        total += 0.5 * width * s;
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(EvalError::NonFinite)
    }
}

/// `∫ ω` along the polygon through `waypoints`. Fails if `ω` cannot be
/// evaluated at a corner or at any quadrature node.
pub fn path_integral(omega: &OneForm, waypoints: &[Vec<f64>], panels: usize) -> Result<f64, EvalError> {
    for p in waypoints {
        omega.evaluate(p)?;
    }
    waypoints
        .windows(2)
        .map(|w| segment_integral(omega, &w[0], &w[1], panels))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Straight,
    /// Axis-aligned legs in increasing coordinate order.
    AxisForward,
    /// Axis-aligned legs in decreasing coordinate order.
    AxisReverse,
}

impl PathKind {
    pub fn label(self) -> &'static str {
        match self {
            PathKind::Straight => "straight",
            PathKind::AxisForward => "axis-forward",
            PathKind::AxisReverse => "axis-reverse",
        }
    }
}

/// The corner points of a candidate path from `a` to `b`.
pub fn path_waypoints(kind: PathKind, a: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    let n = a.len();
    let order: Vec<usize> = match kind {
        PathKind::Straight => return vec![a.to_vec(), b.to_vec()],
        PathKind::AxisForward => (0..n).collect(),
        PathKind::AxisReverse => (0..n).rev().collect(),
    };
    let mut pts = vec![a.to_vec()];
    let mut cur = a.to_vec();
    for i in order {
        if cur[i] != b[i] {
            cur[i] = b[i];
            pts.push(cur.clone());
        }
    }
    pts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub path: PathKind,
}

/// `I(target) − I(basepoint)` for a closed `ω`: the straight segment first,
/// then the two axis-aligned paths.
pub fn quadrature(
    omega: &OneForm,
    basepoint: &[f64],
    target: &[f64],
    panels: usize,
) -> Result<Quadrature, LowDimError> {
    for p in [basepoint, target] {
        if p.len() != omega.dim() {
            return Err(LowDimError::PointDimension {
                expected: omega.dim(),
                found: p.len(),
            });
        }
    }
    for kind in [PathKind::Straight, PathKind::AxisForward, PathKind::AxisReverse] {
        let pts = path_waypoints(kind, basepoint, target);
        if let Ok(value) = path_integral(omega, &pts, panels) {
            return Ok(Quadrature { value, path: kind });
        }
    }
    Err(LowDimError::PathThroughSingularity)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumePairForm {
    /// `η = ρ·(Y × X)`
    pub eta: OneForm,
    pub closedness: Verdict,
    pub divergence_x: Verdict,
    pub divergence_y: Verdict,
    pub bracket: Verdict,
}

/// Checks the hypotheses on a three-dimensional pair and builds `η`.
pub fn volume_pair_form(
    x: &VectorField,
    y: &VectorField,
    omega: &VolumeForm,
    domain: &Domain,
    cfg: &ZeroTestConfig,
) -> Result<VolumePairForm, LowDimError> {
    require_dim(x, 3)?;
    require_dim(y, 3)?;
    let divergence_x = is_zero(&divergence(x, omega), domain, cfg)?;
    let divergence_y = is_zero(&divergence(y, omega), domain, cfg)?;
    let bracket = is_zero_field(&lie_bracket(x, y)?, domain, cfg)?;
    for (v, what) in [
        (&divergence_x, "X is not divergence-free"),
        (&divergence_y, "Y is not divergence-free"),
        (&bracket, "X and Y do not commute"),
    ] {
        if v.is_proven_nonzero() {
            return Err(LowDimError::HypothesisViolated(what.into()));
        }
    }
    let (a, b) = (y.components(), x.components());
    let rho = omega.density();
    let cross = [
        &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
        &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
        &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
    ];
    let eta = OneForm::new(x.vars().clone(), cross.iter().map(|c| rho * c).collect());
    let closedness = eta.closedness(domain, cfg)?;
    Ok(VolumePairForm {
        eta,
        closedness,
        divergence_x,
        divergence_y,
        bracket,
    })
}

/// `I(target) − I(basepoint)` for the potential of `η = i_X i_YΩ`.
#[allow(clippy::too_many_arguments)]
pub fn volume_pair_potential_3d(
    x: &VectorField,
    y: &VectorField,
    omega: &VolumeForm,
    basepoint: &[f64],
    target: &[f64],
    panels: usize,
    domain: &Domain,
    cfg: &ZeroTestConfig,
) -> Result<f64, LowDimError> {
    let pair = volume_pair_form(x, y, omega, domain, cfg)?;
    if pair.closedness.is_proven_nonzero() {
        return Err(LowDimError::HypothesisViolated("i_X i_Y Ω is not closed".into()));
    }
    Ok(quadrature(&pair.eta, basepoint, target, panels)?.value)
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

    fn cfg() -> ZeroTestConfig {
        ZeroTestConfig::default()
    }

    #[test]
    fn coordinate_pair_in_the_plane() {
        let v = vars(&["x", "y"]);
        let dx = field(&v, &["1", "0"]);
        let dy = field(&v, &["0", "1"]);
        let om = VolumeForm::standard();
        assert_eq!(planar_f_from_y(&dx, &dy, &om).unwrap(), Expr::one());
        assert_eq!(
            planar_f_from_y(&dx, &dx.scale(&Expr::int(2)), &om),
            Err(LowDimError::RankDeficient)
        );
        let w = lie_one_form(&dx, &dy, &Domain::unit(2), &cfg()).unwrap();
        // i_X(dx∧dy) = dy for X = ∂x
        assert_eq!(w.form.coefficients(), &[Expr::zero(), Expr::one()]);
        assert!(w.closedness.is_proven_zero());
    }

    #[test]
    fn y_from_f_examples() {
        let v = vars(&["x", "y"]);
        let om = VolumeForm::standard();
        let sheared = field(&v, &["1", "1"]);
        assert_eq!(
            planar_y_from_f(&sheared, &Expr::one(), &om),
            Err(LowDimError::DivergenceFree)
        );
        // X = x∂x, f = 1/x: Z = (0, −1/x²), Div X = 1, Y = Z·x² = −∂y
        let x = field(&v, &["x", "0"]);
        let f = parse_expr("1/x", &v).unwrap();
        let y = planar_y_from_f(&x, &f, &om).unwrap();
        assert_eq!(y, field(&v, &["0", "-1"]));
        let lambda = planar_lambda(&y, &f, &om).unwrap();
        assert!(lambda.is_zero());
        let d = Domain::unit(2).excluding(Expr::var(0));
        let r = crate::normalizer::check_relation(&x, &y, &lambda, &Expr::zero(), &d, &cfg()).unwrap();
        assert!(r.is_proven_zero());
    }

    #[test]
    fn dimension_is_enforced() {
        let v = vars(&["x", "y", "z"]);
        let x = field(&v, &["1", "0", "0"]);
        assert_eq!(
            planar_f_from_y(&x, &x, &VolumeForm::standard()),
            Err(LowDimError::WrongDimension { expected: 2, found: 3 })
        );
    }

    #[test]
    fn gauss_legendre_is_exact_on_low_degree() {
        let v = vars(&["x"]);
        // ∫₀¹ 9x⁸ dx = 1, degree 8 ≤ 9
        let w = OneForm::new(v, vec![parse_expr("9*x^8", &vars(&["x"])).unwrap()]);
        let q = segment_integral(&w, &[0.0], &[1.0], 1).unwrap();
        assert!((q - 1.0).abs() < 1e-14);
        assert_eq!(segment_integral(&w, &[0.3], &[0.3], 4).unwrap(), 0.0);
    }

    #[test]
    fn singular_straight_path_falls_back() {
        // ω = d(log r² + xy), r centred at (1/4, 1/4); an odd panel count
        // puts a node exactly on the pole in the middle of the diagonal
        let v = vars(&["x", "y"]);
        let r2 = "((x-1/4)^2+(y-1/4)^2)";
        let w = OneForm::new(
            v.clone(),
            vec![
                parse_expr(&format!("(2*x-1/2)/{r2}+y"), &v).unwrap(),
                parse_expr(&format!("(2*y-1/2)/{r2}+x"), &v).unwrap(),
            ],
        );
        let q = quadrature(&w, &[0.0, 0.0], &[0.5, 0.5], 33).unwrap();
        assert_eq!(q.path, PathKind::AxisForward);
        assert!((q.value - 0.25).abs() < 1e-10, "{}", q.value);
        let w = OneForm::new(v.clone(), vec![parse_expr("1/x", &v).unwrap(), Expr::zero()]);
        assert_eq!(
            quadrature(&w, &[0.0, 0.0], &[0.5, 0.5], 16),
            Err(LowDimError::PathThroughSingularity)
        );
    }

    #[test]
    fn axis_paths() {
        let pts = path_waypoints(PathKind::AxisForward, &[0.0, 0.0], &[1.0, 2.0]);
        assert_eq!(pts, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 2.0]]);
        let pts = path_waypoints(PathKind::AxisReverse, &[0.0, 0.0], &[1.0, 2.0]);
        assert_eq!(pts, vec![vec![0.0, 0.0], vec![0.0, 2.0], vec![1.0, 2.0]]);
    }

    #[test]
    fn three_dimensional_pairs() {
        let v = vars(&["x", "y", "z"]);
        let om = VolumeForm::standard();
        let d = Domain::unit(3);
        let pair = volume_pair_form(
            &field(&v, &["1", "0", "0"]),
            &field(&v, &["0", "1", "0"]),
            &om,
            &d,
            &cfg(),
        )
        .unwrap();
        assert_eq!(pair.eta.coefficients(), &[Expr::zero(), Expr::zero(), Expr::int(-1)]);
        let rot = field(&v, &["-y", "x", "0"]);
        let dz = field(&v, &["0", "0", "1"]);
        let pair = volume_pair_form(&rot, &dz, &om, &d, &cfg()).unwrap();
        assert_eq!(pair.eta.coefficients(), &[-Expr::var(0), -Expr::var(1), Expr::zero()]);
        let i = volume_pair_potential_3d(&rot, &dz, &om, &[0.0; 3], &[0.3, -0.4, 0.9], 8, &d, &cfg()).unwrap();
        assert!((i + 0.125).abs() < 1e-12);
        let radial = field(&v, &["x", "y", "z"]);
        assert!(matches!(
            volume_pair_form(&radial, &dz, &om, &d, &cfg()),
            Err(LowDimError::HypothesisViolated(_))
        ));
    }
}
