//! Random expressions and fields shared by the property suites.
#![allow(dead_code)]

use std::sync::Arc;

use firstint::{rational, Expr, VectorField};
use proptest::prelude::*;

pub fn names(n: usize) -> Arc<Vec<String>> {
    let base = ["x", "y", "z", "w"];
    Arc::new(base[..n].iter().map(|s| s.to_string()).collect())
}

pub fn small_rational() -> impl Strategy<Value = Expr> {
    (-5i64..=5, 1i64..=4).prop_map(|(n, d)| Expr::Const(rational(n, d)))
}

/// `1 + Σ vᵢ²`, a base that is positive everywhere.
fn positive_base(nvars: usize) -> impl Strategy<Value = Expr> {
    prop::collection::vec((0..nvars, 1i64..=3), 1..=2).prop_map(|terms| {
        let mut parts = vec![Expr::one()];
        for (v, c) in terms {
            parts.push(Expr::Product(vec![
                Expr::int(c),
                Expr::Pow(Box::new(Expr::Var(v)), rational(2, 1)),
            ]));
        }
        Expr::Sum(parts)
    })
}

/// Unsimplified trees with no poles on ℝⁿ: denominators and fractional
/// powers only ever see positive bases.
pub fn raw_expr(nvars: usize) -> BoxedStrategy<Expr> {
    raw_tree(nvars, true)
}

/// As [`raw_expr`] but without fractional powers: rational functions and
/// exponentials only.
pub fn raw_rational_expr(nvars: usize) -> BoxedStrategy<Expr> {
    raw_tree(nvars, false)
}

fn raw_tree(nvars: usize, radicals: bool) -> BoxedStrategy<Expr> {
    let exponents = if radicals {
        prop_oneof![Just(rational(-1, 1)), Just(rational(1, 2)), Just(rational(-1, 2))].boxed()
    } else {
        Just(rational(-1, 1)).boxed()
    };
    let leaf = prop_oneof![
        3 => small_rational(),
        4 => (0..nvars).prop_map(Expr::Var),
        1 => (positive_base(nvars), exponents).prop_map(|(b, q)| Expr::Pow(Box::new(b), q)),
    ];
    leaf.prop_recursive(3, 16, 3, move |inner| {
        prop_oneof![
            3 => prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::Sum),
            3 => prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::Product),
            1 => (inner.clone(), 1i64..=3).prop_map(|(b, k)| Expr::Pow(Box::new(b), rational(k, 1))),
            1 => (inner.clone(), positive_base(nvars))
                .prop_map(|(a, b)| Expr::Product(vec![a, Expr::Pow(Box::new(b), rational(-1, 1))])),
            1 => inner.clone().prop_map(|e| Expr::Exp(Box::new(
                Expr::Product(vec![Expr::Const(rational(1, 3)), e])
            ))),
        ]
    })
    .boxed()
}

/// Canonical expressions.
pub fn canonical_expr(nvars: usize) -> BoxedStrategy<Expr> {
    raw_expr(nvars).prop_map(|e| e.simplify()).boxed()
}

pub fn canonical_rational_expr(nvars: usize) -> BoxedStrategy<Expr> {
    raw_rational_expr(nvars).prop_map(|e| e.simplify()).boxed()
}

/// Polynomials of total degree at most `degree` with small integer coefficients.
pub fn polynomial(nvars: usize, degree: u32) -> BoxedStrategy<Expr> {
    let term = (-3i64..=3, prop::collection::vec(0..nvars, 0..=degree as usize))
        .prop_map(|(c, vs)| Expr::product(std::iter::once(Expr::int(c)).chain(vs.into_iter().map(Expr::var))));
    prop::collection::vec(term, 1..=4).prop_map(Expr::sum).boxed()
}

pub fn poly_field(nvars: usize, degree: u32) -> BoxedStrategy<VectorField> {
    prop::collection::vec(polynomial(nvars, degree), nvars)
        .prop_map(move |cs| VectorField::new(names(nvars), cs).unwrap())
        .boxed()
}

/// Positive polynomial densities for non-standard volume forms.
pub fn density(nvars: usize) -> BoxedStrategy<Expr> {
    positive_base(nvars).prop_map(|e| e.simplify()).boxed()
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}
