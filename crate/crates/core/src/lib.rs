//! Explicit first integrals of vector fields on coordinate boxes of ℝⁿ,
//! built from an integrating factor and a (generalized) normalizer.

pub mod catalog;
pub mod cli;
pub mod domain;
pub mod expr;
pub mod field;
pub mod first_integral;
pub mod low_dim;
pub mod normalizer;
pub mod numeric;
pub mod parser;

pub use domain::Domain;
pub use expr::{is_zero, rational, Expr, Rational, Verdict, ZeroTestConfig};
pub use field::{divergence, is_integrating_factor, lie_bracket, lie_scalar, VectorField, VolumeForm};
pub use parser::{load_problem, parse_expr, parse_problem, print_expr, Problem};
