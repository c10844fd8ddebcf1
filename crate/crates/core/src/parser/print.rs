use num_traits::{One, Signed};

use crate::expr::{Expr, Rational};

/// Prints an expression in the parser's grammar. Canonical expressions
/// round-trip: `parse_expr(print_expr(e))` is structurally `e`.
pub fn print_expr(e: &Expr, vars: &[String]) -> String {
    let mut s = String::new();
    write_expr(e, vars, &mut s);
    s
}

fn var_name(i: usize, vars: &[String]) -> String {
    vars.get(i).cloned().unwrap_or_else(|| format!("v{i}"))
}

fn rational_str(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn write_expr(e: &Expr, vars: &[String], out: &mut String) {
    match e {
        Expr::Sum(ts) => {
            for (k, t) in ts.iter().enumerate() {
                if k == 0 {
                    write_term(t, vars, out, false);
                } else if is_negative_term(t) {
                    out.push('-');
                    write_term(t, vars, out, true);
                } else {
                    out.push('+');
                    write_term(t, vars, out, false);
                }
            }
        }
        _ => write_term(e, vars, out, false),
    }
}

fn is_negative_term(t: &Expr) -> bool {
    match t {
        Expr::Const(c) => c.is_negative(),
        Expr::Product(fs) => matches!(fs.first(), Some(Expr::Const(c)) if c.is_negative()),
        _ => false,
    }
}

/// A non-sum term; `negate` prints its absolute value.
fn write_term(t: &Expr, vars: &[String], out: &mut String, negate: bool) {
    let (coeff, factors): (Rational, &[Expr]) = match t {
        Expr::Const(c) => (c.clone(), &[]),
        Expr::Product(fs) => match fs.first() {
            Some(Expr::Const(c)) => (c.clone(), &fs[1..]),
            _ => (Rational::one(), &fs[..]),
        },
        Expr::Sum(_) => {
            out.push('(');
            write_expr(t, vars, out);
            out.push(')');
            return;
        }
        other => (Rational::one(), std::slice::from_ref(other)),
    };
    let coeff = if negate { -coeff } else { coeff };
    let (num, den): (Vec<&Expr>, Vec<&Expr>) = factors
        .iter()
        .partition(|f| !matches!(f, Expr::Pow(_, q) if q.is_negative()));
    let mut parts: Vec<String> = Vec::new();
    if num.is_empty() {
        parts.push(rational_str(&coeff));
    } else {
        let lead = if coeff == -Rational::one() {
            Some("-".to_string())
        } else if coeff.is_one() {
            None
        } else {
            Some(format!("{}*", rational_str(&coeff)))
        };
        let body: Vec<String> = num.iter().map(|f| factor_str(f, vars)).collect();
        parts.push(format!("{}{}", lead.unwrap_or_default(), body.join("*")));
    }
    for d in den {
        if let Expr::Pow(b, q) = d {
            parts.push(power_str(b, &-q.clone(), vars));
        }
    }
    out.push_str(&parts.join("/"));
}

fn factor_str(f: &Expr, vars: &[String]) -> String {
    match f {
        Expr::Sum(_) => format!("({})", print_expr(f, vars)),
        Expr::Pow(b, q) => power_str(b, q, vars),
        Expr::Exp(a) => format!("exp({})", print_expr(a, vars)),
        Expr::Var(i) => var_name(*i, vars),
        Expr::Const(c) if c.is_negative() || !c.is_integer() => format!("({})", rational_str(c)),
        Expr::Const(c) => rational_str(c),
        Expr::Product(_) => format!("({})", print_expr(f, vars)),
    }
}

fn power_str(b: &Expr, q: &Rational, vars: &[String]) -> String {
    let base = match b {
        Expr::Var(i) => var_name(*i, vars),
        Expr::Const(c) if !c.is_negative() && c.is_integer() => rational_str(c),
        Expr::Exp(_) => factor_str(b, vars),
        _ => format!("({})", print_expr(b, vars)),
    };
    if q.is_one() {
        base
    } else if q.is_integer() && q.is_positive() {
        format!("{base}^{}", q.numer())
    } else {
        format!("{base}^({})", rational_str(q))
    }
}
