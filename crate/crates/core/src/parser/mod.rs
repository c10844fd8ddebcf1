//! Infix expression grammar, deterministic printer, and problem files.
//!
//! ```text
//! sum      := product (('+' | '-') product)*
//! product  := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := atom ('^' exponent)?
//! exponent := '-'? integer | '(' '-'? integer ('/' integer)? ')'
//! atom     := number | name | name '(' sum ')' | '(' sum ')'
//! ```
//!
//! Functions: `exp` and `sqrt` (`sqrt(e)` is `e^(1/2)`).

mod print;
mod problem;

pub use print::print_expr;
pub use problem::{load_problem, parse_problem, write_problem, Problem, ProblemError};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::expr::{Expr, ExprError, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("unknown variable '{name}' at offset {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("unknown function '{name}' at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational, bool),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(..) => "number".into(),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Sym(c) => format!("'{c}'"),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let mut mantissa = String::new();
            let mut frac_digits = 0i32;
            let mut seen_dot = false;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || (bytes[i] == b'.' && !seen_dot)) {
                if bytes[i] == b'.' {
                    seen_dot = true;
                } else {
                    mantissa.push(bytes[i] as char);
                    if seen_dot {
                        frac_digits += 1;
                    }
                }
                i += 1;
            }
            let mut exp10 = -frac_digits;
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                let neg = bytes.get(j) == Some(&b'-');
                if matches!(bytes.get(j), Some(b'-') | Some(b'+')) {
                    j += 1;
                }
                if bytes.get(j).is_some_and(u8::is_ascii_digit) {
                    let ds = j;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    let e: i32 = text[ds..j].parse().map_err(|_| ParseError::Syntax {
                        offset: ds,
                        expected: "exponent digits".into(),
                        found: "overflow".into(),
                    })?;
                    exp10 += if neg { -e } else { e };
                    i = j;
                }
            }
            let m: BigInt = mantissa.parse().expect("digits");
            let ten = BigInt::from(10);
            let value = if exp10 >= 0 {
                Rational::from_integer(m * num_traits::pow(ten, exp10 as usize))
            } else {
                Rational::new(m, num_traits::pow(ten, (-exp10) as usize))
            };
            let is_integer = !seen_dot && exp10 >= 0;
            out.push((Tok::Num(value, is_integer), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        match c {
            b'+' | b'-' | b'*' | b'/' | b'^' | b'(' | b')' => {
                out.push((Tok::Sym(c as char), start));
                i += 1;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap();
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: "expression".into(),
                    found: format!("'{ch}'"),
                });
            }
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected: expected.into(),
            found: self.peek().describe(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("'{c}'")))
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.product()?];
        loop {
            if self.eat('+') {
                terms.push(self.product()?);
            } else if self.eat('-') {
                let t = self.product()?;
                terms.push(negate(t));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Sum(terms)
        })
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat('*') {
                factors.push(self.unary()?);
            } else if self.eat('/') {
                let d = self.unary()?;
                factors.push(Expr::Pow(Box::new(d), -Rational::one()));
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Product(factors)
        })
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(negate(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let q = self.exponent()?;
        if q.is_zero() {
            return Ok(Expr::one());
        }
        Ok(Expr::Pow(Box::new(base), q))
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        match self.peek().clone() {
            Tok::Num(v, true) => {
                self.bump();
                Ok(v.to_integer())
            }
            _ => Err(self.error("integer exponent")),
        }
    }

    fn exponent(&mut self) -> Result<Rational, ParseError> {
        if self.eat('(') {
            let neg = self.eat('-');
            let n = self.integer()?;
            let d = if self.eat('/') {
                let d = self.integer()?;
                if d.is_zero() {
                    return Err(ExprError::DivisionByZero.into());
                }
                d
            } else {
                BigInt::one()
            };
            self.expect(')')?;
            let q = Rational::new(n, d);
            return Ok(if neg { -q } else { q });
        }
        let neg = self.eat('-');
        let n = Rational::from_integer(self.integer()?);
        Ok(if neg { -n } else { n })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v, _) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.eat('(') {
                    let arg = self.sum()?;
                    self.expect(')')?;
                    return match name.as_str() {
                        "exp" => Ok(Expr::Exp(Box::new(arg))),
                        "sqrt" => Ok(Expr::Pow(Box::new(arg), crate::expr::rational(1, 2))),
                        _ => Err(ParseError::UnknownFunction { name, offset }),
                    };
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(ParseError::UnknownVariable { name, offset }),
                }
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => Err(self.error("number, name or '('")),
        }
    }
}

fn negate(e: Expr) -> Expr {
    Expr::Product(vec![Expr::int(-1), e])
}

/// Parses `text` over the ordered variable names and returns its canonical form.
pub fn parse_expr(text: &str, vars: &[String]) -> Result<Expr, ParseError> {
    let raw = parse_raw(text, vars)?;
    Ok(raw.try_simplify()?)
}

/// The syntax tree before simplification.
pub fn parse_raw(text: &str, vars: &[String]) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, vars };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.error("operator or end of input"));
    }
    Ok(e)
}
