//! Line-oriented problem files.
//!
//! ```text
//! # comment
//! vars   = x y
//! volume = 1
//! X  = [ -4*y^3/(1+x^2), (1+x^4+y^4+4*x^3)/(1+x^2) ]
//! f  = (1+x^2)*exp(x)
//! domain = [-1,1] [-1,1]
//! ```
//!
//! An entry continues onto following lines while brackets are open. Keys:
//! `vars` and `X` (required), `volume`, `Y`, `Y1`, `Y2`, …, `f`, `lambda`,
//! `mu`, `domain`, `seed`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use super::{parse_expr, ParseError};
use crate::domain::Domain;
use crate::expr::Expr;
use crate::field::{FieldError, VectorField, VolumeForm};
use crate::numeric::sampling::Sampler;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot read problem file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: in '{key}': {source}")]
    Expr {
        line: usize,
        key: String,
        #[source]
        source: ParseError,
    },
    #[error("line {line}: '{key}' has {found} components, expected {expected}")]
    DimensionMismatch {
        line: usize,
        key: String,
        expected: usize,
        found: usize,
    },
    #[error("missing required field '{0}'")]
    MissingField(&'static str),
    #[error("volume density is not positive at {0:?}")]
    NonPositiveDensity(Vec<f64>),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// The data of one first-integral question.
#[derive(Debug, Clone)]
pub struct Problem {
    pub vars: Arc<Vec<String>>,
    pub volume: VolumeForm,
    pub x: VectorField,
    pub y: Option<VectorField>,
    pub ylist: Vec<VectorField>,
    pub f: Option<Expr>,
    pub lambda: Option<Expr>,
    pub mu: Option<Expr>,
    pub domain: Domain,
    pub seed: u64,
}

impl Problem {
    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    /// Parses an expression over this problem's variables.
    pub fn parse(&self, text: &str) -> Result<Expr, ParseError> {
        parse_expr(text, &self.vars)
    }
}

struct Entry {
    line: usize,
    value: String,
}

fn logical_entries(text: &str) -> Result<BTreeMap<String, Entry>, ProblemError> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    let mut pending: Option<(usize, String)> = None;
    let mut depth: i64 = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        if pending.is_none() && line.trim().is_empty() {
            continue;
        }
        for c in line.chars() {
            match c {
                '[' | '(' => depth += 1,
                ']' | ')' => depth -= 1,
                _ => {}
            }
        }
        match &mut pending {
            Some((_, buf)) => {
                buf.push(' ');
                buf.push_str(line.trim());
            }
            None => pending = Some((line_no, line.trim().to_string())),
        }
        if depth < 0 {
            return Err(ProblemError::Syntax {
                line: line_no,
                message: "unbalanced closing bracket".into(),
            });
        }
        if depth == 0 {
            let (start, buf) = pending.take().unwrap();
            let Some((key, value)) = buf.split_once('=') else {
                return Err(ProblemError::Syntax {
                    line: start,
                    message: "expected 'key = value'".into(),
                });
            };
            let key = key.trim().to_string();
            if !is_known_key(&key) {
                return Err(ProblemError::Syntax {
                    line: start,
                    message: format!("unknown key '{key}'"),
                });
            }
            if entries.contains_key(&key) {
                return Err(ProblemError::Syntax {
                    line: start,
                    message: format!("duplicate key '{key}'"),
                });
            }
            entries.insert(
                key,
                Entry {
                    line: start,
                    value: value.trim().to_string(),
                },
            );
        }
    }
    if let Some((start, _)) = pending {
        return Err(ProblemError::Syntax {
            line: start,
            message: "unterminated bracket".into(),
        });
    }
    Ok(entries)
}

fn is_known_key(k: &str) -> bool {
    matches!(
        k,
        "vars" | "volume" | "X" | "Y" | "f" | "lambda" | "mu" | "domain" | "seed"
    ) || ylist_index(k).is_some()
}

fn ylist_index(k: &str) -> Option<usize> {
    let digits = k.strip_prefix('Y')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().filter(|&i| i >= 1)
}

/// Splits `[a, b, c]` into its top-level comma-separated items.
fn bracket_items(value: &str, line: usize) -> Result<Vec<String>, ProblemError> {
    let inner = value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .ok_or_else(|| ProblemError::Syntax {
            line,
            message: "expected a bracketed list '[ ... ]'".into(),
        })?;
    let mut items = Vec::new();
    let mut depth = 0i64;
    let mut cur = String::new();
    for c in inner.chars() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                items.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() || !items.is_empty() {
        items.push(cur.trim().to_string());
    }
    Ok(items)
}

fn parse_field(key: &str, entry: &Entry, vars: &Arc<Vec<String>>) -> Result<VectorField, ProblemError> {
    let items = bracket_items(&entry.value, entry.line)?;
    if items.len() != vars.len() {
        return Err(ProblemError::DimensionMismatch {
            line: entry.line,
            key: key.to_string(),
            expected: vars.len(),
            found: items.len(),
        });
    }
    let comps = items
        .iter()
        .map(|s| parse_at(key, entry.line, s, vars))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VectorField::new(vars.clone(), comps)?)
}

fn parse_at(key: &str, line: usize, text: &str, vars: &[String]) -> Result<Expr, ProblemError> {
    parse_expr(text, vars).map_err(|source| ProblemError::Expr {
        line,
        key: key.to_string(),
        source,
    })
}

fn parse_domain(entry: &Entry, n: usize) -> Result<Domain, ProblemError> {
    let syntax = |message: String| ProblemError::Syntax {
        line: entry.line,
        message,
    };
    let mut bounds = Vec::new();
    let mut rest = entry.value.trim();
    while !rest.is_empty() {
        let close = rest
            .find(']')
            .ok_or_else(|| syntax("expected '[lo,hi]' intervals".into()))?;
        let interval = rest[..=close].trim();
        let inner = interval
            .strip_prefix('[')
            .and_then(|v| v.strip_suffix(']'))
            .ok_or_else(|| syntax("expected '[lo,hi]' intervals".into()))?;
        let (lo, hi) = inner
            .split_once(',')
            .ok_or_else(|| syntax(format!("interval '{interval}' needs two bounds")))?;
        let lo: f64 = lo
            .trim()
            .parse()
            .map_err(|_| syntax(format!("bad bound '{}'", lo.trim())))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .map_err(|_| syntax(format!("bad bound '{}'", hi.trim())))?;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(syntax(format!("empty or invalid interval '{interval}'")));
        }
        bounds.push((lo, hi));
        rest = rest[close + 1..].trim_start();
    }
    if bounds.len() != n {
        return Err(ProblemError::DimensionMismatch {
            line: entry.line,
            key: "domain".into(),
            expected: n,
            found: bounds.len(),
        });
    }
    Ok(Domain::new(bounds))
}

/// Parses and validates problem-file text.
pub fn parse_problem(text: &str) -> Result<Problem, ProblemError> {
    let entries = logical_entries(text)?;
    let vars_entry = entries.get("vars").ok_or(ProblemError::MissingField("vars"))?;
    let names: Vec<String> = vars_entry.value.split_whitespace().map(str::to_string).collect();
    if names.is_empty() {
        return Err(ProblemError::Syntax {
            line: vars_entry.line,
            message: "no variables declared".into(),
        });
    }
    for (i, name) in names.iter().enumerate() {
        let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid || name == "exp" || name == "sqrt" {
            return Err(ProblemError::Syntax {
                line: vars_entry.line,
                message: format!("invalid variable name '{name}'"),
            });
        }
        if names[..i].contains(name) {
            return Err(ProblemError::Syntax {
                line: vars_entry.line,
                message: format!("variable '{name}' declared twice"),
            });
        }
    }
    let vars = Arc::new(names);
    let n = vars.len();

    let x_entry = entries.get("X").ok_or(ProblemError::MissingField("X"))?;
    let x = parse_field("X", x_entry, &vars)?;
    let y = entries.get("Y").map(|e| parse_field("Y", e, &vars)).transpose()?;
    let mut indexed: Vec<(usize, VectorField)> = Vec::new();
    for (k, e) in &entries {
        if let Some(i) = ylist_index(k) {
            indexed.push((i, parse_field(k, e, &vars)?));
        }
    }
    indexed.sort_by_key(|(i, _)| *i);
    for (pos, (i, _)) in indexed.iter().enumerate() {
        if *i != pos + 1 {
            return Err(ProblemError::MissingField("Y1, Y2, ... must be numbered consecutively"));
        }
    }
    let ylist = indexed.into_iter().map(|(_, v)| v).collect();

    let scalar = |key: &str| -> Result<Option<Expr>, ProblemError> {
        entries
            .get(key)
            .map(|e| parse_at(key, e.line, &e.value, &vars))
            .transpose()
    };
    let density = scalar("volume")?.unwrap_or_else(Expr::one);
    let f = scalar("f")?;
    let lambda = scalar("lambda")?;
    let mu = scalar("mu")?;
    let domain = match entries.get("domain") {
        Some(e) => parse_domain(e, n)?,
        None => Domain::unit(n),
    };
    let seed = match entries.get("seed") {
        Some(e) => e.value.parse().map_err(|_| ProblemError::Syntax {
            line: e.line,
            message: format!("seed must be a non-negative integer, found '{}'", e.value),
        })?,
        None => 0,
    };
    let volume = VolumeForm::new(density)?;
    check_density(&volume, &domain, seed)?;
    Ok(Problem {
        vars,
        volume,
        x,
        y,
        ylist,
        f,
        lambda,
        mu,
        domain,
        seed,
    })
}

fn check_density(volume: &VolumeForm, domain: &Domain, seed: u64) -> Result<(), ProblemError> {
    let rho = volume.density();
    if let Some(c) = rho.as_constant() {
        return if num_traits::Signed::is_positive(c) {
            Ok(())
        } else {
            Err(ProblemError::NonPositiveDensity(domain.center()))
        };
    }
    let mut sampler = Sampler::new(domain, seed, crate::numeric::sampling::STREAM_PROBE);
    for p in sampler.draw_valid(64, 64) {
        if let Ok(v) = rho.evaluate(&p) {
            if v <= 0.0 {
                return Err(ProblemError::NonPositiveDensity(p));
            }
        }
    }
    Ok(())
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<Problem, ProblemError> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}

/// Serializes a problem back into the file format.
pub fn write_problem(p: &Problem) -> String {
    let mut out = String::new();
    let put = |out: &mut String, k: &str, v: String| out.push_str(&format!("{k:<6} = {v}\n"));
    put(&mut out, "vars", p.vars.join(" "));
    put(&mut out, "volume", p.volume.density().display(&p.vars).to_string());
    put(&mut out, "X", p.x.to_problem_syntax());
    if let Some(y) = &p.y {
        put(&mut out, "Y", y.to_problem_syntax());
    }
    for (i, y) in p.ylist.iter().enumerate() {
        put(&mut out, &format!("Y{}", i + 1), y.to_problem_syntax());
    }
    for (k, v) in [("f", &p.f), ("lambda", &p.lambda), ("mu", &p.mu)] {
        if let Some(e) = v {
            put(&mut out, k, e.display(&p.vars).to_string());
        }
    }
    let dom: Vec<String> = p.domain.bounds.iter().map(|(a, b)| format!("[{a},{b}]")).collect();
    put(&mut out, "domain", dom.join(" "));
    if p.seed != 0 {
        put(&mut out, "seed", p.seed.to_string());
    }
    out
}
