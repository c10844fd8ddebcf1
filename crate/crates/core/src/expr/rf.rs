//! Factored normal form: `coeff · exp(E) · ∏ base^e`.
//!
//! Every [`Expr`] is simplified by converting it to an [`Rf`] and back. Sums
//! are formed by pulling out the common part of all terms, expanding the
//! remainders into a single [`Poly`], and re-factoring that polynomial by
//! trial division against the bases already in play. A sum is zero exactly
//! when the expanded polynomial is zero, which makes the zero test exact for
//! rational functions and for exponential polynomials with distinct arguments.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{Atom, Base, Int, Mono, Poly};
use super::{Expr, ExprError, Rational};

#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct Rf {
    coeff: Rational,
    exp: Option<Arc<Expr>>,
    factors: BTreeMap<Base, Rational>,
}

fn rat(k: i64) -> Rational {
    Rational::from_integer(Int::from(k))
}

fn floor(r: &Rational) -> Int {
    r.floor().to_integer()
}

impl Rf {
    pub fn zero() -> Self {
        Rf {
            coeff: Rational::zero(),
            exp: None,
            factors: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Rf::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Rf {
            coeff: c,
            exp: None,
            factors: BTreeMap::new(),
        }
    }

    pub fn var(i: usize) -> Self {
        Rf::from_base(Base::Var(i), Rational::one())
    }

    fn from_base(b: Base, e: Rational) -> Self {
        let mut factors = BTreeMap::new();
        factors.insert(b, e);
        let mut r = Rf {
            coeff: Rational::one(),
            exp: None,
            factors,
        };
        r.normalize();
        r
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// The term `c · x^m · atom` of a polynomial as a factored product.
    pub fn from_term(m: &Mono, a: &Atom, c: &Int) -> Self {
        let mut factors = BTreeMap::new();
        for (i, k) in m.exponents() {
            factors.insert(Base::Var(i), rat(k as i64));
        }
        for (b, r) in &a.radicals {
            factors.insert(b.clone(), r.clone());
        }
        Rf {
            coeff: Rational::from_integer(c.clone()),
            exp: a.exp.clone(),
            factors,
        }
    }

    /// Folds integer parts of integer-base powers into the coefficient and
    /// drops zero exponents.
    fn normalize(&mut self) {
        if self.coeff.is_zero() {
            *self = Rf::zero();
            return;
        }
        let ints: Vec<(Int, Rational)> = self
            .factors
            .iter()
            .filter_map(|(b, e)| match b {
                Base::Int(k) => Some((k.clone(), e.clone())),
                _ => None,
            })
            .collect();
        for (k, e) in ints {
            let whole = floor(&e);
            let frac = &e - Rational::from_integer(whole.clone());
            let key = Base::Int(k.clone());
            if let Some(w) = whole.to_i32() {
                if w != 0 {
                    let f = Rational::from_integer(k.clone());
                    self.coeff *= pow_rational(&f, w);
                }
            }
            if frac.is_zero() {
                self.factors.remove(&key);
            } else {
                self.factors.insert(key, frac);
            }
        }
        self.factors.retain(|_, e| !e.is_zero());
    }

    pub fn neg(&self) -> Rf {
        let mut r = self.clone();
        r.coeff = -r.coeff;
        r
    }

    pub fn mul(&self, other: &Rf) -> Rf {
        if self.is_zero() || other.is_zero() {
            return Rf::zero();
        }
        let exp = match (&self.exp, &other.exp) {
            (None, e) | (e, None) => e.clone(),
            (Some(a), Some(b)) => super::poly::add_exponents(a, b),
        };
        let mut factors = self.factors.clone();
        for (b, e) in &other.factors {
            *factors.entry(b.clone()).or_insert_with(Rational::zero) += e;
        }
        let mut r = Rf {
            coeff: &self.coeff * &other.coeff,
            exp,
            factors,
        };
        r.normalize();
        r.cancel_cross();
        r
    }

    /// Cancels a negative-power pure base against a positive-power base it
    /// divides; the positive one may carry exponentials or radicals.
    fn cancel_cross(&mut self) {
        loop {
            let pos: Vec<(Arc<Poly>, Rational)> = self
                .factors
                .iter()
                .filter(|(_, e)| e.is_positive() && e.is_integer())
                .filter_map(|(b, e)| match b {
                    Base::Poly(p) => Some((p.clone(), e.clone())),
                    _ => None,
                })
                .collect();
            let neg: Vec<(Arc<Poly>, Rational)> = self
                .factors
                .iter()
                .filter(|(_, e)| e.is_negative() && e.is_integer())
                .filter_map(|(b, e)| b.is_pure_poly().map(|p| (p.clone(), e.clone())))
                .collect();
            if pos.is_empty() || neg.is_empty() {
                return;
            }
            let mut changed = false;
            'outer: for (p, pe) in &pos {
                for (n, _) in &neg {
                    if let Some(q) = p.div_exact(n) {
                        self.factors.remove(&Base::Poly(p.clone()));
                        *self.factors.entry(Base::Poly(n.clone())).or_insert_with(Rational::zero) += pe;
                        let qf = Rf::from_poly(q, &[]).pow_unchecked(pe);
                        let merged = self.clone_without_cancel(&qf);
                        *self = merged;
                        changed = true;
                        break 'outer;
                    }
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn clone_without_cancel(&self, other: &Rf) -> Rf {
        let mut factors = self.factors.clone();
        for (b, e) in &other.factors {
            *factors.entry(b.clone()).or_insert_with(Rational::zero) += e;
        }
        let exp = match (&self.exp, &other.exp) {
            (None, e) | (e, None) => e.clone(),
            (Some(a), Some(b)) => super::poly::add_exponents(a, b),
        };
        let mut r = Rf {
            coeff: &self.coeff * &other.coeff,
            exp,
            factors,
        };
        r.normalize();
        r
    }

    pub fn pow(&self, q: &Rational) -> Result<Rf, ExprError> {
        if self.is_zero() {
            return if q.is_positive() {
                Ok(Rf::zero())
            } else {
                Err(ExprError::DivisionByZero)
            };
        }
        Ok(self.pow_unchecked(q))
    }

    fn pow_unchecked(&self, q: &Rational) -> Rf {
        if q.is_zero() {
            return Rf::one();
        }
        if q.is_one() {
            return self.clone();
        }
        let exp = self.exp.as_ref().and_then(|e| {
            let s = Rf::from_canonical(e).mul(&Rf::constant(q.clone()));
            (!s.is_zero()).then(|| Arc::new(s.to_expr()))
        });
        let mut factors: BTreeMap<Base, Rational> = self.factors.iter().map(|(b, e)| (b.clone(), e * q)).collect();
        let coeff = if q.is_integer() {
            pow_rational(&self.coeff, q.to_integer().to_i32().expect("exponent too large"))
        } else {
            let mut out = Rational::one();
            let num = self.coeff.numer().abs();
            let den = self.coeff.denom().clone();
            for (k, sign) in [(num, 1i64), (den, -1i64)] {
                if k.is_one() {
                    continue;
                }
                // exact root when k is a perfect power
                let b = q.denom().to_u32().unwrap_or(0);
                if b > 0 {
                    let root = k.nth_root(b);
                    if pow_int(&root, b) == k {
                        let e = q.numer().to_i32().unwrap_or(0) * sign as i32;
                        out *= pow_rational(&Rational::from_integer(root), e);
                        continue;
                    }
                }
                *factors.entry(Base::Int(k)).or_insert_with(Rational::zero) += q * rat(sign);
            }
            if self.coeff.is_negative() {
                if q.denom().is_odd() {
                    if q.numer().is_odd() {
                        out = -out;
                    }
                } else {
                    *factors.entry(Base::Int(Int::from(-1))).or_insert_with(Rational::zero) += q;
                }
            }
            out
        };
        let mut r = Rf { coeff, exp, factors };
        r.normalize();
        r
    }

    /// Factors a polynomial: integer content, monomial content, common atom
    /// parts, then repeated trial division by the pure bases in `ctx`.
    pub fn from_poly(p: Poly, ctx: &[Arc<Poly>]) -> Rf {
        if p.is_zero() {
            return Rf::zero();
        }
        let mut p = p;
        let mut r = Rf::one();
        let g = p.content();
        if !g.is_one() {
            p = p.div_int(&g);
        }
        r.coeff = Rational::from_integer(g);
        let m = p.mono_gcd();
        if !m.is_one() {
            p = p.div_mono(&m);
            for (i, k) in m.exponents() {
                r.factors.insert(Base::Var(i), rat(k as i64));
            }
        }
        // common exponential
        let first_exp = p.terms.keys().next().and_then(|(_, a)| a.exp.clone());
        if let Some(e) = first_exp {
            if p.terms.keys().all(|(_, a)| a.exp.as_ref() == Some(&e)) {
                p = p.map_atoms(|a| Atom {
                    exp: None,
                    radicals: a.radicals.clone(),
                });
                r.exp = Some(e);
            }
        }
        // common radicals
        let first_rad: Vec<(Base, Rational)> = p
            .terms
            .keys()
            .next()
            .map(|(_, a)| a.radicals.clone())
            .unwrap_or_default();
        for (b, _) in first_rad {
            let mut min: Option<Rational> = None;
            for (_, a) in p.terms.keys() {
                match a.radicals.iter().find(|(b2, _)| *b2 == b) {
                    Some((_, e)) => {
                        min = Some(match min {
                            Some(m) if m < *e => m,
                            _ => e.clone(),
                        })
                    }
                    None => {
                        min = None;
                        break;
                    }
                }
            }
            if let Some(mn) = min {
                p = p.map_atoms(|a| {
                    let radicals = a
                        .radicals
                        .iter()
                        .filter_map(|(b2, e)| {
                            if *b2 == b {
                                let left = e - &mn;
                                (!left.is_zero()).then(|| (b2.clone(), left))
                            } else {
                                Some((b2.clone(), e.clone()))
                            }
                        })
                        .collect();
                    Atom {
                        exp: a.exp.clone(),
                        radicals,
                    }
                });
                *r.factors.entry(b).or_insert_with(Rational::zero) += mn;
            }
        }
        if p.len() >= 2 {
            let mut seen: BTreeSet<&Arc<Poly>> = BTreeSet::new();
            for d in ctx {
                if !seen.insert(d) || !d.is_pure() || d.len() < 2 {
                    continue;
                }
                while p.len() >= 2 {
                    match p.div_exact(d) {
                        Some(q) => {
                            p = q;
                            *r.factors.entry(Base::Poly(d.clone())).or_insert_with(Rational::zero) += Rational::one();
                        }
                        None => break,
                    }
                }
            }
        }
        if p.len() >= 2 {
            if p.leading_sign_is_negative() {
                p = p.neg();
                r.coeff = -r.coeff;
            }
            *r.factors.entry(Base::Poly(Arc::new(p))).or_insert_with(Rational::zero) += Rational::one();
        } else {
            let ((m, a), c) = p.terms.into_iter().next().expect("nonzero");
            let t = Rf::from_term(&m, &a, &c);
            r = r.clone_without_cancel(&t);
        }
        r.normalize();
        r
    }

    /// Sum of factored terms; the result is re-factored.
    pub fn sum(terms: Vec<Rf>) -> Rf {
        let mut terms: Vec<Rf> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        match terms.len() {
            0 => return Rf::zero(),
            1 => return terms.pop().unwrap(),
            _ => {}
        }
        let common_exp = {
            let e0 = terms[0].exp.clone();
            if terms.iter().all(|t| t.exp == e0) {
                e0
            } else {
                None
            }
        };
        let bases: BTreeSet<Base> = terms.iter().flat_map(|t| t.factors.keys().cloned()).collect();
        let mut common: BTreeMap<Base, Rational> = BTreeMap::new();
        for b in &bases {
            let min = terms
                .iter()
                .map(|t| t.factors.get(b).cloned().unwrap_or_else(Rational::zero))
                .min()
                .unwrap();
            if !min.is_zero() {
                common.insert(b.clone(), min);
            }
        }
        let mut lcm = Int::one();
        for t in &terms {
            lcm = lcm.lcm(t.coeff.denom());
        }
        let mut cache: HashMap<(Base, u32), Poly> = HashMap::new();
        let mut acc = Poly::zero();
        for t in &terms {
            let c = (&t.coeff * Rational::from_integer(lcm.clone())).to_integer();
            let mut radicals = Vec::new();
            let mut expand: Vec<(Base, u32)> = Vec::new();
            let mut mono = Mono::one();
            for b in &bases {
                let e = t.factors.get(b).cloned().unwrap_or_else(Rational::zero)
                    - common.get(b).cloned().unwrap_or_else(Rational::zero);
                if e.is_zero() {
                    continue;
                }
                let whole = floor(&e);
                let frac = &e - Rational::from_integer(whole.clone());
                let k = whole.to_u32().expect("exponent fits in u32");
                if k > 0 {
                    if let Base::Var(i) = b {
                        mono = mono.mul(&Mono::var(*i, k));
                    } else {
                        expand.push((b.clone(), k));
                    }
                }
                if !frac.is_zero() {
                    radicals.push((b.clone(), frac));
                }
            }
            let atom = Atom {
                exp: if common_exp.is_some() { None } else { t.exp.clone() },
                radicals,
            };
            let mut poly = Poly::term(mono, atom, c);
            for (b, k) in expand {
                let pw = cache.entry((b.clone(), k)).or_insert_with(|| b.to_poly().pow(k));
                poly = poly.mul(pw);
            }
            acc.add_assign(&poly);
        }
        if acc.is_zero() {
            return Rf::zero();
        }
        for b in &bases {
            acc = shift_radicals(acc, b, &mut common);
        }
        let ctx: Vec<Arc<Poly>> = bases.iter().filter_map(|b| b.is_pure_poly().cloned()).collect();
        let body = Rf::from_poly(acc, &ctx);
        let outer = Rf {
            coeff: Rational::new(Int::one(), lcm),
            exp: common_exp,
            factors: common,
        };
        outer.mul(&body)
    }

    pub fn diff(&self, v: usize) -> Rf {
        if self.is_zero() {
            return Rf::zero();
        }
        let mut parts = Vec::new();
        if let Some(e) = &self.exp {
            let de = Rf::from_canonical(e).diff(v);
            if !de.is_zero() {
                parts.push(de);
            }
        }
        for (b, e) in &self.factors {
            let db = b.diff(v);
            if db.is_zero() {
                continue;
            }
            let inv = Rf::from_base(b.clone(), rat(-1));
            parts.push(Rf::constant(e.clone()).mul(&db).mul(&inv));
        }
        if parts.is_empty() {
            return Rf::zero();
        }
        self.mul(&Rf::sum(parts))
    }

    // ---- conversion -------------------------------------------------------

    pub fn from_expr(e: &Expr) -> Result<Rf, ExprError> {
        Ok(match e {
            Expr::Const(c) => Rf::constant(c.clone()),
            Expr::Var(i) => Rf::var(*i),
            Expr::Sum(ts) => Rf::sum(ts.iter().map(Rf::from_expr).collect::<Result<_, _>>()?),
            Expr::Product(fs) => {
                let mut acc = Rf::one();
                for f in fs {
                    acc = acc.mul(&Rf::from_expr(f)?);
                    if acc.is_zero() {
                        break;
                    }
                }
                acc
            }
            Expr::Pow(b, q) => Rf::from_expr(b)?.pow(q)?,
            Expr::Exp(a) => {
                let arg = Rf::from_expr(a)?;
                if arg.is_zero() {
                    Rf::one()
                } else {
                    Rf {
                        coeff: Rational::one(),
                        exp: Some(Arc::new(arg.to_expr())),
                        factors: BTreeMap::new(),
                    }
                }
            }
        })
    }

    /// Conversion of an expression already known to be canonical.
    pub fn from_canonical(e: &Expr) -> Rf {
        Rf::from_expr(e).expect("canonical expressions have no zero divisors")
    }

    /// Expanded representative: positive integer powers of polynomial bases
    /// are multiplied out into one numerator, which is then re-factored
    /// against the remaining bases. `(1+x)·(1−y²)` and `1+x−y²−x·y²` are both
    /// factored forms; this maps them to the same result.
    pub fn expanded(&self) -> Rf {
        let mut keep = BTreeMap::new();
        let mut numerator: Option<Poly> = None;
        for (b, e) in &self.factors {
            match b {
                Base::Poly(p) if e.is_integer() && e.is_positive() => {
                    let k = e.to_integer().to_u32().expect("exponent fits in u32");
                    let pk = p.pow(k);
                    numerator = Some(match numerator {
                        None => pk,
                        Some(n) => n.mul(&pk),
                    });
                }
                _ => {
                    keep.insert(b.clone(), e.clone());
                }
            }
        }
        let Some(mut n) = numerator else {
            return self.clone();
        };
        let ctx: Vec<Arc<Poly>> = keep.keys().filter_map(|b| b.is_pure_poly().cloned()).collect();
        let shiftable: Vec<Base> = keep
            .keys()
            .filter(|b| matches!(b, Base::Var(_)) || b.is_pure_poly().is_some())
            .cloned()
            .collect();
        for b in &shiftable {
            n = shift_radicals(n, b, &mut keep);
        }
        let outer = Rf {
            coeff: self.coeff.clone(),
            exp: self.exp.clone(),
            factors: keep,
        };
        outer.clone_without_cancel(&Rf::from_poly(n, &ctx))
    }

    pub fn to_expr(&self) -> Expr {
        if self.is_zero() {
            return Expr::Const(Rational::zero());
        }
        let mut fs = Vec::new();
        if !self.coeff.is_one() {
            fs.push(Expr::Const(self.coeff.clone()));
        }
        for (b, e) in &self.factors {
            fs.push(power_expr(base_expr(b), e));
        }
        if let Some(arg) = &self.exp {
            fs.push(Expr::Exp(Box::new((**arg).clone())));
        }
        match fs.len() {
            0 => Expr::Const(Rational::one()),
            1 => fs.pop().unwrap(),
            _ => Expr::Product(fs),
        }
    }
}

fn power_expr(b: Expr, e: &Rational) -> Expr {
    if e.is_one() {
        b
    } else {
        Expr::Pow(Box::new(b), e.clone())
    }
}

fn base_expr(b: &Base) -> Expr {
    match b {
        Base::Int(k) => Expr::Const(Rational::from_integer(k.clone())),
        Base::Var(i) => Expr::Var(*i),
        Base::Poly(p) => poly_expr(p),
    }
}

fn poly_expr(p: &Poly) -> Expr {
    let terms: Vec<Expr> = p
        .terms
        .iter()
        .map(|((m, a), c)| Rf::from_term(m, a, c).to_expr())
        .collect();
    if terms.len() == 1 {
        terms.into_iter().next().unwrap()
    } else {
        Expr::Sum(terms)
    }
}

fn pow_int(b: &Int, k: u32) -> Int {
    num_traits::pow(b.clone(), k as usize)
}

fn pow_rational(b: &Rational, k: i32) -> Rational {
    if k >= 0 {
        Rational::new(pow_int(b.numer(), k as u32), pow_int(b.denom(), k as u32))
    } else {
        let k = k.unsigned_abs();
        Rational::new(pow_int(b.denom(), k), pow_int(b.numer(), k))
    }
}

/// Moves as much of `b`'s fractional power out of a sum body as exact
/// division allows. Taking out `b^δ`, with `δ` the smallest radical exponent
/// of `b` in the body, leaves those terms with exponent `r − δ` and turns the
/// radical-free terms into `b^(1−δ)` times their quotient by `b`. Without
/// this, `(P·b + Q·b^(1/2))·b^(−1/2)` and `P·b^(1/2) + Q` would both be normal.
fn shift_radicals(mut acc: Poly, b: &Base, common: &mut BTreeMap<Base, Rational>) -> Poly {
    let divisor = match b {
        Base::Var(_) => b.to_poly(),
        Base::Poly(p) if p.is_pure() => (**p).clone(),
        _ => return acc,
    };
    let exponent_of = |a: &Atom| a.radicals.iter().find(|(b2, _)| b2 == b).map(|(_, r)| r.clone());
    let with_radical = |a: &Atom, r: Rational| {
        let mut radicals: Vec<(Base, Rational)> = a.radicals.iter().filter(|(b2, _)| b2 != b).cloned().collect();
        if !r.is_zero() {
            radicals.push((b.clone(), r));
            radicals.sort();
        }
        Atom {
            exp: a.exp.clone(),
            radicals,
        }
    };
    loop {
        let Some(delta) = acc.terms.keys().filter_map(|(_, a)| exponent_of(a)).min() else {
            return acc;
        };
        let mut plain = Poly::zero();
        let mut rest = Vec::new();
        for ((m, a), c) in &acc.terms {
            match exponent_of(a) {
                None => plain.add_term(m.clone(), a.clone(), c.clone()),
                Some(r) => rest.push((m.clone(), a.clone(), c.clone(), r)),
            }
        }
        let Some(q) = plain.div_exact(&divisor) else {
            return acc;
        };
        let mut next = Poly::zero();
        for ((m, a), c) in q.terms {
            next.add_term(m, with_radical(&a, Rational::one() - &delta), c);
        }
        for (m, a, c, r) in rest {
            next.add_term(m, with_radical(&a, r - &delta), c);
        }
        let e = common.entry(b.clone()).or_insert_with(Rational::zero);
        *e += &delta;
        if e.is_zero() {
            common.remove(b);
        }
        acc = next;
    }
}
