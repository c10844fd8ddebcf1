//! Sparse multivariate polynomials with integer coefficients.
//!
//! A term is `c · x^m · atom`, where the atom collects the transcendental and
//! radical parts of the term: an optional `exp(E)` and a list of fractional
//! powers `B^r` with `0 < r < 1`. Exact division is only attempted by pure
//! divisors (no atoms), splitting the dividend by atom.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rf::Rf;
use super::{Expr, Rational};

pub(crate) type Int = BigInt;

/// Exponent vector with trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub(crate) struct Mono(Vec<u32>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn var(i: usize, k: u32) -> Self {
        if k == 0 {
            return Mono::one();
        }
        let mut v = vec![0; i + 1];
        v[i] = k;
        Mono(v)
    }

    fn trimmed(mut v: Vec<u32>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        Mono(v)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k))
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let n = self.0.len().max(other.0.len());
        let v = (0..n).map(|i| self.exponent(i) + other.exponent(i)).collect();
        Mono(v)
    }

    /// `self | other`
    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().enumerate().all(|(i, &k)| k <= other.exponent(i))
    }

    /// `self / other`, assuming `other | self`.
    pub fn div(&self, other: &Mono) -> Mono {
        let v = self.0.iter().enumerate().map(|(i, &k)| k - other.exponent(i)).collect();
        Mono::trimmed(v)
    }

    pub fn gcd(&self, other: &Mono) -> Mono {
        let n = self.0.len().min(other.0.len());
        Mono::trimmed((0..n).map(|i| self.0[i].min(other.0[i])).collect())
    }

    fn derivative(&self, v: usize) -> Option<(u32, Mono)> {
        let k = self.exponent(v);
        if k == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[v] -= 1;
        Some((k, Mono::trimmed(e)))
    }
}

/// Graded by total degree; within a degree, `x^4 < y^4` (reverse lexicographic
/// on the exponent vector). Compatible with multiplication.
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A factor base: an integer, a coordinate variable, or a primitive polynomial
/// with at least two terms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub(crate) enum Base {
    Int(Int),
    Var(usize),
    Poly(Arc<Poly>),
}

impl Base {
    pub fn to_poly(&self) -> Poly {
        match self {
            Base::Int(k) => Poly::constant(k.clone()),
            Base::Var(i) => Poly::term(Mono::var(*i, 1), Atom::default(), Int::one()),
            Base::Poly(p) => (**p).clone(),
        }
    }

    pub fn is_pure_poly(&self) -> Option<&Arc<Poly>> {
        match self {
            Base::Poly(p) if p.is_pure() => Some(p),
            _ => None,
        }
    }

    pub fn diff(&self, v: usize) -> Rf {
        match self {
            Base::Int(_) => Rf::zero(),
            Base::Var(i) if *i == v => Rf::one(),
            Base::Var(_) => Rf::zero(),
            Base::Poly(p) => p.diff(v),
        }
    }
}

/// Non-polynomial part of a term.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub(crate) struct Atom {
    pub exp: Option<Arc<Expr>>,
    /// Sorted by base; every exponent lies strictly between 0 and 1.
    pub radicals: Vec<(Base, Rational)>,
}

impl Atom {
    pub fn is_trivial(&self) -> bool {
        self.exp.is_none() && self.radicals.is_empty()
    }

    /// Product of two atoms. Radical exponents that reach 1 spill their base
    /// into the returned list, to be multiplied back in as a polynomial.
    fn mul(&self, other: &Atom) -> (Atom, Vec<Base>) {
        if other.is_trivial() {
            return (self.clone(), Vec::new());
        }
        if self.is_trivial() {
            return (other.clone(), Vec::new());
        }
        let exp = match (&self.exp, &other.exp) {
            (None, e) | (e, None) => e.clone(),
            (Some(a), Some(b)) => add_exponents(a, b),
        };
        let mut merged: BTreeMap<Base, Rational> = BTreeMap::new();
        for (b, r) in self.radicals.iter().chain(other.radicals.iter()) {
            *merged.entry(b.clone()).or_insert_with(Rational::zero) += r;
        }
        let mut spill = Vec::new();
        let mut radicals = Vec::new();
        for (b, mut r) in merged {
            if r >= Rational::one() {
                r -= Rational::one();
                spill.push(b.clone());
            }
            if !r.is_zero() {
                radicals.push((b, r));
            }
        }
        (Atom { exp, radicals }, spill)
    }
}

/// `exp(a)·exp(b) = exp(a + b)`; `None` when the sum cancels.
pub(crate) fn add_exponents(a: &Expr, b: &Expr) -> Option<Arc<Expr>> {
    let s = Rf::sum(vec![Rf::from_canonical(a), Rf::from_canonical(b)]);
    if s.is_zero() {
        None
    } else {
        Some(Arc::new(s.to_expr()))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub(crate) struct Poly {
    pub terms: BTreeMap<(Mono, Atom), Int>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Int) -> Self {
        Poly::term(Mono::one(), Atom::default(), c)
    }

    pub fn term(m: Mono, a: Atom, c: Int) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, a, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_pure(&self) -> bool {
        self.terms.keys().all(|(_, a)| a.is_trivial())
    }

    pub fn add_term(&mut self, m: Mono, a: Atom, c: Int) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((m, a)) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for ((m, a), c) in &other.terms {
            self.add_term(m.clone(), a.clone(), c.clone());
        }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        if self.is_zero() || other.is_zero() {
            return out;
        }
        let pure = self.is_pure() && other.is_pure();
        for ((m1, a1), c1) in &self.terms {
            for ((m2, a2), c2) in &other.terms {
                let m = m1.mul(m2);
                let c = c1 * c2;
                if pure {
                    out.add_term(m, Atom::default(), c);
                    continue;
                }
                let (a, spill) = a1.mul(a2);
                if spill.is_empty() {
                    out.add_term(m, a, c);
                } else {
                    let mut t = Poly::term(m, a, c);
                    for b in spill {
                        t = t.mul(&b.to_poly());
                    }
                    out.add_assign(&t);
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut result = Poly::constant(Int::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Positive gcd of the coefficients.
    pub fn content(&self) -> Int {
        let mut g = Int::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn mono_gcd(&self) -> Mono {
        let mut it = self.terms.keys();
        let Some((first, _)) = it.next() else {
            return Mono::one();
        };
        let mut g = first.clone();
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    pub fn div_int(&self, k: &Int) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(key, c)| (key.clone(), c / k)).collect(),
        }
    }

    pub fn div_mono(&self, d: &Mono) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|((m, a), c)| ((m.div(d), a.clone()), c.clone()))
                .collect(),
        }
    }

    pub fn map_atoms(&self, f: impl Fn(&Atom) -> Atom) -> Poly {
        let mut out = Poly::zero();
        for ((m, a), c) in &self.terms {
            out.add_term(m.clone(), f(a), c.clone());
        }
        out
    }

    fn max_degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = Vec::new();
        for (m, _) in self.terms.keys() {
            if m.0.len() > d.len() {
                d.resize(m.0.len(), 0);
            }
            for (i, &k) in m.0.iter().enumerate() {
                d[i] = d[i].max(k);
            }
        }
        d
    }

    /// Exact quotient `self / d` for a pure divisor `d`, or `None` when `d`
    /// does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        debug_assert!(d.is_pure() && !d.is_zero());
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if self.is_pure() {
            return pure_div(self, d);
        }
        let mut parts: BTreeMap<Atom, Poly> = BTreeMap::new();
        for ((m, a), c) in &self.terms {
            parts
                .entry(a.clone())
                .or_default()
                .add_term(m.clone(), Atom::default(), c.clone());
        }
        let mut out = Poly::zero();
        for (a, part) in parts {
            let q = pure_div(&part, d)?;
            for ((m, _), c) in q.terms {
                out.add_term(m, a.clone(), c);
            }
        }
        Some(out)
    }

    pub fn leading(&self) -> Option<(&Mono, &Int)> {
        self.terms.iter().next_back().map(|((m, _), c)| (m, c))
    }

    pub fn trailing(&self) -> Option<(&Mono, &Int)> {
        self.terms.iter().next().map(|((m, _), c)| (m, c))
    }

    /// Derivative as a rational function (radical and exponential atoms do
    /// not stay polynomial under differentiation).
    pub fn diff(&self, v: usize) -> Rf {
        if self.is_pure() {
            let mut out = Poly::zero();
            for ((m, _), c) in &self.terms {
                if let Some((k, dm)) = m.derivative(v) {
                    out.add_term(dm, Atom::default(), c * Int::from(k));
                }
            }
            return Rf::from_poly(out, &[]);
        }
        let parts = self
            .terms
            .iter()
            .map(|((m, a), c)| Rf::from_term(m, a, c).diff(v))
            .collect();
        Rf::sum(parts)
    }

    /// Sign so that the first term in the canonical order is positive.
    pub fn leading_sign_is_negative(&self) -> bool {
        self.trailing().map(|(_, c)| c.is_negative()).unwrap_or(false)
    }
}

fn pure_div(p: &Poly, d: &Poly) -> Option<Poly> {
    if p.is_zero() {
        return Some(Poly::zero());
    }
    let (dm, dc) = d.leading().map(|(m, c)| (m.clone(), c.clone()))?;
    let (tm, _) = d.trailing()?;
    let (pm, _) = p.trailing()?;
    if !tm.divides(pm) {
        return None;
    }
    let (plm, _) = p.leading()?;
    if !dm.divides(plm) {
        return None;
    }
    let pd = p.max_degrees();
    let dd = d.max_degrees();
    if dd.len() > pd.len() || dd.iter().zip(pd.iter()).any(|(a, b)| a > b) {
        return None;
    }
    let mut r = p.clone();
    let mut q = Poly::zero();
    while let Some((m, c)) = r.leading().map(|(m, c)| (m.clone(), c.clone())) {
        if !dm.divides(&m) {
            return None;
        }
        let (qc, rem) = c.div_rem(&dc);
        if !rem.is_zero() {
            return None;
        }
        let qm = m.div(&dm);
        for ((m2, _), c2) in &d.terms {
            r.add_term(qm.mul(m2), Atom::default(), -(&qc * c2));
        }
        q.add_term(qm, Atom::default(), qc);
    }
    Some(q)
}
