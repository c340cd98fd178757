//! The base field side of the story: exact arithmetic with finite Laurent
//! sums `sum c_k * pi^k` (rational `c_k`, rational exponents `k`) together
//! with the `pi`-adic valuation `v(pi) = 1`.
//!
//! Plain base fields live on the integer exponent lattice; a finite base
//! extension of degree `n` is modelled by letting exponents range over the
//! lattice `(1/n)Z` (so `pi^(1/n)` is the new uniformizer and `v` still
//! extends the original valuation). Inversion is exact for monomials; a
//! multi-term sum has no finite Laurent inverse, and `inv` says so rather
//! than truncating a series.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num::{BigInt, One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::{Q, Z};

/// Value of `v` on a field element: a rational, or infinity for zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(Q),
    Infinite,
}

impl Valuation {
    pub fn finite(q: Q) -> Self {
        Valuation::Finite(q)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    pub fn as_finite(&self) -> Option<&Q> {
        match self {
            Valuation::Finite(q) => Some(q),
            Valuation::Infinite => None,
        }
    }

    /// Finite value or a domain error naming the offending quantity.
    pub fn expect_finite(&self, what: &str) -> Result<Q> {
        match self {
            Valuation::Finite(q) => Ok(q.clone()),
            Valuation::Infinite => Err(Error::InvalidInput(format!(
                "{what} is zero, its valuation is infinite"
            ))),
        }
    }

    pub fn min(self, other: Valuation) -> Valuation {
        match (self, other) {
            (Valuation::Infinite, o) => o,
            (s, Valuation::Infinite) => s,
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a.min(b)),
        }
    }

    /// `v(xy) = v(x) + v(y)`; infinity absorbs.
    pub fn plus(&self, other: &Valuation) -> Valuation {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use Valuation::*;
        match (self, other) {
            (Infinite, Infinite) => std::cmp::Ordering::Equal,
            (Infinite, Finite(_)) => std::cmp::Ordering::Greater,
            (Finite(_), Infinite) => std::cmp::Ordering::Less,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(q) => write!(f, "{}", format_q(q)),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Finite Laurent sum in the uniformizer: a map from exponent to nonzero
/// rational coefficient. The zero element is the empty map.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct ValuedElement {
    terms: BTreeMap<Q, Q>,
}

impl ValuedElement {
    pub fn zero() -> Self {
        ValuedElement::default()
    }

    pub fn one() -> Self {
        ValuedElement::from_q(Q::one())
    }

    pub fn from_q(c: Q) -> Self {
        ValuedElement::monomial(c, Q::zero())
    }

    pub fn from_int(n: i64) -> Self {
        ValuedElement::from_q(crate::qi(n))
    }

    /// The uniformizer `pi` itself.
    pub fn pi() -> Self {
        ValuedElement::pi_pow(Q::one())
    }

    /// `pi^k` for rational `k`.
    pub fn pi_pow(k: Q) -> Self {
        ValuedElement::monomial(Q::one(), k)
    }

    /// `c * pi^k`; collapses to zero when `c = 0`.
    pub fn monomial(c: Q, k: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        ValuedElement { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Q::zero())
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Q, &Q)> {
        self.terms.iter()
    }

    /// `v(x)`: the smallest stored exponent, infinite for zero.
    pub fn valuation(&self) -> Valuation {
        match self.terms.keys().next() {
            Some(k) => Valuation::Finite(k.clone()),
            None => Valuation::Infinite,
        }
    }

    /// Coefficient of the lowest-order term, if any.
    pub fn leading_coeff(&self) -> Option<&Q> {
        self.terms.values().next()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// True when every exponent lies on the lattice `(1/n)Z`.
    pub fn on_lattice(&self, n: u32) -> bool {
        let n = Z::from(n);
        self.terms
            .keys()
            .all(|k| (k * &n).denom().is_one())
    }

    fn add_term(&mut self, k: Q, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(k) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// Exact inverse. Only monomials have finite Laurent inverses; anything
    /// else reports `NotInvertible` (and zero reports `DivisionByZero`).
    pub fn inv(&self) -> Result<ValuedElement> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.terms.len() != 1 {
            return Err(Error::NotInvertible(format!(
                "{self} has more than one term; invert at the rational-function level instead"
            )));
        }
        let (k, c) = self.terms.iter().next().unwrap();
        Ok(ValuedElement::monomial(c.recip(), -k))
    }

    pub fn checked_div(&self, rhs: &ValuedElement) -> Result<ValuedElement> {
        Ok(self * &rhs.inv()?)
    }

    /// Integer power; negative exponents go through `inv`.
    pub fn pow(&self, n: i64) -> Result<ValuedElement> {
        if n < 0 {
            return self.inv()?.pow(-n);
        }
        let mut acc = ValuedElement::one();
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    /// Multiply by a plain rational.
    pub fn scale(&self, c: &Q) -> ValuedElement {
        if c.is_zero() {
            return ValuedElement::zero();
        }
        ValuedElement {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .collect(),
        }
    }
}

impl Add for &ValuedElement {
    type Output = ValuedElement;
    fn add(self, rhs: &ValuedElement) -> ValuedElement {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

impl Sub for &ValuedElement {
    type Output = ValuedElement;
    fn sub(self, rhs: &ValuedElement) -> ValuedElement {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &ValuedElement {
    type Output = ValuedElement;
    fn neg(self) -> ValuedElement {
        ValuedElement {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl Mul for &ValuedElement {
    type Output = ValuedElement;
    fn mul(self, rhs: &ValuedElement) -> ValuedElement {
        let mut out = ValuedElement::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                out.add_term(ka + kb, ca * cb);
            }
        }
        out
    }
}

/// Canonical text form: terms by increasing exponent, rational coefficients
/// as `p` or `p/q`, the uniformizer spelled `pi`, rational exponents in
/// parentheses. Examples: `0`, `-64`, `2*pi + pi^2`, `-1 - 1/2*pi`,
/// `pi^(1/2)`.
impl fmt::Display for ValuedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            let neg = c.is_negative();
            let mag = c.abs();
            let body = term_body(&mag, k);
            if first {
                if neg {
                    write!(f, "-{body}")?;
                } else {
                    write!(f, "{body}")?;
                }
                first = false;
            } else if neg {
                write!(f, " - {body}")?;
            } else {
                write!(f, " + {body}")?;
            }
        }
        Ok(())
    }
}

fn term_body(mag: &Q, k: &Q) -> String {
    if k.is_zero() {
        return format_q(mag);
    }
    let pi_part = if k.is_one() {
        "pi".to_string()
    } else if k.denom().is_one() {
        format!("pi^{}", k.numer())
    } else {
        format!("pi^({})", format_q(k))
    };
    if mag.is_one() {
        pi_part
    } else {
        format!("{}*{}", format_q(mag), pi_part)
    }
}

impl FromStr for ValuedElement {
    type Err = Error;
    fn from_str(s: &str) -> Result<ValuedElement> {
        crate::expr::parse_valued_element(s)
    }
}

impl Serialize for ValuedElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ValuedElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Rational as compact text: `p` when the denominator is one, else `p/q`.
pub fn format_q(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Inverse of [`format_q`]; also accepts surrounding whitespace.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<Z> {
        BigInt::from_str(t.trim()).map_err(|_| Error::Parse(format!("bad integer `{t}`")))
    };
    match s.split_once('/') {
        None => Ok(Q::from(parse_int(s)?)),
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(Q::new(parse_int(p)?, den))
        }
    }
}

/// Residue characteristic of the valuation ring: zero or a prime `>= 5`.
/// Characteristics 2 and 3 are outside the supported range because the
/// minimality and short-form arguments divide by 2 and 3 freely.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueConfig {
    residue_char: u64,
}

impl ResidueConfig {
    pub fn new(p: u64) -> Result<Self> {
        if p == 0 {
            return Ok(ResidueConfig { residue_char: 0 });
        }
        if p == 2 || p == 3 {
            return Err(Error::ResidueCharUnsupported(p));
        }
        if !is_prime(p) {
            return Err(Error::InvalidInput(format!(
                "residue characteristic {p} is not 0 or prime"
            )));
        }
        Ok(ResidueConfig { residue_char: p })
    }

    pub fn char_zero() -> Self {
        ResidueConfig { residue_char: 0 }
    }

    pub fn residue_char(&self) -> u64 {
        self.residue_char
    }

    pub fn is_char_zero(&self) -> bool {
        self.residue_char == 0
    }

    /// Whether the residue characteristic divides `n`. Characteristic zero
    /// divides nothing (every "p does not divide n" hypothesis holds).
    pub fn divides(&self, n: u64) -> bool {
        self.residue_char != 0 && n % self.residue_char == 0
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}
