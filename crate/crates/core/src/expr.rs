//! Expression parser for base-field elements and rational functions in `t`.
//!
//! One grammar, three lowerings: a base-field constant (no `t`), a rational
//! function, or a factored function (product of linear factors with a
//! content scalar, for functions whose zero/pole loci are known exactly).
//!
//! Syntax: rationals (`3`, `-1/2`), `pi`, `t`, `+ - * / ^`, parentheses.
//! A rational written tightly (`p/q`, no whitespace around the slash) is a
//! single literal; `/` is division otherwise. Exponents are integers or
//! tight rationals, optionally negated or parenthesized: `pi^-1`,
//! `pi^(1/2)`, `t^3`. Fractional exponents apply only to powers of `pi`
//! with unit coefficient.

use num::ToPrimitive;

use crate::error::{Error, Result};
use crate::poly::RationalFunction;
use crate::skeleton::FactoredFunction;
use crate::valued::ValuedElement;
use crate::{qi, Q, Z};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Pi,
    T,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let p: Z = s[start..i].parse().expect("digits");
                // Tight rational literal: digits '/' digits with no space.
                if i + 1 < bytes.len() && bytes[i] == b'/' && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                    let dstart = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let q: Z = s[dstart..i].parse().expect("digits");
                    if num::Zero::is_zero(&q) {
                        return Err(Error::Parse("division by zero in rational literal".into()));
                    }
                    out.push(Tok::Num(Q::new(p, q)));
                } else {
                    out.push(Tok::Num(Q::from(p)));
                }
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                    i += 1;
                }
                match &s[start..i] {
                    "pi" => out.push(Tok::Pi),
                    "t" => out.push(Tok::T),
                    w => return Err(Error::Parse(format!("unknown identifier '{w}'"))),
                }
            }
            _ => return Err(Error::Parse(format!("unexpected character '{c}'"))),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Expr {
    Num(Q),
    Pi,
    T,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Q),
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<()> {
        match self.next() {
            Some(ref got) if got == t => Ok(()),
            other => Err(Error::Parse(format!("expected {what}, found {other:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.next();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.next();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.next();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Tok::Minus) = self.peek() {
            self.next();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.next();
            let e = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Q> {
        match self.next() {
            Some(Tok::Num(q)) => Ok(q),
            Some(Tok::Minus) => match self.next() {
                Some(Tok::Num(q)) => Ok(-q),
                other => Err(Error::Parse(format!("expected number after '^-', found {other:?}"))),
            },
            Some(Tok::LParen) => {
                let neg = if let Some(Tok::Minus) = self.peek() {
                    self.next();
                    true
                } else {
                    false
                };
                let q = match self.next() {
                    Some(Tok::Num(q)) => q,
                    other => {
                        return Err(Error::Parse(format!(
                            "expected number in exponent, found {other:?}"
                        )))
                    }
                };
                self.expect(&Tok::RParen, "')' closing exponent")?;
                Ok(if neg { -q } else { q })
            }
            other => Err(Error::Parse(format!("expected exponent, found {other:?}"))),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Num(q)) => Ok(Expr::Num(q)),
            Some(Tok::Pi) => Ok(Expr::Pi),
            Some(Tok::T) => Ok(Expr::T),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(e)
            }
            other => Err(Error::Parse(format!("expected a value, found {other:?}"))),
        }
    }
}

fn parse(s: &str) -> Result<Expr> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!(
            "trailing input at token {:?}",
            p.toks[p.pos]
        )));
    }
    Ok(e)
}

fn contains_t(e: &Expr) -> bool {
    match e {
        Expr::T => true,
        Expr::Num(_) | Expr::Pi => false,
        Expr::Neg(a) | Expr::Pow(a, _) => contains_t(a),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            contains_t(a) || contains_t(b)
        }
    }
}

fn exp_to_i64(q: &Q, what: &str) -> Result<i64> {
    if !q.is_integer() {
        return Err(Error::Parse(format!("{what} requires an integer exponent, got {q}")));
    }
    q.to_integer()
        .to_i64()
        .ok_or_else(|| Error::InvalidInput("exponent out of range".into()))
}

fn eval_element(e: &Expr) -> Result<ValuedElement> {
    match e {
        Expr::Num(q) => Ok(ValuedElement::from_q(q.clone())),
        Expr::Pi => Ok(ValuedElement::pi()),
        Expr::T => Err(Error::Parse(
            "'t' is not a base-field element; parse as a function instead".into(),
        )),
        Expr::Neg(a) => Ok(-&eval_element(a)?),
        Expr::Add(a, b) => Ok(&eval_element(a)? + &eval_element(b)?),
        Expr::Sub(a, b) => Ok(&eval_element(a)? - &eval_element(b)?),
        Expr::Mul(a, b) => Ok(&eval_element(a)? * &eval_element(b)?),
        Expr::Div(a, b) => eval_element(a)?.checked_div(&eval_element(b)?),
        Expr::Pow(a, q) => {
            let base = eval_element(a)?;
            if q.is_integer() {
                base.pow(exp_to_i64(q, "power")?)
            } else {
                fractional_pi_power(&base, q)
            }
        }
    }
}

/// `(pi^k)^q` for rational `q`; any other base is rejected.
fn fractional_pi_power(base: &ValuedElement, q: &Q) -> Result<ValuedElement> {
    if base.is_monomial() && base.leading_coeff() == Some(&qi(1)) {
        let k = base
            .valuation()
            .expect_finite("fractional power of a nonzero monomial")?;
        Ok(ValuedElement::pi_pow(k * q))
    } else {
        Err(Error::Parse(format!(
            "fractional exponent {q} only applies to unit powers of pi"
        )))
    }
}

fn eval_rational(e: &Expr) -> Result<RationalFunction> {
    match e {
        Expr::Num(q) => Ok(RationalFunction::constant(ValuedElement::from_q(q.clone()))),
        Expr::Pi => Ok(RationalFunction::constant(ValuedElement::pi())),
        Expr::T => Ok(RationalFunction::x()),
        Expr::Neg(a) => Ok(-&eval_rational(a)?),
        Expr::Add(a, b) => Ok(&eval_rational(a)? + &eval_rational(b)?),
        Expr::Sub(a, b) => Ok(&eval_rational(a)? - &eval_rational(b)?),
        Expr::Mul(a, b) => Ok(&eval_rational(a)? * &eval_rational(b)?),
        Expr::Div(a, b) => eval_rational(a)?.checked_div(&eval_rational(b)?),
        Expr::Pow(a, q) => {
            if q.is_integer() {
                eval_rational(a)?.pow(exp_to_i64(q, "power")?)
            } else {
                let base = eval_rational(a)?.as_constant()?.ok_or_else(|| {
                    Error::Parse(format!("fractional exponent {q} on a non-constant"))
                })?;
                Ok(RationalFunction::constant(fractional_pi_power(&base, q)?))
            }
        }
    }
}

fn eval_factored(e: &Expr) -> Result<FactoredFunction> {
    if !contains_t(e) {
        return FactoredFunction::constant(eval_element(e)?);
    }
    match e {
        Expr::Mul(a, b) => Ok(&eval_factored(a)? * &eval_factored(b)?),
        Expr::Div(a, b) => eval_factored(a)?.checked_div(&eval_factored(b)?),
        Expr::Pow(a, q) => eval_factored(a)?.pow(exp_to_i64(q, "factored power")?),
        Expr::Neg(a) => Ok(eval_factored(a)?.scale(&ValuedElement::from_int(-1))?),
        other => linear_factor(other),
    }
}

/// A `t`-dependent leaf of a factored expression must reduce to a linear
/// polynomial `c1*t + c0` over a constant denominator; it contributes the
/// content `c1/d` and the root `-c0/c1`.
fn linear_factor(e: &Expr) -> Result<FactoredFunction> {
    let rf = eval_rational(e)?;
    let d = match rf.den().degree() {
        Some(0) => rf.den().coeff(0),
        _ => {
            return Err(Error::Parse(
                "factored form needs linear factors, not a true quotient".into(),
            ))
        }
    };
    match rf.num().degree() {
        Some(1) => {
            let c1 = rf.num().coeff(1);
            let c0 = rf.num().coeff(0);
            let root = -&c0.checked_div(&c1)?;
            let content = c1.checked_div(&d)?;
            let f = FactoredFunction::from_root(root);
            f.scale(&content)
        }
        Some(0) => FactoredFunction::constant(rf.num().coeff(0).checked_div(&d)?),
        _ => Err(Error::Parse(format!(
            "expected a linear factor in t, got degree {:?}",
            rf.num().degree()
        ))),
    }
}

/// Parse a base-field element: rationals, `pi`, arithmetic, powers. `t` is
/// rejected.
pub fn parse_valued_element(s: &str) -> Result<ValuedElement> {
    eval_element(&parse(s)?)
}

/// Parse a rational function in `t` over the base field.
pub fn parse_rational_function(s: &str) -> Result<RationalFunction> {
    eval_rational(&parse(s)?)
}

/// Parse a function given in factored form: a product or quotient of
/// powers of linear factors and a nonzero constant.
pub fn parse_factored_function(s: &str) -> Result<FactoredFunction> {
    eval_factored(&parse(s)?)
}
