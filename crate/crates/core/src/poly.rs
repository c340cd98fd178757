//! Dense polynomials and ratios over the Laurent base field, with the
//! disk-valuation toolkit: Taylor shifts, Gauss valuations at a disk
//! (center, radius), and Newton-polygon root counting. Root counts are
//! taken in an algebraic closure with multiplicity, so divisor bookkeeping
//! works even when a derived quantity does not factor over the base field.
//!
//! Ratios are kept unreduced; the base coefficients form a domain without a
//! useful gcd, and every consumer (valuations, root counts, degree checks)
//! is insensitive to common factors.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::Signed;

use crate::error::{Error, Result};
use crate::valued::{format_q, Valuation, ValuedElement};
use crate::{qi, Q};

/// Dense polynomial in the coordinate `t`, coefficients in the base field.
/// Trailing zero coefficients are trimmed; zero is the empty vector.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    coeffs: Vec<ValuedElement>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(ValuedElement::one())
    }

    pub fn constant(c: ValuedElement) -> Self {
        Poly::from_coeffs(vec![c])
    }

    /// The coordinate `t`.
    pub fn x() -> Self {
        Poly::from_coeffs(vec![ValuedElement::zero(), ValuedElement::one()])
    }

    /// `t - root`.
    pub fn linear(root: &ValuedElement) -> Self {
        Poly::from_coeffs(vec![-root, ValuedElement::one()])
    }

    pub fn from_coeffs(mut coeffs: Vec<ValuedElement>) -> Self {
        while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> ValuedElement {
        self.coeffs.get(i).cloned().unwrap_or_else(ValuedElement::zero)
    }

    pub fn coeffs(&self) -> &[ValuedElement] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&ValuedElement> {
        self.coeffs.last()
    }

    pub fn scale(&self, c: &ValuedElement) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, mut n: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `p(t + a)`, computed by Horner over the shifted variable.
    pub fn taylor_shift(&self, a: &ValuedElement) -> Poly {
        let mut out = Poly::zero();
        let shift = Poly::from_coeffs(vec![a.clone(), ValuedElement::one()]);
        for c in self.coeffs.iter().rev() {
            out = &(&out * &shift) + &Poly::constant(c.clone());
        }
        out
    }

    /// `(index, v(coefficient))` pairs of `p(t + center)`, nonzero terms only.
    fn shifted_points(&self, center: &ValuedElement) -> Vec<(usize, Q)> {
        self.taylor_shift(center)
            .coeffs
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.valuation().as_finite().cloned().map(|v| (i, v)))
            .collect()
    }

    /// Gauss valuation on the disk `v(t - center) >= r`:
    /// `min_i v(c_i) + i*r` over the expansion around the center.
    pub fn gauss_valuation(&self, center: &ValuedElement, r: &Q) -> Valuation {
        let pts = self.shifted_points(center);
        pts.into_iter()
            .map(|(i, v)| Valuation::Finite(v + qi(i as i64) * r))
            .fold(Valuation::Infinite, Valuation::min)
    }

    /// Number of roots `xi` (algebraic closure, with multiplicity) with
    /// `v(xi - center) >= r`: the largest index attaining the Gauss minimum.
    pub fn roots_with_valuation_ge(&self, center: &ValuedElement, r: &Q) -> usize {
        self.extreme_attaining(center, r).map(|(_, hi)| hi).unwrap_or(0)
    }

    /// Number of roots with `v(xi - center) > r`: the smallest attaining index.
    pub fn roots_with_valuation_gt(&self, center: &ValuedElement, r: &Q) -> usize {
        self.extreme_attaining(center, r).map(|(lo, _)| lo).unwrap_or(0)
    }

    fn extreme_attaining(&self, center: &ValuedElement, r: &Q) -> Option<(usize, usize)> {
        let pts = self.shifted_points(center);
        let mut best: Option<(Q, usize, usize)> = None;
        for (i, v) in pts {
            let val = v + qi(i as i64) * r;
            match &mut best {
                None => best = Some((val, i, i)),
                Some((b, lo, hi)) => {
                    if val < *b {
                        *b = val;
                        *lo = i;
                        *hi = i;
                    } else if val == *b {
                        *hi = i;
                    }
                }
            }
        }
        best.map(|(_, lo, hi)| (lo, hi))
    }

    /// Radii where the Gauss valuation along the center line changes slope,
    /// i.e. the negated slopes of the Newton polygon of `p(t + center)`.
    /// Sorted ascending, deduplicated.
    pub fn newton_breakpoints(&self, center: &ValuedElement) -> Vec<Q> {
        let pts = self.shifted_points(center);
        if pts.len() < 2 {
            return Vec::new();
        }
        // Lower convex hull over (i, v_i), i increasing.
        let mut hull: Vec<(usize, Q)> = Vec::new();
        for (i, v) in pts {
            while hull.len() >= 2 {
                let (x1, y1) = hull[hull.len() - 2].clone();
                let (x2, y2) = hull[hull.len() - 1].clone();
                // Keep the hull lower-convex: drop the middle point when it
                // lies on or above the segment (x1,y1)-(i,v).
                let lhs = (&y2 - &y1) * qi((i - x1) as i64);
                let rhs = (&v - &y1) * qi((x2 - x1) as i64);
                if lhs >= rhs {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push((i, v));
        }
        let mut out: Vec<Q> = hull
            .windows(2)
            .map(|w| {
                let (x1, y1) = &w[0];
                let (x2, y2) = &w[1];
                // Both endpoints attain the minimum at r = -(slope).
                (y1 - y2) / qi((*x2 - *x1) as i64)
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(&self.coeff(i) + &rhs.coeff(i));
        }
        Poly::from_coeffs(out)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ValuedElement::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::from_coeffs(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (neg, mag) = if c.num_terms() == 1 {
                let lead = c.leading_coeff().unwrap();
                if lead.is_negative() {
                    (true, -c)
                } else {
                    (false, c.clone())
                }
            } else {
                (false, c.clone())
            };
            let coeff_str = if mag.num_terms() > 1 {
                format!("({mag})")
            } else {
                mag.to_string()
            };
            let body = if i == 0 {
                coeff_str
            } else {
                let t = if i == 1 { "t".to_string() } else { format!("t^{i}") };
                if mag.is_one() {
                    t
                } else {
                    format!("{coeff_str}*{t}")
                }
            };
            if first {
                write!(f, "{}{}", if neg { "-" } else { "" }, body)?;
                first = false;
            } else {
                write!(f, " {} {}", if neg { "-" } else { "+" }, body)?;
            }
        }
        Ok(())
    }
}

/// Element of the rational function field over the base: an unreduced
/// fraction of polynomials with nonzero denominator.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RationalFunction {
                num: Poly::zero(),
                den: Poly::one(),
            });
        }
        Ok(RationalFunction { num, den })
    }

    pub fn from_poly(p: Poly) -> Self {
        RationalFunction {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn constant(c: ValuedElement) -> Self {
        RationalFunction::from_poly(Poly::constant(c))
    }

    pub fn from_int(n: i64) -> Self {
        RationalFunction::constant(ValuedElement::from_int(n))
    }

    pub fn zero() -> Self {
        RationalFunction::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        RationalFunction::from_poly(Poly::one())
    }

    pub fn x() -> Self {
        RationalFunction::from_poly(Poly::x())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `Ok(Some(c))` when the fraction is a constant of the base field;
    /// `Ok(None)` when it genuinely involves `t`. A constant denominator
    /// that is not a monomial has no finite Laurent inverse and errors.
    pub fn as_constant(&self) -> Result<Option<ValuedElement>> {
        if self.is_zero() {
            return Ok(Some(ValuedElement::zero()));
        }
        if self.num.degree() == Some(0) && self.den.degree() == Some(0) {
            let c = self.num.coeff(0).checked_div(&self.den.coeff(0))?;
            Ok(Some(c))
        } else {
            Ok(None)
        }
    }

    pub fn inv(&self) -> Result<RationalFunction> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RationalFunction {
            num: self.den.clone(),
            den: self.num.clone(),
        })
    }

    pub fn checked_div(&self, rhs: &RationalFunction) -> Result<RationalFunction> {
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, n: i64) -> Result<RationalFunction> {
        if n < 0 {
            return self.inv()?.pow(-n);
        }
        Ok(RationalFunction {
            num: self.num.pow(n as u32),
            den: self.den.pow(n as u32),
        })
    }

    pub fn scale(&self, c: &ValuedElement) -> RationalFunction {
        RationalFunction::new(self.num.scale(c), self.den.clone()).expect("den unchanged")
    }

    /// Gauss valuation of the fraction at a disk; infinite iff zero.
    pub fn gauss_valuation(&self, center: &ValuedElement, r: &Q) -> Valuation {
        match (
            self.num.gauss_valuation(center, r),
            self.den.gauss_valuation(center, r),
        ) {
            (Valuation::Infinite, _) => Valuation::Infinite,
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a - b),
            (_, Valuation::Infinite) => unreachable!("nonzero denominator"),
        }
    }

    /// Net number of zeros minus poles `xi` with `v(xi - center) >= r`.
    pub fn zeros_minus_poles_ge(&self, center: &ValuedElement, r: &Q) -> i64 {
        self.num.roots_with_valuation_ge(center, r) as i64
            - self.den.roots_with_valuation_ge(center, r) as i64
    }

    /// Net number of zeros minus poles with `v(xi - center) > r`.
    pub fn zeros_minus_poles_gt(&self, center: &ValuedElement, r: &Q) -> i64 {
        self.num.roots_with_valuation_gt(center, r) as i64
            - self.den.roots_with_valuation_gt(center, r) as i64
    }

    /// Order of the pole at infinity (negative for a zero): deg num - deg den.
    pub fn infinity_pole_order(&self) -> i64 {
        match (self.num.degree(), self.den.degree()) {
            (Some(a), Some(b)) => a as i64 - b as i64,
            _ => 0,
        }
    }
}

impl PartialEq for RationalFunction {
    fn eq(&self, other: &Self) -> bool {
        // shared denominator: compare numerators, skip the cross product
        if self.den == other.den {
            return self.num == other.num;
        }
        &self.num * &other.den == &other.num * &self.den
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        // keep a shared denominator instead of squaring it; sums of terms
        // built over a common scale would otherwise grow geometrically
        if self.den == rhs.den {
            return RationalFunction {
                num: &self.num + &rhs.num,
                den: self.den.clone(),
            };
        }
        RationalFunction::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
        .expect("nonzero denominators")
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction::new(&self.num * &rhs.num, &self.den * &rhs.den)
            .expect("nonzero denominators")
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) && self.den.coeff(0).is_one() {
            return write!(f, "{}", self.num);
        }
        // Flip signs so the denominator's leading term reads positively.
        let flip = self
            .den
            .leading()
            .and_then(|c| c.leading_coeff())
            .map(|q| q.is_negative())
            .unwrap_or(false);
        let (num, den) = if flip {
            (-&self.num, -&self.den)
        } else {
            (self.num.clone(), self.den.clone())
        };
        write!(f, "({})/({})", num, den)
    }
}

/// Compact display for a disk: `(center; r)`.
pub(crate) fn disk_label(center: &ValuedElement, r: &Q) -> String {
    format!("({}; {})", center, format_q(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qr;

    fn pi() -> ValuedElement {
        ValuedElement::pi()
    }

    #[test]
    fn taylor_shift_expands_binomials() {
        // (t)^2 shifted by 1: t^2 + 2t + 1
        let p = Poly::x().pow(2);
        let q = p.taylor_shift(&ValuedElement::one());
        assert_eq!(
            q,
            Poly::from_coeffs(vec![
                ValuedElement::one(),
                ValuedElement::from_int(2),
                ValuedElement::one(),
            ])
        );
    }

    #[test]
    fn gauss_valuation_of_scaled_linear_factor() {
        // f = pi*(t - pi) on the disk (0; 2): v = 1 + min(1, 2) = 2
        let f = Poly::linear(&pi()).scale(&pi());
        assert_eq!(
            f.gauss_valuation(&ValuedElement::zero(), &qi(2)),
            Valuation::Finite(qi(2))
        );
        // and on (0; 0): 1 + min(1, 0) = 1
        assert_eq!(
            f.gauss_valuation(&ValuedElement::zero(), &qi(0)),
            Valuation::Finite(qi(1))
        );
    }

    #[test]
    fn gauss_valuation_is_multiplicative() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..60 {
            let rand_poly = |rng: &mut rand::rngs::StdRng| {
                let d = rng.gen_range(0..4);
                let coeffs: Vec<ValuedElement> = (0..=d)
                    .map(|_| {
                        if rng.gen_bool(0.2) {
                            ValuedElement::zero()
                        } else {
                            ValuedElement::monomial(
                                qi(rng.gen_range(-5..=5)),
                                qi(rng.gen_range(-2..=2)),
                            )
                        }
                    })
                    .collect();
                Poly::from_coeffs(coeffs)
            };
            let a = rand_poly(&mut rng);
            let b = rand_poly(&mut rng);
            let center = ValuedElement::monomial(qi(rng.gen_range(-3..=3)), qi(rng.gen_range(0..=2)));
            let r = qi(rng.gen_range(0..=3));
            let va = a.gauss_valuation(&center, &r);
            let vb = b.gauss_valuation(&center, &r);
            let vab = (&a * &b).gauss_valuation(&center, &r);
            assert_eq!(vab, va.plus(&vb));
        }
    }

    #[test]
    fn newton_root_counts() {
        // q = t*(t - pi): roots 0 (v infinite) and pi (v = 1)
        let q = &Poly::x() * &Poly::linear(&pi());
        let zero = ValuedElement::zero();
        assert_eq!(q.roots_with_valuation_ge(&zero, &qi(1)), 2);
        assert_eq!(q.roots_with_valuation_gt(&zero, &qi(1)), 1);
        assert_eq!(q.roots_with_valuation_ge(&zero, &qi(2)), 1);
        assert_eq!(q.roots_with_valuation_ge(&zero, &qi(0)), 2);
        // seen from center 1 both roots have v = 0
        assert_eq!(q.roots_with_valuation_ge(&ValuedElement::one(), &qi(0)), 2);
        assert_eq!(q.roots_with_valuation_gt(&ValuedElement::one(), &qi(0)), 0);
    }

    #[test]
    fn newton_breakpoints_locate_roots() {
        // (t - pi)*(t - pi^3): kinks at radii 1 and 3 on the center-0 line
        let q = &Poly::linear(&pi()) * &Poly::linear(&ValuedElement::pi_pow(qi(3)));
        assert_eq!(q.newton_breakpoints(&ValuedElement::zero()), vec![qi(1), qi(3)]);
        // a root at fractional radius shows up as a fractional breakpoint
        let f = Poly::from_coeffs(vec![pi(), ValuedElement::one(), ValuedElement::zero(), ValuedElement::one()]);
        // t^3 + t + pi: newton polygon (0,1),(1,0),(3,0): slopes -1, 0
        assert_eq!(f.newton_breakpoints(&ValuedElement::zero()), vec![qi(0), qi(1)]);
    }

    #[test]
    fn rational_function_arithmetic() {
        let x = RationalFunction::x();
        let one = RationalFunction::one();
        // 1/(x - 1) + 1 = x/(x - 1)
        let f = &one.checked_div(&(&x - &one)).unwrap() + &one;
        let g = x.checked_div(&(&x - &one)).unwrap();
        assert_eq!(f, g);
        assert!((&f - &g).is_zero());
        let half = RationalFunction::constant(ValuedElement::from_q(qr(1, 2)));
        assert_eq!((&half * &RationalFunction::from_int(2)), one);
    }

    #[test]
    fn display_forms() {
        let p = Poly::from_coeffs(vec![
            ValuedElement::from_int(64),
            ValuedElement::from_int(-864),
        ]);
        assert_eq!(p.to_string(), "-864*t + 64");
        let f = RationalFunction::new(Poly::constant(ValuedElement::from_int(-16)), p).unwrap();
        assert_eq!(f.to_string(), "(16)/(864*t - 64)");
    }
}
