//! Mod-N matrix bookkeeping attached to the classification: SL₂ subgroup
//! closures, transvections and their fixed lines, inertia orders along
//! subdivided edges, fiber-count predictions over classified edges, the
//! Tate parameter valuation, and the first division polynomials.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num::integer::gcd;
use num::Signed;

use crate::error::{Error, Result};
use crate::laplacian::{edge_slope_abs, LaplacianFunction, SubgraphSelection};
use crate::poly::RationalFunction;
use crate::reduction::{classify, ReductionType};
use crate::skeleton::SkeletonTree;
use crate::valued::{is_prime, ResidueConfig, ValuedElement};
use crate::weierstrass::{short_form_transform, vertical_profile, WeierstrassEquation};
use crate::{qi, Q};

/// Inverse of `a` mod prime `p`, `a ≢ 0`.
fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i128, (a % p) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "inverse requires a unit");
    s0.rem_euclid(p as i128) as u64
}

/// 2×2 matrix over ℤ/N with determinant 1, entries row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Sl2Matrix {
    n: u64,
    e: [u64; 4],
}

impl Sl2Matrix {
    pub fn new(n: u64, entries: [i64; 4]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("matrix modulus must be at least 2".into()));
        }
        let m = n as i128;
        let e: Vec<u64> = entries.iter().map(|&x| (x as i128).rem_euclid(m) as u64).collect();
        let e = [e[0], e[1], e[2], e[3]];
        let det = (e[0] as u128 * e[3] as u128 + (n as u128) * (n as u128)
            - e[1] as u128 * e[2] as u128)
            % n as u128;
        if det != 1 % n as u128 {
            return Err(Error::InvalidInput(format!(
                "matrix determinant is {det}, not 1, mod {n}"
            )));
        }
        Ok(Sl2Matrix { n, e })
    }

    pub fn identity(n: u64) -> Result<Self> {
        Sl2Matrix::new(n, [1, 0, 0, 1])
    }

    /// Parse `"a,b,c,d"` for a given modulus.
    pub fn parse(s: &str, n: u64) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("expected four entries 'a,b,c,d', got '{s}'")));
        }
        let mut entries = [0i64; 4];
        for (i, p) in parts.iter().enumerate() {
            entries[i] = p
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad matrix entry '{p}'")))?;
        }
        Sl2Matrix::new(n, entries)
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    /// Row-major `[a, b, c, d]`.
    pub fn entries(&self) -> [u64; 4] {
        self.e
    }

    pub fn mul(&self, rhs: &Sl2Matrix) -> Sl2Matrix {
        assert_eq!(self.n, rhs.n, "matrix moduli must agree");
        let n = self.n as u128;
        let a = |i: usize| self.e[i] as u128;
        let b = |i: usize| rhs.e[i] as u128;
        let e = [
            ((a(0) * b(0) + a(1) * b(2)) % n) as u64,
            ((a(0) * b(1) + a(1) * b(3)) % n) as u64,
            ((a(2) * b(0) + a(3) * b(2)) % n) as u64,
            ((a(2) * b(1) + a(3) * b(3)) % n) as u64,
        ];
        Sl2Matrix { n: self.n, e }
    }

    pub fn inverse(&self) -> Sl2Matrix {
        let n = self.n;
        let [a, b, c, d] = self.e;
        Sl2Matrix { n, e: [d, (n - b % n) % n, (n - c % n) % n, a] }
    }

    pub fn pow(&self, mut k: u64) -> Sl2Matrix {
        let mut base = *self;
        let mut acc = Sl2Matrix { n: self.n, e: [1, 0, 0, 1] };
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    pub fn trace(&self) -> u64 {
        (self.e[0] + self.e[3]) % self.n
    }

    pub fn is_identity(&self) -> bool {
        self.e == [1 % self.n, 0, 0, 1 % self.n]
    }

    /// True iff the matrix is unipotent of rank-one defect: `M ≠ I`,
    /// `tr M ≡ 2`, `(M − I)² ≡ 0`.
    pub fn is_transvection(&self) -> bool {
        if self.is_identity() || self.trace() != 2 % self.n {
            return false;
        }
        let n = self.n as u128;
        let m = [
            (self.e[0] as u128 + n - 1) % n,
            self.e[1] as u128,
            self.e[2] as u128,
            (self.e[3] as u128 + n - 1) % n,
        ];
        let sq = [
            (m[0] * m[0] + m[1] * m[2]) % n,
            (m[0] * m[1] + m[1] * m[3]) % n,
            (m[2] * m[0] + m[3] * m[2]) % n,
            (m[2] * m[1] + m[3] * m[3]) % n,
        ];
        sq == [0, 0, 0, 0]
    }

    /// The unique line fixed pointwise, i.e. ker(M − I), for a transvection
    /// over a prime modulus.
    pub fn fixed_line(&self) -> Result<ProjLine> {
        if !is_prime(self.n) {
            return Err(Error::InvalidInput(format!(
                "fixed line needs a prime modulus, got {}",
                self.n
            )));
        }
        if !self.is_transvection() {
            return Err(Error::NotTransvection(format!("{self} is not a transvection")));
        }
        let n = self.n;
        let rows = [
            [(self.e[0] + n - 1) % n, self.e[1]],
            [self.e[2], (self.e[3] + n - 1) % n],
        ];
        let row = rows
            .iter()
            .find(|r| r[0] != 0 || r[1] != 0)
            .expect("a transvection is not the identity");
        // (x, y) = (b, -(a-1)) solves (a-1)x + by = 0
        let line = ProjLine::new(n, row[1], (n - row[0]) % n)?;
        for r in &rows {
            let v = (r[0] as u128 * line.x as u128 + r[1] as u128 * line.y as u128) % n as u128;
            assert_eq!(v, 0, "fixed line must be annihilated by both rows");
        }
        Ok(line)
    }
}

impl fmt::Display for Sl2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]] mod {}",
            self.e[0], self.e[1], self.e[2], self.e[3], self.n
        )
    }
}

/// Point of the projective line over ℤ/ℓ, stored as the normalized
/// representative `[1 : y]` or `[0 : 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProjLine {
    n: u64,
    x: u64,
    y: u64,
}

impl ProjLine {
    pub fn new(n: u64, x: u64, y: u64) -> Result<Self> {
        if !is_prime(n) {
            return Err(Error::InvalidInput(format!(
                "projective line needs a prime modulus, got {n}"
            )));
        }
        let (x, y) = (x % n, y % n);
        if x == 0 && y == 0 {
            return Err(Error::InvalidInput("projective point needs a nonzero vector".into()));
        }
        if x != 0 {
            let inv = inv_mod(x, n);
            Ok(ProjLine { n, x: 1, y: (y as u128 * inv as u128 % n as u128) as u64 })
        } else {
            Ok(ProjLine { n, x: 0, y: 1 })
        }
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    /// Normalized coordinates `(x, y)`.
    pub fn coords(&self) -> (u64, u64) {
        (self.x, self.y)
    }

    /// Image line under the matrix action on column vectors.
    pub fn apply(&self, g: &Sl2Matrix) -> Result<ProjLine> {
        if g.modulus() != self.n {
            return Err(Error::InvalidInput("matrix and line moduli must agree".into()));
        }
        let n = self.n as u128;
        let [a, b, c, d] = g.entries();
        let x = (a as u128 * self.x as u128 + b as u128 * self.y as u128) % n;
        let y = (c as u128 * self.x as u128 + d as u128 * self.y as u128) % n;
        ProjLine::new(self.n, x as u64, y as u64)
    }
}

impl fmt::Display for ProjLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{}]", self.x, self.y)
    }
}

/// |SL₂(ℤ/N)| = N³ · Π over primes p | N of (1 − p⁻²).
pub fn sl2_order(n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::InvalidInput("the modulus must be at least 2".into()));
    }
    let mut order: u128 = (n as u128).pow(3);
    let mut rem = n;
    let mut p = 2u64;
    while p * p <= rem {
        if rem % p == 0 {
            order = order / (p as u128 * p as u128) * (p as u128 * p as u128 - 1);
            while rem % p == 0 {
                rem /= p;
            }
        }
        p += 1;
    }
    if rem > 1 {
        order = order / (rem as u128 * rem as u128) * (rem as u128 * rem as u128 - 1);
    }
    u64::try_from(order).map_err(|_| Error::InvalidInput(format!("group order for {n} overflows")))
}

/// Closure of the generators under multiplication, by breadth-first search
/// from the identity. Deterministic; fails once the closure would exceed
/// `cap` elements.
pub fn generate_subgroup(gens: &[Sl2Matrix], cap: usize) -> Result<BTreeSet<Sl2Matrix>> {
    let n = match gens.first() {
        Some(g) => g.modulus(),
        None => return Err(Error::InvalidInput("need at least one generator".into())),
    };
    if gens.iter().any(|g| g.modulus() != n) {
        return Err(Error::InvalidInput("generators must share a modulus".into()));
    }
    let id = Sl2Matrix::identity(n)?;
    let mut seen: BTreeSet<Sl2Matrix> = BTreeSet::new();
    seen.insert(id);
    let mut queue: VecDeque<Sl2Matrix> = VecDeque::new();
    queue.push_back(id);
    while let Some(m) = queue.pop_front() {
        for g in gens {
            let next = m.mul(g);
            if seen.insert(next) {
                if seen.len() > cap {
                    return Err(Error::CapExceeded(cap));
                }
                queue.push_back(next);
            }
        }
    }
    Ok(seen)
}

/// Two transvections with distinct fixed lines generate the whole group
/// over a prime modulus; that criterion is evaluated and, when it fires,
/// double-checked by counting the actual closure.
pub fn check_surjectivity(transvections: &[Sl2Matrix]) -> Result<bool> {
    let n = match transvections.first() {
        Some(g) => g.modulus(),
        None => return Ok(false),
    };
    if transvections.iter().any(|g| g.modulus() != n) {
        return Err(Error::InvalidInput("matrices must share a modulus".into()));
    }
    let mut lines = BTreeSet::new();
    for m in transvections {
        if !m.is_transvection() {
            return Err(Error::NotTransvection(format!("{m} is not a transvection")));
        }
        lines.insert(m.fixed_line()?);
    }
    if lines.len() < 2 {
        return Ok(false);
    }
    let order = sl2_order(n)? as usize;
    let closure = generate_subgroup(transvections, order)?;
    assert_eq!(
        closure.len(),
        order,
        "transvections with distinct fixed lines must generate everything"
    );
    Ok(true)
}

/// Inertia orders at the intermediate components of an edge of integer
/// length `n` whose downstairs inertia has order `m`: the i-th equals
/// `m / gcd(i, m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InertiaChain {
    pub edge_length: u64,
    pub inertia_order: u64,
    pub orders: Vec<u64>,
}

impl InertiaChain {
    pub fn new(n: u64, m: u64) -> Result<Self> {
        if n < 1 || m < 1 {
            return Err(Error::InvalidInput("edge length and inertia order must be positive".into()));
        }
        let orders = (1..n).map(|i| m / gcd(i, m)).collect();
        Ok(InertiaChain { edge_length: n, inertia_order: m, orders })
    }
}

impl fmt::Display for InertiaChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "length {}, inertia {}, intermediate orders {:?}",
            self.edge_length, self.inertia_order, self.orders
        )
    }
}

/// Inputs to a fiber-count prediction over one edge.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberInputs {
    pub reduction: ReductionType,
    /// Order of the Galois group of the torsion cover.
    pub group_order: u64,
    /// Order of its image in the matrix group, when known separately.
    pub image_order: Option<u64>,
    pub ell: Option<u64>,
    /// |slope| of the j-profile on the edge.
    pub delta_j: Option<u64>,
    pub length: Q,
    /// Caller-certified: the residue characteristic does not divide the
    /// torsion level (good-reduction hypothesis).
    pub char_coprime_to_level: bool,
    /// Residue characteristic, `None` for characteristic zero.
    pub residue_char: Option<u64>,
}

/// Edges upstairs over a classified edge: how many and how long.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberPrediction {
    pub count: u64,
    pub length: Q,
}

/// Edge counts and lengths over a classified edge: `(|G|, l)` in the good
/// case, `(|G|/ℓ, l/ℓ)` in the multiplicative case. Every hypothesis is
/// checked, not assumed.
pub fn predict_edge_fiber(inputs: &FiberInputs) -> Result<FiberPrediction> {
    let fail = |what: &str| Err(Error::HypothesisViolated(what.to_string()));
    match inputs.reduction {
        ReductionType::Good => {
            if !inputs.char_coprime_to_level {
                return fail("the residue characteristic must not divide the torsion level");
            }
            Ok(FiberPrediction { count: inputs.group_order, length: inputs.length.clone() })
        }
        ReductionType::Multiplicative => {
            let ell = match inputs.ell {
                Some(l) => l,
                None => return fail("a prime level ell is required over a multiplicative edge"),
            };
            if ell < 3 || !is_prime(ell) {
                return fail("ell must be a prime at least 3");
            }
            let delta = match inputs.delta_j {
                Some(d) => d,
                None => return fail("the j-profile slope on the edge is required"),
            };
            if delta % ell == 0 {
                return fail("ell must not divide the j-profile slope on the edge");
            }
            // Test whichever order the caller actually knows the image by.
            let image = inputs.image_order.unwrap_or(inputs.group_order);
            if let Some(p) = inputs.residue_char {
                if image % p == 0 {
                    return fail("the residue characteristic must not divide the group order");
                }
            }
            if inputs.group_order % ell != 0 {
                return fail("ell must divide the group order");
            }
            Ok(FiberPrediction {
                count: inputs.group_order / ell,
                length: &inputs.length / qi(ell as i64),
            })
        }
        other => fail(&format!("no fiber prediction over an edge of {other} reduction")),
    }
}

/// Everything needed to decide whether inertia over one edge acts by a
/// transvection: the edge's reduction type, the j-profile slope there, the
/// divisibility hypotheses, and, when the verdict is positive, the matrix
/// and the predicted fiber upstairs.
#[derive(Clone, Debug, PartialEq)]
pub struct TransvectionCertificate {
    pub edge: usize,
    pub ell: u64,
    pub group_order: u64,
    pub reduction: ReductionType,
    pub delta_j: Option<u64>,
    pub verdict: bool,
    pub matrix: Option<Sl2Matrix>,
    pub predicted_fiber: Option<FiberPrediction>,
    pub notes: Vec<String>,
}

/// Evaluate the transvection criterion on edge `e`: multiplicative
/// reduction there, `ℓ ≥ 3` prime not dividing the j-profile slope, and
/// residue characteristic coprime to the group order.
pub fn transvection_check(
    w: &WeierstrassEquation,
    tree: &SkeletonTree,
    e: usize,
    ell: u64,
    group_order: u64,
    residue: &ResidueConfig,
) -> Result<TransvectionCertificate> {
    if e >= tree.edges().len() {
        return Err(Error::InvalidInput(format!("edge {e} not in tree")));
    }
    let g = tree.metric_graph();
    let sel = SubgraphSelection::new(&g, [], [e])?;
    let reduction = classify(w, tree, &sel)?.verdict;

    let profiles = vertical_profile(w, tree)?;
    let delta_j = match &profiles.j {
        None => None,
        Some(phi) => {
            let s = edge_slope_abs(&g, phi, e);
            if !s.is_integer() {
                return Err(Error::NonIntegralSlope(format!(
                    "j-profile slope {s} on edge {e} is not an integer"
                )));
            }
            Some(u64::try_from(s.to_integer()).expect("absolute slope is nonnegative"))
        }
    };

    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |cond: bool, yes: &str, no: &str, notes: &mut Vec<String>| {
        notes.push(if cond { yes.to_string() } else { no.to_string() });
        ok &= cond;
        cond
    };
    check(
        reduction == ReductionType::Multiplicative,
        "reduction on the edge is multiplicative",
        &format!("reduction on the edge is {reduction}, not multiplicative"),
        &mut notes,
    );
    check(
        ell >= 3 && is_prime(ell),
        &format!("{ell} is a prime at least 3"),
        &format!("{ell} is not a prime at least 3"),
        &mut notes,
    );
    match delta_j {
        Some(d) => check(
            d % ell != 0,
            &format!("{ell} does not divide the j-profile slope {d}"),
            &format!("{ell} divides the j-profile slope {d}"),
            &mut notes,
        ),
        None => check(
            false,
            "",
            "j vanishes identically; no slope to test",
            &mut notes,
        ),
    };
    check(
        !residue.divides(group_order),
        "the residue characteristic does not divide the group order",
        "the residue characteristic divides the group order",
        &mut notes,
    );

    let verdict = ok;
    let (matrix, predicted_fiber) = if verdict {
        let m = Sl2Matrix::new(ell, [1, 1, 0, 1])?;
        notes.push(
            "inertia acts unipotently on the adjusted basis after adjoining a square root \
             of the Hasse invariant"
                .to_string(),
        );
        let fiber = predict_edge_fiber(&FiberInputs {
            reduction,
            group_order,
            image_order: None,
            ell: Some(ell),
            delta_j,
            length: tree.edge_length(e),
            char_coprime_to_level: false,
            residue_char: if residue.is_char_zero() {
                None
            } else {
                Some(residue.residue_char())
            },
        });
        match fiber {
            Ok(f) => (Some(m), Some(f)),
            Err(Error::HypothesisViolated(msg)) => {
                notes.push(format!("no fiber prediction: {msg}"));
                (Some(m), None)
            }
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };

    Ok(TransvectionCertificate {
        edge: e,
        ell,
        group_order,
        reduction,
        delta_j,
        verdict,
        matrix,
        predicted_fiber,
        notes,
    })
}

/// Valuation of the Tate parameter at a vertex where j is non-integral:
/// `v(q) = −φ_j(v)`, defined only when `φ_j(v) < 0`.
pub fn tate_parameter_valuation(phi_j: &LaplacianFunction, v: usize) -> Result<Q> {
    let val = phi_j.value(v);
    if !val.is_negative() {
        return Err(Error::NotNonIntegralJ(format!(
            "j has valuation {val} >= 0 at vertex {v}"
        )));
    }
    Ok(-val)
}

/// `−c₄/c₆` as an unreduced fraction; undefined at j = 0 and j = 1728.
pub fn hasse_invariant(w: &WeierstrassEquation) -> Result<RationalFunction> {
    let inv = w.invariants();
    if inv.c4.is_zero() {
        return Err(Error::UndefinedHasse("j = 0: c4 vanishes identically".into()));
    }
    if inv.c6.is_zero() {
        return Err(Error::UndefinedHasse("j = 1728: c6 vanishes identically".into()));
    }
    Ok(-&inv.c4.checked_div(&inv.c6)?)
}

/// Division polynomial in x, coefficients in the function field, for the
/// curve brought to short form first.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisionPolynomial {
    pub level: u32,
    /// Ascending powers of x.
    pub coeffs: Vec<RationalFunction>,
}

impl fmt::Display for DivisionPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*x")?,
                _ => write!(f, "({c})*x^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// The x-polynomial cutting out the nontrivial N-torsion, N ∈ {2, 3}:
/// `x³ + Ax + B` and `3x⁴ + 6Ax² + 12Bx − A²` for `y² = x³ + Ax + B`.
pub fn division_polynomial(w: &WeierstrassEquation, level: u32) -> Result<DivisionPolynomial> {
    let (_, ws) = short_form_transform(w)?;
    let a = ws.a4().clone();
    let b = ws.a6().clone();
    let coeffs = match level {
        2 => vec![b, a, RationalFunction::zero(), RationalFunction::one()],
        3 => vec![
            -&(&a * &a),
            b.scale(&ValuedElement::from_int(12)),
            a.scale(&ValuedElement::from_int(6)),
            RationalFunction::zero(),
            RationalFunction::from_int(3),
        ],
        other => {
            return Err(Error::InvalidInput(format!(
                "division polynomial only implemented for levels 2 and 3, got {other}"
            )))
        }
    };
    Ok(DivisionPolynomial { level, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_rational_function;
    use crate::skeleton::DiskVertex;
    use crate::valued::Valuation;
    use crate::{qi, qr};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rf(s: &str) -> RationalFunction {
        parse_rational_function(s).unwrap()
    }

    fn tau(n: u64) -> Sl2Matrix {
        Sl2Matrix::new(n, [1, 1, 0, 1]).unwrap()
    }

    fn tau_lower(n: u64) -> Sl2Matrix {
        Sl2Matrix::new(n, [1, 0, 1, 1]).unwrap()
    }

    #[test]
    fn matrix_arithmetic() {
        let m = Sl2Matrix::new(5, [2, 1, 1, 1]).unwrap();
        assert!(m.mul(&m.inverse()).is_identity());
        assert_eq!(m.pow(3), m.mul(&m).mul(&m));
        assert_eq!(m.trace(), 3);
        assert!(Sl2Matrix::new(5, [2, 0, 0, 2]).is_err());
        assert_eq!(Sl2Matrix::new(5, [-1, 0, 0, -1]).unwrap().entries(), [4, 0, 0, 4]);
        assert_eq!(Sl2Matrix::parse("1, 1, 0, 1", 7).unwrap(), tau(7));
        assert!(Sl2Matrix::parse("1,1,0", 7).is_err());
        assert_eq!(format!("{}", tau(5)), "[[1, 1], [0, 1]] mod 5");
    }

    #[test]
    fn group_orders() {
        assert_eq!(sl2_order(2).unwrap(), 6);
        assert_eq!(sl2_order(3).unwrap(), 24);
        assert_eq!(sl2_order(5).unwrap(), 120);
        assert_eq!(sl2_order(7).unwrap(), 336);
        assert_eq!(sl2_order(6).unwrap(), 144);
        assert!(sl2_order(1).is_err());
    }

    #[test]
    fn closures() {
        let id = Sl2Matrix::identity(5).unwrap();
        assert_eq!(generate_subgroup(&[id], 10).unwrap().len(), 1);

        let full = generate_subgroup(&[tau(5), tau_lower(5)], 200).unwrap();
        assert_eq!(full.len(), 120);
        for m in &full {
            assert!(full.contains(&m.inverse()));
        }
        assert_eq!(120 % generate_subgroup(&[tau(5)], 200).unwrap().len(), 0);

        let cyclic = generate_subgroup(&[tau(3)], 10).unwrap();
        assert_eq!(cyclic.len(), 3);

        assert!(matches!(
            generate_subgroup(&[tau(5), tau_lower(5)], 10),
            Err(Error::CapExceeded(10))
        ));
    }

    #[test]
    fn transvections_and_lines() {
        assert!(tau(5).is_transvection());
        assert_eq!(tau(5).fixed_line().unwrap().coords(), (1, 0));
        assert!(tau_lower(5).is_transvection());
        assert_eq!(tau_lower(5).fixed_line().unwrap().coords(), (0, 1));
        let id = Sl2Matrix::identity(5).unwrap();
        assert!(!id.is_transvection());
        assert!(matches!(id.fixed_line(), Err(Error::NotTransvection(_))));
        // semisimple, not unipotent
        let m = Sl2Matrix::new(5, [2, 0, 0, 3]).unwrap();
        assert!(!m.is_transvection());
    }

    #[test]
    fn conjugation_moves_the_fixed_line() {
        let mut rng = StdRng::seed_from_u64(11);
        for ell in [3u64, 5, 7] {
            for _ in 0..50 {
                // random conjugator as a word in the standard generators
                let mut g = Sl2Matrix::identity(ell).unwrap();
                for _ in 0..rng.gen_range(1..8) {
                    let pick = if rng.gen_bool(0.5) { tau(ell) } else { tau_lower(ell) };
                    g = g.mul(&pick.pow(rng.gen_range(1..ell)));
                }
                let m = if rng.gen_bool(0.5) { tau(ell) } else { tau_lower(ell) };
                let conj = g.mul(&m).mul(&g.inverse());
                assert!(conj.is_transvection());
                assert_eq!(
                    conj.fixed_line().unwrap(),
                    m.fixed_line().unwrap().apply(&g).unwrap()
                );
            }
        }
    }

    #[test]
    fn surjectivity_by_two_lines() {
        let same_line = [tau(7), tau(7).pow(2)];
        assert!(!check_surjectivity(&same_line).unwrap());
        assert!(!check_surjectivity(&[tau(7)]).unwrap());
        assert!(check_surjectivity(&[tau(7), tau_lower(7)]).unwrap());
        let not_a_transvection = Sl2Matrix::new(7, [2, 0, 0, 4]).unwrap();
        assert!(matches!(
            check_surjectivity(&[tau(7), not_a_transvection]),
            Err(Error::NotTransvection(_))
        ));
    }

    #[test]
    fn inertia_orders_along_a_chain() {
        assert_eq!(InertiaChain::new(4, 4).unwrap().orders, vec![4, 2, 4]);
        assert_eq!(InertiaChain::new(6, 4).unwrap().orders, vec![4, 2, 4, 1, 4]);
        assert_eq!(InertiaChain::new(5, 1).unwrap().orders, vec![1, 1, 1, 1]);
        assert!(InertiaChain::new(0, 4).is_err());
        for m in 2..=12u64 {
            let chain = InertiaChain::new(m, m).unwrap();
            for i in 1..m {
                assert_eq!(chain.orders[(i - 1) as usize], m / gcd(i, m));
                if gcd(i, m) == 1 {
                    assert_eq!(chain.orders[(i - 1) as usize], m);
                }
                // symmetric around the middle when length equals the order
                assert_eq!(chain.orders[(i - 1) as usize], chain.orders[(m - i - 1) as usize]);
            }
        }
    }

    #[test]
    fn fiber_predictions() {
        let good = FiberInputs {
            reduction: ReductionType::Good,
            group_order: 24,
            image_order: None,
            ell: None,
            delta_j: None,
            length: qi(1),
            char_coprime_to_level: true,
            residue_char: None,
        };
        assert_eq!(
            predict_edge_fiber(&good).unwrap(),
            FiberPrediction { count: 24, length: qi(1) }
        );
        let mut unflagged = good.clone();
        unflagged.char_coprime_to_level = false;
        assert!(matches!(predict_edge_fiber(&unflagged), Err(Error::HypothesisViolated(_))));

        let mult = FiberInputs {
            reduction: ReductionType::Multiplicative,
            group_order: 24,
            image_order: None,
            ell: Some(3),
            delta_j: Some(1),
            length: qi(3),
            char_coprime_to_level: false,
            residue_char: Some(5),
        };
        assert_eq!(
            predict_edge_fiber(&mult).unwrap(),
            FiberPrediction { count: 8, length: qi(1) }
        );
        let mut divides = mult.clone();
        divides.delta_j = Some(6);
        assert!(matches!(predict_edge_fiber(&divides), Err(Error::HypothesisViolated(_))));
        let mut bad_p = mult.clone();
        bad_p.residue_char = Some(3);
        assert!(matches!(predict_edge_fiber(&bad_p), Err(Error::HypothesisViolated(_))));
        let mut additive = mult.clone();
        additive.reduction = ReductionType::Additive;
        assert!(matches!(predict_edge_fiber(&additive), Err(Error::HypothesisViolated(_))));
    }

    fn running_curve() -> WeierstrassEquation {
        WeierstrassEquation::from_coeff_strs(["0", "1", "0", "0", "t"]).unwrap()
    }

    fn two_vertex_tree() -> SkeletonTree {
        SkeletonTree::new(
            vec![
                DiskVertex::new(ValuedElement::zero(), qi(0)).unwrap(),
                DiskVertex::new(ValuedElement::zero(), qi(1)).unwrap(),
            ],
            vec![(0, 1)],
            1,
        )
        .unwrap()
    }

    #[test]
    fn certificate_on_the_running_curve() {
        let w = running_curve();
        let tree = two_vertex_tree();
        let cfg = ResidueConfig::char_zero();
        let cert = transvection_check(&w, &tree, 0, 5, 120, &cfg).unwrap();
        assert!(cert.verdict);
        assert_eq!(cert.reduction, ReductionType::Multiplicative);
        assert_eq!(cert.delta_j, Some(1));
        assert_eq!(cert.matrix, Some(tau(5)));
        assert_eq!(
            cert.predicted_fiber,
            Some(FiberPrediction { count: 24, length: qr(1, 5) })
        );
    }

    #[test]
    fn certificate_fails_when_ell_divides_the_slope() {
        // a6 = t^3 steepens the j-profile to slope 3 on the edge
        let w = WeierstrassEquation::from_coeff_strs(["0", "1", "0", "0", "t^3"]).unwrap();
        let tree = two_vertex_tree();
        let cfg = ResidueConfig::char_zero();
        let bad = transvection_check(&w, &tree, 0, 3, 120, &cfg).unwrap();
        assert_eq!(bad.delta_j, Some(3));
        assert!(!bad.verdict);
        assert!(bad.matrix.is_none());
        let good_ell = transvection_check(&w, &tree, 0, 5, 120, &cfg).unwrap();
        assert!(good_ell.verdict);
    }

    #[test]
    fn certificate_fails_on_a_good_edge() {
        let w = WeierstrassEquation::from_coeff_strs(["0", "1", "0", "0", "1"]).unwrap();
        let tree = two_vertex_tree();
        let cfg = ResidueConfig::char_zero();
        let cert = transvection_check(&w, &tree, 0, 5, 120, &cfg).unwrap();
        assert_eq!(cert.reduction, ReductionType::Good);
        assert!(!cert.verdict);
    }

    #[test]
    fn tate_parameter() {
        let phi = LaplacianFunction::new(vec![qi(0), qi(-1), qi(-12)], 1);
        assert!(matches!(
            tate_parameter_valuation(&phi, 0),
            Err(Error::NotNonIntegralJ(_))
        ));
        assert_eq!(tate_parameter_valuation(&phi, 1).unwrap(), qi(1));
        assert_eq!(tate_parameter_valuation(&phi, 2).unwrap(), qi(12));
    }

    #[test]
    fn hasse_invariant_values() {
        let w = running_curve();
        let inv = w.invariants();
        let h = hasse_invariant(&w).unwrap();
        assert_eq!(h, rf("16").checked_div(&rf("864*t + 64")).unwrap());
        assert_eq!(h, -&inv.c4.checked_div(&inv.c6).unwrap());

        let literal = WeierstrassEquation::short(rf("-54"), rf("-162")).unwrap();
        let li = literal.invariants();
        assert_eq!(
            hasse_invariant(&literal).unwrap(),
            -&li.c4.checked_div(&li.c6).unwrap()
        );

        let no_c6 = WeierstrassEquation::short(rf("1"), rf("0")).unwrap();
        assert!(matches!(hasse_invariant(&no_c6), Err(Error::UndefinedHasse(_))));
        let no_c4 = WeierstrassEquation::short(rf("0"), rf("1")).unwrap();
        assert!(matches!(hasse_invariant(&no_c4), Err(Error::UndefinedHasse(_))));
    }

    #[test]
    fn hasse_square_class_parity_under_scaling() {
        let w = running_curve();
        let base = hasse_invariant(&w).unwrap();
        let gauss = DiskVertex::new(ValuedElement::zero(), qi(0)).unwrap();
        let v0 = match gauss.gauss_valuation_rational(&base) {
            Valuation::Finite(v) => v,
            Valuation::Infinite => unreachable!(),
        };
        for u in ["pi", "t", "pi^2*t"] {
            let tr = crate::weierstrass::WeierstrassTransform::scaling(rf(u)).unwrap();
            let scaled = crate::weierstrass::transform(&w, &tr).unwrap();
            let h = hasse_invariant(&scaled).unwrap();
            let v1 = match gauss.gauss_valuation_rational(&h) {
                Valuation::Finite(v) => v,
                Valuation::Infinite => unreachable!(),
            };
            let diff = &v1 - &v0;
            assert!(diff.is_integer());
            assert!(num::Zero::is_zero(&(&diff % qi(2))));
        }
    }

    #[test]
    fn division_polynomials() {
        let e1 = WeierstrassEquation::short(rf("0"), rf("1")).unwrap();
        let p2 = division_polynomial(&e1, 2).unwrap();
        assert_eq!(p2.coeffs, vec![rf("1"), rf("0"), rf("0"), rf("1")]);
        let p3 = division_polynomial(&e1, 3).unwrap();
        assert_eq!(p3.coeffs, vec![rf("0"), rf("12"), rf("0"), rf("0"), rf("3")]);
        assert_eq!(format!("{p3}"), "(3)*x^4 + (12)*x");

        let e2 = WeierstrassEquation::short(rf("1"), rf("pi")).unwrap();
        let q3 = division_polynomial(&e2, 3).unwrap();
        assert_eq!(q3.coeffs, vec![rf("-1"), rf("12*pi"), rf("6"), rf("0"), rf("3")]);

        let long = running_curve();
        let (_, short) = short_form_transform(&long).unwrap();
        let d2 = division_polynomial(&long, 2).unwrap();
        assert_eq!(d2.coeffs[0], *short.a6());
        assert_eq!(d2.coeffs[1], *short.a4());

        assert!(matches!(division_polynomial(&e1, 5), Err(Error::InvalidInput(_))));
    }
}
