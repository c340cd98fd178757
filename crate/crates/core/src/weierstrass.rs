//! Weierstrass equations with coefficients in the rational function field,
//! their exact invariants, coordinate changes, vertical valuation profiles
//! over a disk tree, and minimal twisting on a chosen vertex set.

use std::fmt;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::expr::parse_factored_function;
use crate::laplacian::{laplacian_apply, LaplacianFunction};
use crate::linalg;
use crate::poly::RationalFunction;
use crate::skeleton::{FactoredFunction, SkeletonTree};
use crate::valued::{Valuation, ValuedElement};
use crate::{qi, Q, Z};

/// The classical quantities attached to a Weierstrass equation.
///
/// All are elements of the function field, kept as unreduced fractions.
/// `j` is `c4³/Δ`; it is the zero function exactly when `c4` is.
#[derive(Clone, Debug, PartialEq)]
pub struct Invariants {
    pub b2: RationalFunction,
    pub b4: RationalFunction,
    pub b6: RationalFunction,
    pub b8: RationalFunction,
    pub c4: RationalFunction,
    pub c6: RationalFunction,
    pub delta: RationalFunction,
    pub j: RationalFunction,
}

fn ve_int(n: i64) -> ValuedElement {
    ValuedElement::from_int(n)
}

fn compute_invariants(a: &[RationalFunction; 5]) -> Result<Invariants> {
    let [a1, a2, a3, a4, a6] = a;
    let b2 = &(a1 * a1) + &a2.scale(&ve_int(4));
    let b4 = &a4.scale(&ve_int(2)) + &(a1 * a3);
    let b6 = &(a3 * a3) + &a6.scale(&ve_int(4));
    let b8 = {
        let t1 = &(a1 * a1) * a6;
        let t2 = (a2 * a6).scale(&ve_int(4));
        let t3 = &(a1 * a3) * a4;
        let t4 = a2 * &(a3 * a3);
        let t5 = a4 * a4;
        &(&(&t1 + &t2) - &t3) + &(&t4 - &t5)
    };
    let c4 = &(&b2 * &b2) - &b4.scale(&ve_int(24));
    let b2cu = &(&b2 * &b2) * &b2;
    let c6 = &(&(&b2 * &b4).scale(&ve_int(36)) - &b2cu) - &b6.scale(&ve_int(216));
    let delta = {
        let t1 = &(&b2 * &b2) * &b8;
        let t2 = (&(&b4 * &b4) * &b4).scale(&ve_int(8));
        let t3 = (&b6 * &b6).scale(&ve_int(27));
        let t4 = (&(&b2 * &b4) * &b6).scale(&ve_int(9));
        &(&t4 - &(&t1 + &t2)) - &t3
    };
    if delta.is_zero() {
        return Err(Error::SingularCurve);
    }
    let c4cu = &(&c4 * &c4) * &c4;
    let j = c4cu.checked_div(&delta)?;
    assert!(
        (&c4cu - &(&c6 * &c6)) == delta.scale(&ve_int(1728)),
        "invariant identity c4^3 - c6^2 = 1728*delta failed"
    );
    assert!(
        (&(&b2 * &b6) - &(&b4 * &b4)) == b8.scale(&ve_int(4)),
        "invariant identity b2*b6 - b4^2 = 4*b8 failed"
    );
    Ok(Invariants { b2, b4, b6, b8, c4, c6, delta, j })
}

/// `y² + a₁xy + a₃y = x³ + a₂x² + a₄x + a₆`, required nonsingular.
///
/// Invariants are computed once at construction; `Δ = 0` is rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct WeierstrassEquation {
    a: [RationalFunction; 5],
    inv: Invariants,
}

impl WeierstrassEquation {
    pub fn new(a: [RationalFunction; 5]) -> Result<Self> {
        let inv = compute_invariants(&a)?;
        Ok(WeierstrassEquation { a, inv })
    }

    /// Coefficients `[a1, a2, a3, a4, a6]` from factored expression strings;
    /// `"0"` stands for the zero coefficient.
    pub fn from_coeff_strs(strs: [&str; 5]) -> Result<Self> {
        let mut a: Vec<RationalFunction> = Vec::with_capacity(5);
        for s in strs {
            if s.trim() == "0" {
                a.push(RationalFunction::zero());
            } else {
                a.push(parse_factored_function(s)?.to_rational_function());
            }
        }
        WeierstrassEquation::new([
            a[0].clone(),
            a[1].clone(),
            a[2].clone(),
            a[3].clone(),
            a[4].clone(),
        ])
    }

    /// `y² = x³ + a₄x + a₆`.
    pub fn short(a4: RationalFunction, a6: RationalFunction) -> Result<Self> {
        WeierstrassEquation::new([
            RationalFunction::zero(),
            RationalFunction::zero(),
            RationalFunction::zero(),
            a4,
            a6,
        ])
    }

    pub fn a1(&self) -> &RationalFunction {
        &self.a[0]
    }

    pub fn a2(&self) -> &RationalFunction {
        &self.a[1]
    }

    pub fn a3(&self) -> &RationalFunction {
        &self.a[2]
    }

    pub fn a4(&self) -> &RationalFunction {
        &self.a[3]
    }

    pub fn a6(&self) -> &RationalFunction {
        &self.a[4]
    }

    /// `[a1, a2, a3, a4, a6]`.
    pub fn coefficients(&self) -> &[RationalFunction; 5] {
        &self.a
    }

    pub fn invariants(&self) -> &Invariants {
        &self.inv
    }

    /// True when a1 = a2 = a3 = 0.
    pub fn is_short(&self) -> bool {
        self.a[0].is_zero() && self.a[1].is_zero() && self.a[2].is_zero()
    }
}

impl fmt::Display for WeierstrassEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2")?;
        if !self.a[0].is_zero() {
            write!(f, " + ({})*x*y", self.a[0])?;
        }
        if !self.a[2].is_zero() {
            write!(f, " + ({})*y", self.a[2])?;
        }
        write!(f, " = x^3")?;
        if !self.a[1].is_zero() {
            write!(f, " + ({})*x^2", self.a[1])?;
        }
        if !self.a[3].is_zero() {
            write!(f, " + ({})*x", self.a[3])?;
        }
        if !self.a[4].is_zero() {
            write!(f, " + ({})", self.a[4])?;
        }
        Ok(())
    }
}

/// Coordinate change `x = u²x′ + r`, `y = u³y′ + su²x′ + t` with `u ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeierstrassTransform {
    pub u: RationalFunction,
    pub r: RationalFunction,
    pub s: RationalFunction,
    pub t: RationalFunction,
}

impl WeierstrassTransform {
    pub fn new(
        u: RationalFunction,
        r: RationalFunction,
        s: RationalFunction,
        t: RationalFunction,
    ) -> Result<Self> {
        if u.is_zero() {
            return Err(Error::InvalidInput("transform scale u must be nonzero".into()));
        }
        Ok(WeierstrassTransform { u, r, s, t })
    }

    pub fn identity() -> Self {
        WeierstrassTransform {
            u: RationalFunction::one(),
            r: RationalFunction::zero(),
            s: RationalFunction::zero(),
            t: RationalFunction::zero(),
        }
    }

    /// Pure scaling `(u, 0, 0, 0)`.
    pub fn scaling(u: RationalFunction) -> Result<Self> {
        WeierstrassTransform::new(
            u,
            RationalFunction::zero(),
            RationalFunction::zero(),
            RationalFunction::zero(),
        )
    }

    pub fn is_identity(&self) -> bool {
        self.u == RationalFunction::one()
            && self.r.is_zero()
            && self.s.is_zero()
            && self.t.is_zero()
    }

    /// Apply `self` first, then `next`.
    pub fn compose(&self, next: &WeierstrassTransform) -> WeierstrassTransform {
        let u1sq = &self.u * &self.u;
        let u = &self.u * &next.u;
        let r = &self.r + &(&u1sq * &next.r);
        let s = &self.s + &(&self.u * &next.s);
        let t = &(&self.t + &(&(&self.s * &u1sq) * &next.r)) + &(&(&u1sq * &self.u) * &next.t);
        WeierstrassTransform { u, r, s, t }
    }

    pub fn inverse(&self) -> WeierstrassTransform {
        let ui = self.u.inv().expect("transform scale is nonzero");
        let ui2 = &ui * &ui;
        let ui3 = &ui2 * &ui;
        WeierstrassTransform {
            u: ui,
            r: -&(&self.r * &ui2),
            s: -&(&self.s * &(self.u.inv().expect("transform scale is nonzero"))),
            t: &(&(&self.r * &self.s) - &self.t) * &ui3,
        }
    }
}

impl fmt::Display for WeierstrassTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[u = {}, r = {}, s = {}, t = {}]", self.u, self.r, self.s, self.t)
    }
}

/// Change coordinates. The discriminant scales by `u⁻¹²` and `c₄` by `u⁻⁴`;
/// `j` is untouched. Both facts are rechecked exactly.
pub fn transform(w: &WeierstrassEquation, tr: &WeierstrassTransform) -> Result<WeierstrassEquation> {
    let ui = tr.u.inv()?;
    let ui2 = &ui * &ui;
    let ui3 = &ui2 * &ui;
    let ui4 = &ui2 * &ui2;
    let ui6 = &ui3 * &ui3;
    let (r, s, t) = (&tr.r, &tr.s, &tr.t);
    let [a1, a2, a3, a4, a6] = w.coefficients();

    let two_s = s.scale(&ve_int(2));
    let n1 = &(a1 + &two_s) * &ui;
    let n2 = &(&(a2 - &(s * a1)) + &(&r.scale(&ve_int(3)) - &(s * s))) * &ui2;
    let n3 = &(&(a3 + &(r * a1)) + &t.scale(&ve_int(2))) * &ui3;
    let n4 = {
        let core = &(a4 - &(s * a3)) + &(r * a2).scale(&ve_int(2));
        let mixed = &(t + &(r * s)) * a1;
        let quad = &(r * r).scale(&ve_int(3)) - &(s * t).scale(&ve_int(2));
        let sum = &(&core - &mixed) + &quad;
        &sum * &ui4
    };
    let n6 = {
        let core = &(a6 + &(r * a4)) + &(&(r * r) * a2);
        let cubic = &(&(r * r) * r) - &(t * a3);
        let rest = &(t * t) + &(&(r * t) * a1);
        let sum = &(&core + &cubic) - &rest;
        &sum * &ui6
    };

    let out = WeierstrassEquation::new([n1, n2, n3, n4, n6])?;
    let u12 = tr.u.pow(12)?;
    let u4 = tr.u.pow(4)?;
    assert!(
        &out.inv.delta * &u12 == w.inv.delta,
        "discriminant must scale by u^-12 under a coordinate change"
    );
    assert!(
        &out.inv.c4 * &u4 == w.inv.c4,
        "c4 must scale by u^-4 under a coordinate change"
    );
    assert!(out.inv.j == w.inv.j, "j must be preserved by a coordinate change");
    Ok(out)
}

/// The unimodular change (`u = 1`) to `y² = x³ + Ax + B` with
/// `A = −c₄/48`, `B = −c₆/864`. Invariants are unchanged.
pub fn short_form_transform(
    w: &WeierstrassEquation,
) -> Result<(WeierstrassTransform, WeierstrassEquation)> {
    let inv = w.invariants();
    let r = inv.b2.scale(&ValuedElement::from_q(crate::qr(-1, 12)));
    let s = w.a1().scale(&ValuedElement::from_q(crate::qr(-1, 2)));
    let t = &(w.a1() * &inv.b2).scale(&ValuedElement::from_q(crate::qr(1, 24)))
        - &w.a3().scale(&ValuedElement::from_q(crate::qr(1, 2)));
    let tr = WeierstrassTransform::new(RationalFunction::one(), r, s, t)?;
    let ws = transform(w, &tr)?;
    assert!(ws.is_short(), "short-form change must clear a1, a2, a3");
    assert!(
        ws.a4() == &inv.c4.scale(&ValuedElement::from_q(crate::qr(-1, 48))),
        "short form must have a4 = -c4/48"
    );
    assert!(
        ws.a6() == &inv.c6.scale(&ValuedElement::from_q(crate::qr(-1, 864))),
        "short form must have a6 = -c6/864"
    );
    Ok((tr, ws))
}

/// Vertex profiles of the four classifying quantities. A `None` entry marks
/// an identically-zero function, whose valuation is +∞ at every vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct VerticalProfiles {
    pub c4: Option<LaplacianFunction>,
    pub c6: Option<LaplacianFunction>,
    pub delta: LaplacianFunction,
    pub j: Option<LaplacianFunction>,
}

/// Gauss-valuation profiles of `c₄`, `c₆`, `Δ`, `j` over the tree vertices.
///
/// For each nonzero invariant the profile's graph Laplacian is checked,
/// exactly, against the retracted divisor of the function. Fails with
/// `ModelNotAdapted` when a zero or pole sits over an edge interior.
pub fn vertical_profile(w: &WeierstrassEquation, tree: &SkeletonTree) -> Result<VerticalProfiles> {
    let g = tree.metric_graph();
    let profile = |f: &RationalFunction| -> Result<Option<LaplacianFunction>> {
        if f.is_zero() {
            return Ok(None);
        }
        let retracted = tree.specialize_rational(f)?;
        let phi = tree.valuation_profile_rational(f)?;
        let applied = laplacian_apply(&g, &phi)?;
        assert_eq!(
            applied, retracted,
            "profile Laplacian must equal the retracted divisor"
        );
        Ok(Some(phi))
    };
    let inv = w.invariants();
    Ok(VerticalProfiles {
        c4: profile(&inv.c4)?,
        c6: profile(&inv.c6)?,
        delta: profile(&inv.delta)?.expect("discriminant is nonzero"),
        j: profile(&inv.j)?,
    })
}

/// Per-vertex valuations of `c₄`, `c₆`, `Δ`, the twist exponents they force,
/// and the discriminant valuations any minimal model attains.
///
/// `kappa[z]` is the largest lattice point below
/// `min(v_z(c₄)/4, v_z(c₆)/6, v_z(Δ)/12)`, identically-zero invariants
/// skipped. `excess[z] = v_z(Δ) − 12·kappa[z] ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalityReport {
    pub v_c4: Vec<Option<Q>>,
    pub v_c6: Vec<Option<Q>>,
    pub v_delta: Vec<Q>,
    pub kappa: Vec<Q>,
    pub excess: Vec<Q>,
}

fn lattice_floor(q: &Q, n: u32) -> Q {
    let scaled = q * qi(n as i64);
    scaled.floor() / qi(n as i64)
}

pub fn minimality_report(w: &WeierstrassEquation, tree: &SkeletonTree) -> Result<MinimalityReport> {
    let profiles = vertical_profile(w, tree)?;
    let n = tree.n_lattice();
    let m = tree.vertices().len();
    let mut v_c4 = Vec::with_capacity(m);
    let mut v_c6 = Vec::with_capacity(m);
    let mut v_delta = Vec::with_capacity(m);
    let mut kappa = Vec::with_capacity(m);
    let mut excess = Vec::with_capacity(m);
    for z in 0..m {
        let vc4 = profiles.c4.as_ref().map(|p| p.value(z).clone());
        let vc6 = profiles.c6.as_ref().map(|p| p.value(z).clone());
        let vd = profiles.delta.value(z).clone();
        let mut bound = &vd / qi(12);
        if let Some(v) = &vc4 {
            bound = bound.min(v / qi(4));
        }
        if let Some(v) = &vc6 {
            bound = bound.min(v / qi(6));
        }
        let k = lattice_floor(&bound, n);
        let d = &vd - &(&k * qi(12));
        assert!(!d.is_negative(), "minimal discriminant valuation must be nonnegative");
        v_c4.push(vc4);
        v_c6.push(vc6);
        v_delta.push(vd);
        kappa.push(k);
        excess.push(d);
    }
    Ok(MinimalityReport { v_c4, v_c6, v_delta, kappa, excess })
}

/// Outcome of minimal twisting: the full coordinate change, the resulting
/// equation, the scaling function in factored form, and the exponents it
/// realizes at the selected vertices.
#[derive(Clone, Debug)]
pub struct TwistResult {
    pub transform: WeierstrassTransform,
    pub minimal: WeierstrassEquation,
    pub scale: FactoredFunction,
    pub kappa: Vec<(usize, Q)>,
}

fn vertex_valuation(tree: &SkeletonTree, z: usize, f: &RationalFunction) -> Valuation {
    tree.vertex(z).gauss_valuation_rational(f)
}

fn coefficients_integral_on(w: &WeierstrassEquation, tree: &SkeletonTree, s: &[usize]) -> bool {
    w.coefficients().iter().all(|ai| {
        s.iter().all(|&z| match vertex_valuation(tree, z, ai) {
            Valuation::Finite(v) => !v.is_negative(),
            Valuation::Infinite => true,
        })
    })
}

/// Valuation of `c − center(z)` capped at `radius(z)`: the exponent a factor
/// `(t − c)` contributes to the Gauss valuation at vertex `z`.
fn capped_distance(tree: &SkeletonTree, z: usize, c: &ValuedElement) -> Q {
    let r = tree.vertex(z).radius().clone();
    match (c - tree.vertex(z).center()).valuation() {
        Valuation::Finite(v) => v.min(r),
        Valuation::Infinite => r,
    }
}

/// Find a model integral on `S` whose discriminant valuation is minimal at
/// every vertex of `S` simultaneously, twisting by a product of powers of π
/// and of `(t − c)` over the tree's centers.
///
/// `TwistInfeasible` means the required exponents are not realized by any
/// such product; enlarging the center pool via
/// [`construct_s_minimal_twist_with_centers`] may recover a solution.
pub fn construct_s_minimal_twist(
    w: &WeierstrassEquation,
    tree: &SkeletonTree,
    s: &[usize],
) -> Result<TwistResult> {
    construct_s_minimal_twist_with_centers(w, tree, s, &[])
}

/// Same as [`construct_s_minimal_twist`] with extra factor centers allowed
/// in the scaling function.
pub fn construct_s_minimal_twist_with_centers(
    w: &WeierstrassEquation,
    tree: &SkeletonTree,
    s: &[usize],
    extra_centers: &[ValuedElement],
) -> Result<TwistResult> {
    let mut sel: Vec<usize> = s.to_vec();
    sel.sort_unstable();
    sel.dedup();
    if let Some(&z) = sel.iter().find(|&&z| z >= tree.vertices().len()) {
        return Err(Error::InvalidInput(format!("selected vertex {z} not in tree")));
    }
    let report = minimality_report(w, tree)?;
    let lambda: Vec<(usize, Q)> = sel.iter().map(|&z| (z, report.kappa[z].clone())).collect();

    if lambda.iter().all(|(_, k)| k.is_zero()) && coefficients_integral_on(w, tree, &sel) {
        return Ok(TwistResult {
            transform: WeierstrassTransform::identity(),
            minimal: w.clone(),
            scale: FactoredFunction::one(),
            kappa: lambda,
        });
    }

    let (t_short, _) = short_form_transform(w)?;

    // Center pool, deterministically ordered: tree centers then extras.
    let mut centers: Vec<ValuedElement> = Vec::new();
    for v in tree.vertices() {
        if !centers.contains(v.center()) {
            centers.push(v.center().clone());
        }
    }
    for c in extra_centers {
        if !centers.contains(c) {
            centers.push(c.clone());
        }
    }

    // One row per selected vertex: e₀ + Σᵢ eᵢ·min(v(cᵢ − c_z), r_z) = κ_z,
    // scaled by the lattice denominator so every entry is an integer.
    let n = qi(tree.n_lattice() as i64);
    let to_int = |q: &Q| -> Z {
        let scaled = q * &n;
        assert!(scaled.is_integer(), "lattice-scaled valuation must be integral");
        scaled.to_integer()
    };
    let mut matrix: Vec<Vec<Z>> = Vec::with_capacity(lambda.len());
    let mut target: Vec<Z> = Vec::with_capacity(lambda.len());
    for (z, k) in &lambda {
        let mut row = vec![to_int(&qi(1))];
        for c in &centers {
            row.push(to_int(&capped_distance(tree, *z, c)));
        }
        matrix.push(row);
        target.push(to_int(k));
    }
    let exponents = linalg::solve_integer(&matrix, &target).ok_or_else(|| {
        Error::TwistInfeasible(format!(
            "no product of pi-powers and {} available centers realizes the \
             required exponents at {} vertices; supply additional centers",
            centers.len(),
            lambda.len()
        ))
    })?;

    let e0 = exponents[0].clone();
    let content = ValuedElement::pi_pow(Q::from(e0));
    let mut factors = Vec::new();
    for (c, e) in centers.iter().zip(&exponents[1..]) {
        if !e.is_zero() {
            let m = i64::try_from(e.clone())
                .map_err(|_| Error::InvalidInput("twist exponent overflows i64".into()))?;
            factors.push((c.clone(), m));
        }
    }
    let scale = FactoredFunction::new(content, factors)?;
    let t_u = WeierstrassTransform::scaling(scale.to_rational_function())?;
    let total = t_short.compose(&t_u);
    let minimal = transform(w, &total)?;

    // The scale can move zeros and poles off the vertex set, so recompute
    // the report on a tree refined with the retraction points of the new
    // roots. Refinement appends vertices; the selected indices stay valid.
    // An off-lattice retraction radius blocks refinement, in which case the
    // same exponents are recomputed pointwise from Gauss valuations.
    let mut vtree = Some(tree.clone());
    for (c, _) in scale.factors() {
        match vtree.take().map(|t| t.with_retraction_vertex(c)) {
            Some(Ok(t)) => vtree = Some(t),
            _ => break,
        }
    }
    match vtree {
        Some(vtree) => {
            let check = minimality_report(&minimal, &vtree)?;
            for (z, _) in &lambda {
                assert!(
                    check.kappa[*z].is_zero(),
                    "twisted model must be minimal at every selected vertex"
                );
                assert_eq!(
                    check.excess[*z], report.excess[*z],
                    "minimal discriminant valuation is an invariant of the curve"
                );
            }
        }
        None => {
            let inv = minimal.invariants();
            for (z, _) in &lambda {
                let mut bound = match vertex_valuation(tree, *z, &inv.delta) {
                    Valuation::Finite(v) => v / qi(12),
                    Valuation::Infinite => unreachable!("discriminant is nonzero"),
                };
                if let Valuation::Finite(v) = vertex_valuation(tree, *z, &inv.c4) {
                    bound = bound.min(v / qi(4));
                }
                if let Valuation::Finite(v) = vertex_valuation(tree, *z, &inv.c6) {
                    bound = bound.min(v / qi(6));
                }
                assert!(
                    lattice_floor(&bound, tree.n_lattice()).is_zero(),
                    "twisted model must be minimal at every selected vertex"
                );
            }
        }
    }
    assert!(
        coefficients_integral_on(&minimal, tree, &sel),
        "twisted model must be integral on the selected vertices"
    );
    Ok(TwistResult { transform: total, minimal, scale, kappa: lambda })
}
