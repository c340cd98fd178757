//! Reduction-type classification over pieces of the skeleton: vertices are
//! judged pointwise, selected edges over their open interiors, all on a
//! minimally twisted model.

use std::collections::BTreeSet;
use std::fmt;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::laplacian::SubgraphSelection;
use crate::skeleton::{FactoredFunction, SkeletonTree};
use crate::weierstrass::{
    construct_s_minimal_twist, vertical_profile, VerticalProfiles, WeierstrassEquation,
};
use crate::Q;

/// Fiber type over a piece of the skeleton. `Mixed` means the pieces do not
/// share a single type; the first three only ever describe uniform behavior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReductionType {
    Good,
    Multiplicative,
    Additive,
    Mixed,
}

impl ReductionType {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReductionType::Good => "good",
            ReductionType::Multiplicative => "multiplicative",
            ReductionType::Additive => "additive",
            ReductionType::Mixed => "mixed",
        }
    }
}

impl fmt::Display for ReductionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The minimal-model valuations backing a verdict, per closure vertex.
/// `None` in `v_c4` is the +∞ sentinel for an identically-zero `c₄`.
#[derive(Clone, Debug, PartialEq)]
pub struct Evidence {
    pub vertices: Vec<usize>,
    pub v_delta: Vec<Q>,
    pub v_c4: Vec<Option<Q>>,
    pub c4_identically_zero: bool,
    /// Scaling function of the twist that produced the minimal model.
    pub scale: FactoredFunction,
    /// True when minimization over every tree vertex was infeasible and the
    /// model is only minimal over the selection's vertex support.
    pub support_only: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub verdict: ReductionType,
    pub evidence: Evidence,
}

fn point_type(vd: &Q, vc4: Option<&Q>) -> ReductionType {
    assert!(!vd.is_negative(), "minimal model must have nonnegative discriminant valuation");
    if vd.is_zero() {
        return ReductionType::Good;
    }
    match vc4 {
        None => ReductionType::Additive,
        Some(v) if v.is_zero() => ReductionType::Multiplicative,
        Some(v) => {
            assert!(v.is_positive(), "minimal model must have nonnegative c4 valuation");
            ReductionType::Additive
        }
    }
}

/// Type shared by every point of an open edge segment, given endpoint
/// valuations. Both profiles are affine on the edge, so the interior is
/// uniform: Δ vanishes on the interior only if it vanishes at both ends,
/// and likewise for c₄.
fn interior_type(vd: (&Q, &Q), vc4: Option<(&Q, &Q)>) -> ReductionType {
    assert!(
        !vd.0.is_negative() && !vd.1.is_negative(),
        "minimal model must have nonnegative discriminant valuation"
    );
    if vd.0.is_zero() && vd.1.is_zero() {
        return ReductionType::Good;
    }
    match vc4 {
        None => ReductionType::Additive,
        Some((a, b)) if a.is_zero() && b.is_zero() => ReductionType::Multiplicative,
        Some(_) => ReductionType::Additive,
    }
}

fn uniform(types: impl IntoIterator<Item = ReductionType>) -> ReductionType {
    let mut it = types.into_iter();
    let first = it.next().expect("at least one piece");
    if it.all(|t| t == first) {
        first
    } else {
        ReductionType::Mixed
    }
}

struct MinimalData {
    profiles: VerticalProfiles,
    scale: FactoredFunction,
    support_only: bool,
}

/// Twist to a model minimal on every vertex at once when possible, else on
/// the given support only.
fn minimal_profiles(
    w: &WeierstrassEquation,
    tree: &SkeletonTree,
    support: &[usize],
) -> Result<MinimalData> {
    let everything: Vec<usize> = (0..tree.vertices().len()).collect();
    let (twist, support_only) = match construct_s_minimal_twist(w, tree, &everything) {
        Ok(t) => (t, false),
        Err(Error::TwistInfeasible(_)) => (construct_s_minimal_twist(w, tree, support)?, true),
        Err(e) => return Err(e),
    };
    let profiles = vertical_profile(&twist.minimal, tree)?;
    Ok(MinimalData { profiles, scale: twist.scale, support_only })
}

/// Classify the reduction type of the curve over the selected vertices and
/// open edge interiors. The verdict is read off the Δ and c₄ profiles of a
/// minimally twisted model and does not depend on which minimal model is
/// chosen.
pub fn classify(
    w: &WeierstrassEquation,
    tree: &SkeletonTree,
    sel: &SubgraphSelection,
) -> Result<Classification> {
    let g = tree.metric_graph();
    let closure: Vec<usize> = sel.closure_vertices(&g).into_iter().collect();
    if closure.is_empty() {
        return Err(Error::InvalidInput("cannot classify over an empty selection".into()));
    }
    let data = minimal_profiles(w, tree, &closure)?;
    let phi_delta = &data.profiles.delta;
    let phi_c4 = data.profiles.c4.as_ref();

    let mut types = Vec::new();
    for &z in &sel.vertices {
        types.push(point_type(phi_delta.value(z), phi_c4.map(|p| p.value(z))));
    }
    for &e in &sel.edges {
        let (a, b) = (g.edges()[e].0, g.edges()[e].1);
        types.push(interior_type(
            (phi_delta.value(a), phi_delta.value(b)),
            phi_c4.map(|p| (p.value(a), p.value(b))),
        ));
    }

    let verdict = uniform(types);
    let evidence = Evidence {
        v_delta: closure.iter().map(|&z| phi_delta.value(z).clone()).collect(),
        v_c4: closure
            .iter()
            .map(|&z| phi_c4.map(|p| p.value(z).clone()))
            .collect(),
        vertices: closure,
        c4_identically_zero: phi_c4.is_none(),
        scale: data.scale,
        support_only: data.support_only,
    };
    Ok(Classification { verdict, evidence })
}

/// The selection with every selected edge's endpoints adjoined as vertices.
pub fn completion_closure(tree: &SkeletonTree, sel: &SubgraphSelection) -> SubgraphSelection {
    let g = tree.metric_graph();
    SubgraphSelection {
        vertices: sel.closure_vertices(&g),
        edges: sel.edges.clone(),
    }
}

/// Map a selection through `regularize(n)`: vertices keep their ids, each
/// selected edge becomes the chain of edges that replaced it.
fn map_selection(
    tree: &SkeletonTree,
    sel: &SubgraphSelection,
    n: u32,
) -> Result<(SkeletonTree, SubgraphSelection)> {
    let (fine, chains) = tree.regularize(n)?;
    let fine_g = fine.metric_graph();
    let vertices = sel.vertices.clone();
    let mut edges: BTreeSet<usize> = BTreeSet::new();
    for &e in &sel.edges {
        for pair in chains[e].vertices.windows(2) {
            let idx = fine_g
                .edges()
                .iter()
                .position(|(a, b, _)| (*a, *b) == (pair[0], pair[1]) || (*a, *b) == (pair[1], pair[0]))
                .expect("replacement chain edge must exist");
            edges.insert(idx);
        }
    }
    let mapped = SubgraphSelection::new(&fine_g, vertices, edges)?;
    Ok((fine, mapped))
}

/// Subdivide into pieces of length 1/n and classify every vertex of the
/// mapped selection individually. Returns the subdivided tree together with
/// sorted (vertex, type) pairs covering the selected vertices and the full
/// replacement chains of selected edges.
///
/// When the selection as a whole has a uniform (non-`Mixed`) type, the
/// pointwise types on the selection itself must agree with it; that is
/// rechecked here. Chain endpoints that were not selected as vertices are
/// reported but exempt: an open edge does not contain them.
pub fn classify_on_subdivision(
    w: &WeierstrassEquation,
    tree: &SkeletonTree,
    sel: &SubgraphSelection,
    n: u32,
) -> Result<(SkeletonTree, Vec<(usize, ReductionType)>)> {
    let overall = classify(w, tree, sel)?;
    let (fine, chains) = tree.regularize(n)?;
    let fine_g = fine.metric_graph();

    let mut report: BTreeSet<usize> = sel.vertices.clone();
    // Interior chain vertices lie inside selected edges; endpoints do not.
    let mut in_selection: BTreeSet<usize> = sel.vertices.clone();
    for &e in &sel.edges {
        let chain = &chains[e].vertices;
        report.extend(chain.iter().copied());
        in_selection.extend(chain[1..chain.len() - 1].iter().copied());
    }

    let mut out = Vec::new();
    for &z in &report {
        let single = SubgraphSelection::new(&fine_g, [z], [])?;
        let c = classify(w, &fine, &single)?;
        if overall.verdict != ReductionType::Mixed && in_selection.contains(&z) {
            assert_eq!(
                c.verdict, overall.verdict,
                "a uniform verdict must hold pointwise on the selection"
            );
        }
        out.push((z, c.verdict));
    }
    Ok((fine, out))
}

/// Classify before and after subdividing to the (1/n)-lattice and report
/// whether a Good or Multiplicative verdict survived. Always true; a false
/// return is a bug sentinel for the test suite.
pub fn base_change_stability(
    w: &WeierstrassEquation,
    tree: &SkeletonTree,
    sel: &SubgraphSelection,
    n: u32,
) -> Result<bool> {
    let before = classify(w, tree, sel)?;
    let (fine, mapped) = map_selection(tree, sel, n)?;
    let after = classify(w, &fine, &mapped)?;
    Ok(match before.verdict {
        ReductionType::Good | ReductionType::Multiplicative => before.verdict == after.verdict,
        _ => true,
    })
}
