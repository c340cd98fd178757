//! Trees of closed disks encoding strongly semistable models of the
//! projective line. A vertex is the Gauss point of a disk
//! `{v(t - center) >= r}`; edges join nested disks. The tree carries the
//! specialization map: zeros and poles of a function retract onto the tree,
//! and vertexwise Gauss valuations give the PL profile whose Laplacian is
//! the retracted divisor.

use std::collections::BTreeMap;
use std::fmt;

use num::integer::lcm;
use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplacian::{GraphDivisor, LaplacianFunction, MetricGraph};
use crate::poly::{disk_label, Poly, RationalFunction};
use crate::valued::{format_q, parse_q, Valuation, ValuedElement};
use crate::{qi, Q};

fn vdiff(a: &ValuedElement, b: &ValuedElement) -> Valuation {
    (a - b).valuation()
}

/// Gauss point of the closed disk `{v(t - center) >= radius}`.
#[derive(Clone, Debug)]
pub struct DiskVertex {
    center: ValuedElement,
    radius: Q,
}

impl DiskVertex {
    pub fn new(center: ValuedElement, radius: Q) -> Result<Self> {
        if radius.is_negative() {
            return Err(Error::InvalidInput(format!(
                "disk radius parameter {radius} must be nonnegative"
            )));
        }
        Ok(DiskVertex { center, radius })
    }

    pub fn center(&self) -> &ValuedElement {
        &self.center
    }

    pub fn radius(&self) -> &Q {
        &self.radius
    }

    /// Valuation of a factored function at this disk:
    /// `v(content) + Σ m · min(v(root − center), r)`.
    pub fn gauss_valuation(&self, f: &FactoredFunction) -> Q {
        f.gauss_at(&self.center, &self.radius)
    }

    /// Valuation of a rational function at this disk; infinite iff `f = 0`.
    pub fn gauss_valuation_rational(&self, f: &RationalFunction) -> Valuation {
        f.gauss_valuation(&self.center, &self.radius)
    }
}

/// Disks are compared as sets: equal radii and centers within radius.
impl PartialEq for DiskVertex {
    fn eq(&self, other: &Self) -> bool {
        self.radius == other.radius
            && vdiff(&self.center, &other.center) >= Valuation::Finite(self.radius.clone())
    }
}

impl Eq for DiskVertex {}

impl fmt::Display for DiskVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", disk_label(&self.center, &self.radius))
    }
}

/// Nonzero element of the function field with its zero/pole locus given
/// explicitly: `content · Π (t − root)^multiplicity`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredFunction {
    content: ValuedElement,
    factors: BTreeMap<ValuedElement, i64>,
}

impl FactoredFunction {
    pub fn new(content: ValuedElement, factors: Vec<(ValuedElement, i64)>) -> Result<Self> {
        if content.is_zero() {
            return Err(Error::InvalidInput(
                "factored function must be nonzero (zero content)".into(),
            ));
        }
        let mut map: BTreeMap<ValuedElement, i64> = BTreeMap::new();
        for (root, m) in factors {
            *map.entry(root).or_insert(0) += m;
        }
        map.retain(|_, m| *m != 0);
        Ok(FactoredFunction {
            content,
            factors: map,
        })
    }

    pub fn one() -> Self {
        FactoredFunction {
            content: ValuedElement::one(),
            factors: BTreeMap::new(),
        }
    }

    pub fn constant(c: ValuedElement) -> Result<Self> {
        FactoredFunction::new(c, Vec::new())
    }

    /// `t - root`.
    pub fn from_root(root: ValuedElement) -> Self {
        FactoredFunction {
            content: ValuedElement::one(),
            factors: [(root, 1)].into_iter().collect(),
        }
    }

    pub fn content(&self) -> &ValuedElement {
        &self.content
    }

    pub fn factors(&self) -> impl Iterator<Item = (&ValuedElement, i64)> {
        self.factors.iter().map(|(r, &m)| (r, m))
    }

    pub fn multiplicity(&self, root: &ValuedElement) -> i64 {
        self.factors.get(root).copied().unwrap_or(0)
    }

    /// Σ multiplicities: the degree of the affine zero/pole divisor, and
    /// minus the order at infinity.
    pub fn degree(&self) -> i64 {
        self.factors.values().sum()
    }

    pub fn scale(&self, c: &ValuedElement) -> Result<Self> {
        if c.is_zero() {
            return Err(Error::InvalidInput("cannot scale a function to zero".into()));
        }
        Ok(FactoredFunction {
            content: &self.content * c,
            factors: self.factors.clone(),
        })
    }

    pub fn checked_div(&self, rhs: &FactoredFunction) -> Result<FactoredFunction> {
        let content = if self.content == rhs.content {
            ValuedElement::one()
        } else {
            self.content.checked_div(&rhs.content)?
        };
        let mut factors = self.factors.clone();
        for (root, m) in &rhs.factors {
            *factors.entry(root.clone()).or_insert(0) -= m;
        }
        factors.retain(|_, m| *m != 0);
        Ok(FactoredFunction { content, factors })
    }

    pub fn pow(&self, n: i64) -> Result<FactoredFunction> {
        Ok(FactoredFunction {
            content: self.content.pow(n)?,
            factors: self
                .factors
                .iter()
                .filter_map(|(r, m)| {
                    let mm = m * n;
                    (mm != 0).then(|| (r.clone(), mm))
                })
                .collect(),
        })
    }

    /// Expand to an explicit fraction of polynomials.
    pub fn to_rational_function(&self) -> RationalFunction {
        let mut num = Poly::constant(self.content.clone());
        let mut den = Poly::one();
        for (root, m) in &self.factors {
            let lin = Poly::linear(root);
            if *m > 0 {
                num = &num * &lin.pow(*m as u32);
            } else {
                den = &den * &lin.pow((-m) as u32);
            }
        }
        RationalFunction::new(num, den).expect("denominator is a product of monic factors")
    }

    /// Gauss valuation on the disk `(center, r)`.
    pub fn gauss_at(&self, center: &ValuedElement, r: &Q) -> Q {
        let mut acc = self
            .content
            .valuation()
            .expect_finite("content of a nonzero function")
            .expect("nonzero content");
        for (root, m) in &self.factors {
            let v = vdiff(root, center)
                .min(Valuation::Finite(r.clone()))
                .expect_finite("min against a finite radius")
                .expect("capped by r");
            acc += qi(*m) * v;
        }
        acc
    }

    /// Net zero/pole count in `{v(xi - center) >= r}`.
    pub fn zeros_minus_poles_ge(&self, center: &ValuedElement, r: &Q) -> i64 {
        self.factors
            .iter()
            .filter(|(root, _)| vdiff(root, center) >= Valuation::Finite(r.clone()))
            .map(|(_, m)| m)
            .sum()
    }
}

impl std::ops::Mul for &FactoredFunction {
    type Output = FactoredFunction;
    fn mul(self, rhs: &FactoredFunction) -> FactoredFunction {
        let mut factors = self.factors.clone();
        for (root, m) in &rhs.factors {
            *factors.entry(root.clone()).or_insert(0) += m;
        }
        factors.retain(|_, m| *m != 0);
        FactoredFunction {
            content: &self.content * &rhs.content,
            factors,
        }
    }
}

impl fmt::Display for FactoredFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if !self.content.is_one() || self.factors.is_empty() {
            let c = self.content.to_string();
            parts.push(if self.content.num_terms() > 1 {
                format!("({c})")
            } else {
                c
            });
        }
        for (root, m) in &self.factors {
            let base = if root.is_zero() {
                "t".to_string()
            } else {
                let rs = root.to_string();
                match rs.strip_prefix('-') {
                    Some(mag) if root.num_terms() == 1 => format!("(t + {mag})"),
                    _ if root.num_terms() > 1 => format!("(t - ({rs}))"),
                    _ => format!("(t - {rs})"),
                }
            };
            parts.push(if *m == 1 {
                base
            } else {
                format!("{base}^{m}")
            });
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// Where a point of the line lands on the tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Retraction {
    Vertex(usize),
    EdgeInterior { edge: usize, radius: Q },
}

/// Chain of vertices replacing one original edge after subdivision,
/// ordered from the smaller-radius endpoint to the larger.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeChain {
    pub original_edge: usize,
    pub vertices: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawVertex {
    center: String,
    r: String,
}

#[derive(Serialize, Deserialize)]
struct RawTree {
    vertices: Vec<RawVertex>,
    edges: Vec<(usize, usize, String)>,
    n_lattice: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<u32>>,
}

/// Finite tree of disk vertices: a strongly semistable model of the line.
/// The root is the unique vertex of minimal radius; radii strictly increase
/// away from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTree", into = "RawTree")]
pub struct SkeletonTree {
    vertices: Vec<DiskVertex>,
    edges: Vec<(usize, usize)>,
    weights: Vec<u32>,
    n_lattice: u32,
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl SkeletonTree {
    pub fn new(
        vertices: Vec<DiskVertex>,
        edges: Vec<(usize, usize)>,
        n_lattice: u32,
    ) -> Result<Self> {
        let w = vec![0; vertices.len()];
        SkeletonTree::with_weights(vertices, edges, w, n_lattice)
    }

    pub fn with_weights(
        vertices: Vec<DiskVertex>,
        edges: Vec<(usize, usize)>,
        weights: Vec<u32>,
        n_lattice: u32,
    ) -> Result<Self> {
        let n = vertices.len();
        if n == 0 {
            return Err(Error::InvalidInput("tree needs at least one vertex".into()));
        }
        if n_lattice == 0 {
            return Err(Error::InvalidInput("lattice denominator must be positive".into()));
        }
        if weights.len() != n {
            return Err(Error::InvalidInput("one weight per vertex required".into()));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidInput(format!(
                "a tree on {n} vertices has {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        for v in &vertices {
            if !on_lattice(&v.radius, n_lattice) {
                return Err(Error::InvalidInput(format!(
                    "radius {} off the 1/{n_lattice} lattice",
                    format_q(&v.radius)
                )));
            }
            if !v.center.on_lattice(n_lattice) {
                return Err(Error::InvalidInput(format!(
                    "center {} has exponents off the 1/{n_lattice} lattice",
                    v.center
                )));
            }
        }
        for (i, a) in vertices.iter().enumerate() {
            for (j, b) in vertices.iter().enumerate().skip(i + 1) {
                if a == b {
                    return Err(Error::InvalidInput(format!(
                        "vertices {i} and {j} are the same disk {a}"
                    )));
                }
            }
        }
        for (u, v) in &edges {
            if *u >= n || *v >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) references a missing vertex"
                )));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("loop edge at vertex {u}")));
            }
            let (a, b) = (&vertices[*u], &vertices[*v]);
            if a.radius == b.radius {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) joins disks of equal radius; zero length"
                )));
            }
            let lo = a.radius.clone().min(b.radius.clone());
            if vdiff(&a.center, &b.center) < Valuation::Finite(lo) {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) joins non-nested disks {a} and {b}"
                )));
            }
        }
        // no vertex may sit inside another edge's segment
        for (w, dw) in vertices.iter().enumerate() {
            for (u, v) in &edges {
                if w == *u || w == *v {
                    continue;
                }
                let (a, b) = (&vertices[*u], &vertices[*v]);
                let (lo, child) = if a.radius < b.radius { (a, b) } else { (b, a) };
                if dw.radius > lo.radius
                    && dw.radius < child.radius
                    && vdiff(&dw.center, &child.center)
                        >= Valuation::Finite(dw.radius.clone())
                {
                    return Err(Error::InvalidInput(format!(
                        "vertex {w} ({dw}) lies in the interior of edge ({u}, {v})"
                    )));
                }
            }
        }
        // segments may meet only at a shared vertex
        for (i, (u1, v1)) in edges.iter().enumerate() {
            for (_j, (u2, v2)) in edges.iter().enumerate().skip(i + 1) {
                let seg = |u: usize, v: usize| {
                    let (a, b) = (&vertices[u], &vertices[v]);
                    if a.radius < b.radius {
                        (a.radius.clone(), b.radius.clone(), &b.center)
                    } else {
                        (b.radius.clone(), a.radius.clone(), &a.center)
                    }
                };
                let (l1, h1, c1) = seg(*u1, *v1);
                let (l2, h2, c2) = seg(*u2, *v2);
                let lo = l1.max(l2);
                let mut hi = h1.min(h2);
                if let Some(cap) = vdiff(c1, c2).as_finite() {
                    hi = hi.min(cap.clone());
                }
                if lo > hi {
                    continue;
                }
                let shared_vertex_there = [*u1, *v1]
                    .iter()
                    .any(|a| [*u2, *v2].contains(a) && vertices[*a].radius == lo);
                if lo < hi || !shared_vertex_there {
                    return Err(Error::InvalidInput(format!(
                        "edges ({u1}, {v1}) and ({u2}, {v2}) overlap between radii {} and {}",
                        format_q(&lo),
                        format_q(&hi)
                    )));
                }
            }
        }
        // connectivity and orientation out of the minimal-radius vertex
        let root = (0..n)
            .min_by(|&a, &b| vertices[a].radius.cmp(&vertices[b].radius))
            .expect("nonempty");
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut seen = vec![false; n];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(x) = stack.pop() {
            for (u, v) in &edges {
                for (p, q) in [(*u, *v), (*v, *u)] {
                    if p == x && !seen[q] {
                        seen[q] = true;
                        parent[q] = Some(x);
                        children[x].push(q);
                        stack.push(q);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidInput("tree is not connected".into()));
        }
        for (q, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                if vertices[*p].radius >= vertices[q].radius {
                    return Err(Error::InvalidInput(format!(
                        "radius does not increase from vertex {p} to {q} away from the root"
                    )));
                }
            }
        }
        for c in children.iter_mut() {
            c.sort_unstable();
        }
        Ok(SkeletonTree {
            vertices,
            edges,
            weights,
            n_lattice,
            root,
            parent,
            children,
        })
    }

    pub fn vertices(&self) -> &[DiskVertex] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &DiskVertex {
        &self.vertices[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn n_lattice(&self) -> u32 {
        self.n_lattice
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn edge_length(&self, e: usize) -> Q {
        let (u, v) = self.edges[e];
        (&self.vertices[u].radius - &self.vertices[v].radius).abs()
    }

    /// Regular models have every edge of length 1 in the working
    /// normalization, i.e. 1/n on the (1/n)-lattice.
    pub fn is_regular(&self) -> bool {
        let unit = Q::new(1.into(), self.n_lattice.into());
        (0..self.edges.len()).all(|e| self.edge_length(e) == unit)
    }

    /// The intersection graph as a weighted metric graph.
    pub fn metric_graph(&self) -> MetricGraph {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(e, (u, v))| (*u, *v, self.edge_length(e)))
            .collect();
        MetricGraph::with_weights(
            self.vertices.len(),
            edges,
            self.weights.clone(),
            self.n_lattice,
        )
        .expect("validated tree is a valid metric graph")
    }

    /// Retraction of the type-1 point `t = a` onto the tree.
    pub fn retract_point(&self, a: &ValuedElement) -> Retraction {
        self.retract(a, &Valuation::Infinite)
    }

    /// Retraction of the disk point `(a, cap)`; `cap = ∞` is an ordinary
    /// point of the line.
    pub(crate) fn retract(&self, a: &ValuedElement, cap: &Valuation) -> Retraction {
        let s = |i: usize| -> Q {
            vdiff(a, &self.vertices[i].center)
                .min(Valuation::Finite(self.vertices[i].radius.clone()))
                .min(cap.clone())
                .expect_finite("capped by a finite radius")
                .expect("finite")
        };
        let mut best = 0;
        let mut r_star = s(0);
        for i in 1..self.vertices.len() {
            let si = s(i);
            if si > r_star {
                r_star = si;
                best = i;
            }
        }
        if r_star <= self.vertices[self.root].radius {
            return Retraction::Vertex(self.root);
        }
        if let Some(v) = (0..self.vertices.len())
            .find(|&v| self.vertices[v].radius == r_star && s(v) == r_star)
        {
            return Retraction::Vertex(v);
        }
        // walk rootward from the deepest witness to the edge spanning r*
        let mut w = best;
        while let Some(p) = self.parent[w] {
            if self.vertices[p].radius < r_star {
                let edge = self
                    .edges
                    .iter()
                    .position(|&(x, y)| (x, y) == (p, w) || (x, y) == (w, p))
                    .expect("parent edge exists");
                return Retraction::EdgeInterior {
                    edge,
                    radius: r_star,
                };
            }
            w = p;
        }
        Retraction::Vertex(self.root)
    }

    /// Retract the divisor of a factored function onto the tree. The point
    /// at infinity lands on the root vertex with the balancing multiplicity
    /// `-deg f`.
    pub fn specialize_factored(&self, f: &FactoredFunction) -> Result<GraphDivisor> {
        let mut coeffs = vec![0i64; self.vertices.len()];
        for (root, m) in f.factors() {
            match self.retract_point(root) {
                Retraction::Vertex(v) => coeffs[v] += m,
                Retraction::EdgeInterior { edge, radius } => {
                    let (u, v) = self.edges[edge];
                    return Err(Error::ModelNotAdapted(format!(
                        "root {root} retracts to the interior of edge ({u}, {v}) at radius {}",
                        format_q(&radius)
                    )));
                }
            }
        }
        coeffs[self.root] -= f.degree();
        let d = GraphDivisor::new(coeffs.into_iter().map(qi).collect());
        debug_assert!(d.degree().is_zero());
        Ok(d)
    }

    /// Adaptedness for a function given only as a fraction: no zero or pole
    /// may retract to an edge interior. Checked through Newton polygons on
    /// each edge's center line, with zeros and poles at the same retraction
    /// point allowed to cancel (they are not part of the divisor).
    pub fn check_adapted_rational(&self, f: &RationalFunction) -> Result<()> {
        for (e, (u, v)) in self.edges.iter().enumerate() {
            let (p, c) = self.oriented(e);
            let line = &self.vertices[c].center;
            let lo = &self.vertices[p].radius;
            let hi = &self.vertices[c].radius;
            let mut bps = f.num().newton_breakpoints(line);
            bps.extend(f.den().newton_breakpoints(line));
            bps.sort();
            bps.dedup();
            for rho in bps {
                if &rho <= lo || &rho >= hi {
                    continue;
                }
                let net = f.zeros_minus_poles_ge(line, &rho) - f.zeros_minus_poles_gt(line, &rho);
                if net != 0 {
                    return Err(Error::ModelNotAdapted(format!(
                        "divisor point of net multiplicity {net} at {} inside edge ({u}, {v})",
                        disk_label(line, &rho)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Retract the divisor of a rational function onto the tree using
    /// Newton-polygon root counts; no factorization required.
    pub fn specialize_rational(&self, f: &RationalFunction) -> Result<GraphDivisor> {
        if f.is_zero() {
            return Err(Error::InvalidInput("the zero function has no divisor".into()));
        }
        self.check_adapted_rational(f)?;
        let disk_count = |v: usize| -> i64 {
            f.zeros_minus_poles_ge(&self.vertices[v].center, &self.vertices[v].radius)
        };
        let mut coeffs = vec![0i64; self.vertices.len()];
        for v in 0..self.vertices.len() {
            let mut c = if v == self.root { 0 } else { disk_count(v) };
            for &u in self.children(v) {
                c -= disk_count(u);
            }
            coeffs[v] = c;
        }
        let d = GraphDivisor::new(coeffs.into_iter().map(qi).collect());
        debug_assert!(d.degree().is_zero());
        Ok(d)
    }

    /// Gauss-valuation profile of a factored function over the vertices.
    pub fn valuation_profile(&self, f: &FactoredFunction) -> LaplacianFunction {
        LaplacianFunction::new(
            self.vertices.iter().map(|v| v.gauss_valuation(f)).collect(),
            self.n_lattice,
        )
    }

    /// Gauss-valuation profile of a nonzero rational function.
    pub fn valuation_profile_rational(&self, f: &RationalFunction) -> Result<LaplacianFunction> {
        if f.is_zero() {
            return Err(Error::InvalidInput("the zero function has no profile".into()));
        }
        let values = self
            .vertices
            .iter()
            .map(|v| {
                v.gauss_valuation_rational(f)
                    .expect_finite("valuation of a nonzero function")
            })
            .collect::<Result<Vec<Q>>>()?;
        Ok(LaplacianFunction::new(values, self.n_lattice))
    }

    /// Edge `e` as (parent, child): radius grows from parent to child.
    pub fn oriented(&self, e: usize) -> (usize, usize) {
        let (u, v) = self.edges[e];
        if self.vertices[u].radius < self.vertices[v].radius {
            (u, v)
        } else {
            (v, u)
        }
    }

    /// Subdivide every edge into pieces of length exactly 1/n, recording the
    /// vertex chain replacing each original edge. The lattice of the result
    /// is lcm(current, n).
    pub fn regularize(&self, n: u32) -> Result<(SkeletonTree, Vec<EdgeChain>)> {
        if n == 0 {
            return Err(Error::InvalidInput("subdivision parameter must be positive".into()));
        }
        let step = Q::new(1.into(), n.into());
        let mut vertices = self.vertices.clone();
        let mut weights = self.weights.clone();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut chains = Vec::new();
        for e in 0..self.edges.len() {
            let (p, c) = self.oriented(e);
            let len = self.edge_length(e);
            let pieces = &len / &step;
            if !pieces.is_integer() {
                return Err(Error::InvalidInput(format!(
                    "edge ({p}, {c}) of length {} does not split into 1/{n} pieces",
                    format_q(&len)
                )));
            }
            let k = i64::try_from(pieces.to_integer()).map_err(|_| {
                Error::InvalidInput("subdivision produces too many vertices".into())
            })?;
            let mut chain = vec![p];
            let mut prev = p;
            for i in 1..k {
                let r = &self.vertices[p].radius + &(qi(i) * &step);
                let nv = DiskVertex::new(self.vertices[c].center.clone(), r)?;
                vertices.push(nv);
                weights.push(0);
                let idx = vertices.len() - 1;
                edges.push((prev, idx));
                chain.push(idx);
                prev = idx;
            }
            edges.push((prev, c));
            chain.push(c);
            chains.push(EdgeChain {
                original_edge: e,
                vertices: chain,
            });
        }
        let tree = SkeletonTree::with_weights(vertices, edges, weights, lcm(self.n_lattice, n))?;
        Ok((tree, chains))
    }

    /// Refine the tree so that the point `t = a` retracts to a vertex,
    /// splitting one edge if needed. Plumbing for adapting a model to new
    /// branch points; never invoked implicitly.
    pub fn with_retraction_vertex(&self, a: &ValuedElement) -> Result<SkeletonTree> {
        match self.retract_point(a) {
            Retraction::Vertex(_) => Ok(self.clone()),
            Retraction::EdgeInterior { edge, radius } => {
                if !on_lattice(&radius, self.n_lattice) {
                    return Err(Error::InvalidInput(format!(
                        "retraction radius {} off the 1/{} lattice; refine the lattice first",
                        format_q(&radius),
                        self.n_lattice
                    )));
                }
                let mut vertices = self.vertices.clone();
                let mut weights = self.weights.clone();
                vertices.push(DiskVertex::new(a.clone(), radius)?);
                weights.push(0);
                let new = vertices.len() - 1;
                let (u, v) = self.edges[edge];
                let mut edges = self.edges.clone();
                edges[edge] = (u, new);
                edges.push((new, v));
                SkeletonTree::with_weights(vertices, edges, weights, self.n_lattice)
            }
        }
    }
}

fn on_lattice(q: &Q, n: u32) -> bool {
    (q * qi(n as i64)).is_integer()
}

impl TryFrom<RawTree> for SkeletonTree {
    type Error = Error;
    fn try_from(raw: RawTree) -> Result<Self> {
        let mut vertices = Vec::with_capacity(raw.vertices.len());
        for rv in &raw.vertices {
            let center: ValuedElement = rv.center.parse()?;
            let r = parse_q(&rv.r)?;
            vertices.push(DiskVertex::new(center, r)?);
        }
        let mut edges = Vec::with_capacity(raw.edges.len());
        for (u, v, len) in &raw.edges {
            edges.push((*u, *v));
            let stated = parse_q(len)?;
            let (Some(a), Some(b)) = (vertices.get(*u), vertices.get(*v)) else {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) references a missing vertex"
                )));
            };
            let actual = (&a.radius - &b.radius).abs();
            if stated != actual {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) states length {} but the radii differ by {}",
                    format_q(&stated),
                    format_q(&actual)
                )));
            }
        }
        let weights = raw
            .weights
            .unwrap_or_else(|| vec![0; raw.vertices.len()]);
        SkeletonTree::with_weights(vertices, edges, weights, raw.n_lattice)
    }
}

impl From<SkeletonTree> for RawTree {
    fn from(t: SkeletonTree) -> RawTree {
        let vertices = t
            .vertices
            .iter()
            .map(|v| RawVertex {
                center: v.center.to_string(),
                r: format_q(&v.radius),
            })
            .collect();
        let edges = (0..t.edges.len())
            .map(|e| {
                let (u, v) = t.edges[e];
                (u, v, format_q(&t.edge_length(e)))
            })
            .collect();
        let weights = if t.weights.iter().all(|&w| w == 0) {
            None
        } else {
            Some(t.weights.clone())
        };
        RawTree {
            vertices,
            edges,
            n_lattice: t.n_lattice,
            weights,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_factored_function, parse_rational_function, parse_valued_element};
    use crate::laplacian::{extend_pl, laplacian_apply};
    use crate::qr;

    fn dv(center: &str, r: i64) -> DiskVertex {
        DiskVertex::new(parse_valued_element(center).unwrap(), qi(r)).unwrap()
    }

    fn dvq(center: &str, r: Q) -> DiskVertex {
        DiskVertex::new(parse_valued_element(center).unwrap(), r).unwrap()
    }

    /// The running two-vertex example: Gauss disk and the unit disk around 0.
    fn two_vertex() -> SkeletonTree {
        SkeletonTree::new(vec![dv("0", 0), dv("0", 1)], vec![(0, 1)], 1).unwrap()
    }

    #[test]
    fn disk_identity_is_semantic() {
        assert_eq!(dv("0", 1), dv("pi^2", 1));
        assert_ne!(dv("0", 1), dv("1", 1));
        assert_ne!(dv("0", 1), dv("0", 2));
        assert!(DiskVertex::new(ValuedElement::zero(), qi(-1)).is_err());
    }

    #[test]
    fn tree_validation_catalog() {
        // duplicates under semantic equality
        assert!(SkeletonTree::new(vec![dv("0", 1), dv("pi", 1)], vec![(0, 1)], 1).is_err());
        // non-nested adjacency
        assert!(SkeletonTree::new(vec![dv("0", 1), dv("1", 2)], vec![(0, 1)], 1).is_err());
        // zero-length edge
        assert!(SkeletonTree::new(vec![dv("0", 1), dv("1", 1)], vec![(0, 1)], 1).is_err());
        // wrong edge count / disconnected
        assert!(SkeletonTree::new(vec![dv("0", 0), dv("0", 1)], vec![], 1).is_err());
        assert!(
            SkeletonTree::new(vec![dv("0", 0), dv("0", 1), dv("0", 2)], vec![(0, 1), (0, 1)], 1)
                .is_err()
        );
        // vertex inside another edge
        assert!(SkeletonTree::new(
            vec![dv("0", 0), dv("0", 2), dv("0", 1)],
            vec![(0, 1), (1, 2)],
            1
        )
        .is_err());
        // overlapping segments from a mis-attached branch
        assert!(SkeletonTree::new(
            vec![dv("0", 0), dv("0", 2), dv("pi^5", 3)],
            vec![(0, 1), (0, 2)],
            1
        )
        .is_err());
        // off-lattice radius
        assert!(SkeletonTree::new(vec![dvq("0", qr(1, 2)), dv("0", 1)], vec![(0, 1)], 1).is_err());
        assert!(SkeletonTree::new(vec![dvq("0", qr(1, 2)), dv("0", 1)], vec![(0, 1)], 2).is_ok());
        // a proper branching tree passes
        let t = SkeletonTree::new(
            vec![dv("0", 0), dv("0", 1), dv("1", 1), dv("0", 2), dv("pi", 2)],
            vec![(0, 1), (0, 2), (1, 3), (1, 4)],
            1,
        )
        .unwrap();
        assert_eq!(t.root(), 0);
        assert_eq!(t.children(1), &[3, 4]);
        assert_eq!(t.parent(2), Some(0));
    }

    #[test]
    fn gauss_valuation_examples() {
        let v = dv("0", 2);
        let f = parse_factored_function("pi*(t - pi)").unwrap();
        assert_eq!(v.gauss_valuation(&f), qi(2));
        assert_eq!(dv("0", 0).gauss_valuation(&f), qi(1));
        assert_eq!(v.gauss_valuation(&FactoredFunction::one()), qi(0));
        // factored and expanded forms agree
        let rf = f.to_rational_function();
        assert_eq!(
            v.gauss_valuation_rational(&rf),
            Valuation::Finite(v.gauss_valuation(&f))
        );
    }

    #[test]
    fn retraction_examples() {
        let t = two_vertex();
        let at = |s: &str| t.retract_point(&parse_valued_element(s).unwrap());
        assert_eq!(at("0"), Retraction::Vertex(1));
        assert_eq!(at("1"), Retraction::Vertex(0));
        assert_eq!(at("pi"), Retraction::Vertex(1));
        assert_eq!(at("pi^-3"), Retraction::Vertex(0));
        // interior landing on a longer edge
        let deep = SkeletonTree::new(vec![dv("0", 0), dv("0", 2)], vec![(0, 1)], 1).unwrap();
        assert_eq!(
            deep.retract_point(&parse_valued_element("pi").unwrap()),
            Retraction::EdgeInterior {
                edge: 0,
                radius: qi(1)
            }
        );
        // branch selection: pi + pi^2 follows the pi-branch
        let branchy = SkeletonTree::new(
            vec![dv("0", 0), dv("0", 1), dv("1", 1), dv("pi", 2), dv("0", 2)],
            vec![(0, 1), (0, 2), (1, 3), (1, 4)],
            1,
        )
        .unwrap();
        assert_eq!(
            branchy.retract_point(&parse_valued_element("pi + pi^2").unwrap()),
            Retraction::Vertex(3)
        );
        assert_eq!(
            branchy.retract_point(&parse_valued_element("1 + pi^5").unwrap()),
            Retraction::Vertex(2)
        );
    }

    #[test]
    fn retraction_is_idempotent_on_tree_points() {
        let t = SkeletonTree::new(
            vec![dv("0", 0), dv("0", 1), dv("1", 1), dv("0", 3), dv("pi", 2)],
            vec![(0, 1), (0, 2), (1, 3), (1, 4)],
            1,
        )
        .unwrap();
        for (i, v) in t.vertices().iter().enumerate() {
            assert_eq!(
                t.retract(v.center(), &Valuation::Finite(v.radius().clone())),
                Retraction::Vertex(i)
            );
        }
        // an interior point retracts to itself
        let p = parse_valued_element("0").unwrap();
        let r = t.retract(&p, &Valuation::Finite(qi(2)));
        assert_eq!(
            r,
            Retraction::EdgeInterior {
                edge: 2,
                radius: qi(2)
            }
        );
    }

    #[test]
    fn specialization_examples() {
        let t = two_vertex();
        let f = parse_factored_function("t").unwrap();
        let d = t.specialize_factored(&f).unwrap();
        assert_eq!(d.coeffs(), &[qi(-1), qi(1)]);
        let one = FactoredFunction::one();
        assert!(t.specialize_factored(&one).unwrap().is_zero());
        // the discriminant of the running example: -432*t*(t + 4/27)
        let disc = parse_factored_function("-432*t*(t + 4/27)").unwrap();
        let d = t.specialize_factored(&disc).unwrap();
        assert_eq!(d.coeffs(), &[qi(-1), qi(1)]);
        // unfactored route agrees
        let disc_rf = parse_rational_function("-432*t^2 - 64*t").unwrap();
        assert_eq!(t.specialize_rational(&disc_rf).unwrap().coeffs(), d.coeffs());
        // non-adapted root
        let deep = SkeletonTree::new(vec![dv("0", 0), dv("0", 2)], vec![(0, 1)], 1).unwrap();
        let g = parse_factored_function("t - pi").unwrap();
        assert!(matches!(
            deep.specialize_factored(&g),
            Err(Error::ModelNotAdapted(_))
        ));
        assert!(matches!(
            deep.specialize_rational(&g.to_rational_function()),
            Err(Error::ModelNotAdapted(_))
        ));
        // cancellation: a zero and a pole at the same interior point is fine
        let h = parse_rational_function("(t - pi)/(t - 2*pi)").unwrap();
        assert!(deep.check_adapted_rational(&h).is_ok());
        assert_eq!(deep.specialize_rational(&h).unwrap().coeffs(), &[qi(0), qi(0)]);
    }

    #[test]
    fn profile_laplacian_matches_specialization() {
        let t = SkeletonTree::new(
            vec![dv("0", 0), dv("0", 1), dv("1", 1), dv("pi", 2), dv("0", 2)],
            vec![(0, 1), (0, 2), (1, 3), (1, 4)],
            1,
        )
        .unwrap();
        let f = parse_factored_function("pi^2*t^2*(t - pi)^-1*(t - 1 - pi^5)^3").unwrap();
        let phi = t.valuation_profile(&f);
        let delta = laplacian_apply(&t.metric_graph(), &phi).unwrap();
        let spec = t.specialize_factored(&f).unwrap();
        assert_eq!(delta, spec);
        // and through the unfactored route
        let rf = f.to_rational_function();
        assert_eq!(t.specialize_rational(&rf).unwrap(), spec);
        let phi2 = t.valuation_profile_rational(&rf).unwrap();
        assert_eq!(phi2.values(), phi.values());
    }

    #[test]
    fn regularize_examples() {
        let deep = SkeletonTree::new(vec![dv("0", 0), dv("0", 2)], vec![(0, 1)], 1).unwrap();
        let (t1, chains) = deep.regularize(1).unwrap();
        assert_eq!(t1.vertices().len(), 3);
        assert_eq!(t1.edges().len(), 2);
        assert!(t1.is_regular());
        assert_eq!(chains[0].vertices, vec![0, 2, 1]);
        let unit = two_vertex();
        let (same, _) = unit.regularize(1).unwrap();
        assert_eq!(same.vertices().len(), 2);
        let (t3, chains) = unit.regularize(3).unwrap();
        assert_eq!(t3.vertices().len(), 4);
        assert_eq!(t3.n_lattice(), 3);
        assert!(t3.is_regular());
        assert_eq!(chains[0].vertices.len(), 4);
        // metric preserved between original vertices
        assert_eq!(
            t3.vertex(chains[0].vertices[1]).radius(),
            &qr(1, 3)
        );
        // profile at new vertices is the affine interpolation of the old edge
        let f = parse_factored_function("t - pi").unwrap();
        let phi0 = unit.valuation_profile(&f);
        let phi3 = t3.valuation_profile(&f);
        let g0 = unit.metric_graph();
        for (i, &v) in chains[0].vertices.iter().enumerate() {
            let x = qr(i as i64, 3);
            assert_eq!(
                phi3.values()[v],
                extend_pl(&g0, &phi0, 0, &x).unwrap(),
                "interpolation at offset {i}/3"
            );
        }
    }

    #[test]
    fn retraction_vertex_insertion() {
        let deep = SkeletonTree::new(vec![dv("0", 0), dv("0", 2)], vec![(0, 1)], 1).unwrap();
        let a = parse_valued_element("pi").unwrap();
        let refined = deep.with_retraction_vertex(&a).unwrap();
        assert_eq!(refined.vertices().len(), 3);
        assert_eq!(refined.retract_point(&a), Retraction::Vertex(2));
        let g = parse_factored_function("t - pi").unwrap();
        let d = refined.specialize_factored(&g).unwrap();
        assert_eq!(d.coeffs(), &[qi(-1), qi(0), qi(1)]);
        // already adapted: unchanged
        let t = refined.with_retraction_vertex(&a).unwrap();
        assert_eq!(t.vertices().len(), 3);
    }

    #[test]
    fn json_round_trip_and_length_check() {
        let t = SkeletonTree::new(
            vec![dv("0", 0), dv("0", 1), dv("1", 1), dv("pi", 2)],
            vec![(0, 1), (0, 2), (1, 3)],
            1,
        )
        .unwrap();
        let s = serde_json::to_string(&t).unwrap();
        let back: SkeletonTree = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        let good = r#"{"vertices":[{"center":"0","r":"0"},{"center":"0","r":"1"}],"edges":[[0,1,"1"]],"n_lattice":1}"#;
        let parsed: SkeletonTree = serde_json::from_str(good).unwrap();
        assert_eq!(parsed, two_vertex());
        let bad_len = r#"{"vertices":[{"center":"0","r":"0"},{"center":"0","r":"1"}],"edges":[[0,1,"2"]],"n_lattice":1}"#;
        assert!(serde_json::from_str::<SkeletonTree>(bad_len).is_err());
    }
}
