//! Divisor theory on finite weighted metric graphs: the length-weighted
//! Laplacian, principality over the working lattice, the anchored solver,
//! PL extension along edges, slopes, and sign checks on closed subgraphs.

use std::collections::BTreeSet;
use std::str::FromStr;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::{qi, Q};

fn on_lattice(q: &Q, n: u32) -> bool {
    (q * qi(n as i64)).is_integer()
}

/// Finite connected multigraph with positive rational edge lengths on the
/// working lattice (1/n)Z and a nonnegative integer weight per vertex.
/// Loop edges are rejected; parallel edges are fine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricGraph {
    n_vertices: usize,
    edges: Vec<(usize, usize, Q)>,
    weights: Vec<u32>,
    lattice: u32,
}

impl MetricGraph {
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize, Q)>, lattice: u32) -> Result<Self> {
        MetricGraph::with_weights(n_vertices, edges, vec![0; n_vertices], lattice)
    }

    pub fn with_weights(
        n_vertices: usize,
        edges: Vec<(usize, usize, Q)>,
        weights: Vec<u32>,
        lattice: u32,
    ) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::InvalidInput("graph needs at least one vertex".into()));
        }
        if lattice == 0 {
            return Err(Error::InvalidInput("lattice denominator must be positive".into()));
        }
        if weights.len() != n_vertices {
            return Err(Error::InvalidInput("one weight per vertex required".into()));
        }
        for (u, v, l) in &edges {
            if *u >= n_vertices || *v >= n_vertices {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) references a missing vertex"
                )));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("loop edge at vertex {u}")));
            }
            if !l.is_positive() {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) has non-positive length {l}"
                )));
            }
            if !on_lattice(l, lattice) {
                return Err(Error::InvalidInput(format!(
                    "edge length {l} is not a multiple of 1/{lattice}"
                )));
            }
        }
        let g = MetricGraph {
            n_vertices,
            edges,
            weights,
            lattice,
        };
        if !g.is_connected() {
            return Err(Error::InvalidInput("graph must be connected".into()));
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for (a, b, _) in &self.edges {
                for (x, y) in [(*a, *b), (*b, *a)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn vertex_count(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize, Q)] {
        &self.edges
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn lattice(&self) -> u32 {
        self.lattice
    }
}

/// Formal rational combination of vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphDivisor {
    coeffs: Vec<Q>,
}

impl GraphDivisor {
    pub fn new(coeffs: Vec<Q>) -> Self {
        GraphDivisor { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        GraphDivisor::new(coeffs.iter().map(|&c| qi(c)).collect())
    }

    pub fn zero(n_vertices: usize) -> Self {
        GraphDivisor::new(vec![Q::zero(); n_vertices])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, v: usize) -> &Q {
        &self.coeffs[v]
    }

    pub fn degree(&self) -> Q {
        self.coeffs.iter().sum()
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

/// Vertex function, interpreted on edges by affine interpolation. Carries
/// the lattice denominator of the value group it lives over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaplacianFunction {
    values: Vec<Q>,
    lattice: u32,
}

impl LaplacianFunction {
    pub fn new(values: Vec<Q>, lattice: u32) -> Self {
        LaplacianFunction { values, lattice }
    }

    pub fn constant(c: Q, n_vertices: usize, lattice: u32) -> Self {
        LaplacianFunction::new(vec![c; n_vertices], lattice)
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn value(&self, v: usize) -> &Q {
        &self.values[v]
    }

    pub fn lattice(&self) -> u32 {
        self.lattice
    }

    pub fn shifted(&self, c: &Q) -> LaplacianFunction {
        LaplacianFunction::new(self.values.iter().map(|v| v + c).collect(), self.lattice)
    }
}

/// Closed subset of the metric graph: some vertices plus some whole edges
/// (an edge drags both endpoints into the closure).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubgraphSelection {
    pub vertices: BTreeSet<usize>,
    pub edges: BTreeSet<usize>,
}

impl SubgraphSelection {
    pub fn new(
        g: &MetricGraph,
        vertices: impl IntoIterator<Item = usize>,
        edges: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let vertices: BTreeSet<usize> = vertices.into_iter().collect();
        let edges: BTreeSet<usize> = edges.into_iter().collect();
        if let Some(v) = vertices.iter().find(|&&v| v >= g.vertex_count()) {
            return Err(Error::InvalidInput(format!("selected vertex {v} not in graph")));
        }
        if let Some(e) = edges.iter().find(|&&e| e >= g.edges().len()) {
            return Err(Error::InvalidInput(format!("selected edge {e} not in graph")));
        }
        Ok(SubgraphSelection { vertices, edges })
    }

    /// Everything: all vertices and all edges.
    pub fn full(g: &MetricGraph) -> Self {
        SubgraphSelection {
            vertices: (0..g.vertex_count()).collect(),
            edges: (0..g.edges().len()).collect(),
        }
    }

    /// Parse `"vertices=0,2;edges=0-1,2-3"`. Edges are named by endpoint
    /// pairs; every parallel edge between the pair is selected. Either part
    /// may be omitted.
    pub fn parse(g: &MetricGraph, spec: &str) -> Result<Self> {
        let mut vertices = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, rest) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad subgraph part '{part}'")))?;
            match key.trim() {
                "vertices" => {
                    for tok in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                        let v: usize = tok
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad vertex id '{tok}'")))?;
                        vertices.insert(v);
                    }
                }
                "edges" => {
                    for tok in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                        let (a, b) = tok
                            .split_once('-')
                            .ok_or_else(|| Error::Parse(format!("bad edge '{tok}'")))?;
                        let a: usize = a
                            .trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad edge endpoint in '{tok}'")))?;
                        let b: usize = b
                            .trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad edge endpoint in '{tok}'")))?;
                        let mut found = false;
                        for (i, (u, v, _)) in g.edges().iter().enumerate() {
                            if (*u, *v) == (a, b) || (*u, *v) == (b, a) {
                                edges.insert(i);
                                found = true;
                            }
                        }
                        if !found {
                            return Err(Error::InvalidInput(format!(
                                "no edge between {a} and {b}"
                            )));
                        }
                    }
                }
                other => return Err(Error::Parse(format!("unknown subgraph key '{other}'"))),
            }
        }
        SubgraphSelection::new(g, vertices, edges)
    }

    /// Vertices of the closure: selected vertices plus endpoints of
    /// selected edges.
    pub fn closure_vertices(&self, g: &MetricGraph) -> BTreeSet<usize> {
        let mut out = self.vertices.clone();
        for &e in &self.edges {
            let (u, v, _) = &g.edges()[e];
            out.insert(*u);
            out.insert(*v);
        }
        out
    }
}

/// Sign relation against zero, evaluated pointwise on a closed subgraph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Positive,
    Zero,
    NonNegative,
    Negative,
    NonPositive,
}

impl Relation {
    pub fn holds(&self, q: &Q) -> bool {
        match self {
            Relation::Positive => q.is_positive(),
            Relation::Zero => q.is_zero(),
            Relation::NonNegative => !q.is_negative(),
            Relation::Negative => q.is_negative(),
            Relation::NonPositive => !q.is_positive(),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Relation::Positive => ">0",
            Relation::Zero => "=0",
            Relation::NonNegative => ">=0",
            Relation::Negative => "<0",
            Relation::NonPositive => "<=0",
        }
    }
}

impl FromStr for Relation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            ">0" => Ok(Relation::Positive),
            "=0" | "==0" => Ok(Relation::Zero),
            ">=0" => Ok(Relation::NonNegative),
            "<0" => Ok(Relation::Negative),
            "<=0" => Ok(Relation::NonPositive),
            other => Err(Error::Parse(format!("unknown relation '{other}'"))),
        }
    }
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_compatible(g: &MetricGraph, len: usize, what: &str) -> Result<()> {
    if len != g.vertex_count() {
        return Err(Error::InvalidInput(format!(
            "{what} has {len} entries for a graph with {} vertices",
            g.vertex_count()
        )));
    }
    Ok(())
}

/// `Δφ(v) = Σ_{e=vw} (φ(v) − φ(w)) / length(e)`. Every edge slope must lie
/// on the working lattice.
pub fn laplacian_apply(g: &MetricGraph, phi: &LaplacianFunction) -> Result<GraphDivisor> {
    check_compatible(g, phi.values().len(), "function")?;
    let mut out = vec![Q::zero(); g.vertex_count()];
    for (e, (u, v, l)) in g.edges().iter().enumerate() {
        let slope = edge_slope(g, phi, e, false);
        if !on_lattice(&slope, g.lattice()) {
            return Err(Error::NonIntegralSlope(format!(
                "slope {slope} on edge {e} ({u}, {v}) is off the 1/{} lattice",
                g.lattice()
            )));
        }
        let diff = (phi.value(*u) - phi.value(*v)) / l;
        out[*u] += &diff;
        out[*v] -= &diff;
    }
    let d = GraphDivisor::new(out);
    debug_assert!(d.degree().is_zero());
    Ok(d)
}

/// Slope along edge `e` read from its stored orientation `(v, v')`:
/// `(φ(v') − φ(v)) / length`. `reversed` flips the direction.
pub fn edge_slope(g: &MetricGraph, phi: &LaplacianFunction, e: usize, reversed: bool) -> Q {
    let (u, v, l) = &g.edges()[e];
    let s = (phi.value(*v) - phi.value(*u)) / l;
    if reversed {
        -s
    } else {
        s
    }
}

/// `δ_e(φ)`: absolute slope, orientation-free.
pub fn edge_slope_abs(g: &MetricGraph, phi: &LaplacianFunction, e: usize) -> Q {
    edge_slope(g, phi, e, false).abs()
}

/// Rational solve of `Δφ = D`, unique up to a constant on a connected
/// graph; `None` when the degree obstruction blocks it.
fn solve_rational_only(g: &MetricGraph, d: &GraphDivisor) -> Option<Vec<Q>> {
    let n = g.vertex_count();
    let mut a = vec![vec![Q::zero(); n]; n + 1];
    for (u, v, l) in g.edges() {
        let w = l.recip();
        a[*u][*u] += &w;
        a[*v][*v] += &w;
        a[*u][*v] -= &w;
        a[*v][*u] -= &w;
    }
    a[n][0] = qi(1); // pin φ(0) = 0 to cut the constant kernel
    let mut b = d.coeffs().to_vec();
    b.push(Q::zero());
    linalg::solve_rational(&a, &b)
}

/// Whether `D` is the Laplacian of a function whose slopes lie on the
/// working lattice.
pub fn is_principal(g: &MetricGraph, d: &GraphDivisor) -> bool {
    if d.coeffs().len() != g.vertex_count() || !d.degree().is_zero() {
        return false;
    }
    match solve_rational_only(g, d) {
        None => false,
        Some(values) => {
            let phi = LaplacianFunction::new(values, g.lattice());
            g.edges()
                .iter()
                .enumerate()
                .all(|(e, _)| on_lattice(&edge_slope(g, &phi, e, false), g.lattice()))
        }
    }
}

/// The unique `φ` with `Δφ = D` and `φ(anchor) = anchor_value`.
pub fn solve_laplacian(
    g: &MetricGraph,
    d: &GraphDivisor,
    anchor: usize,
    anchor_value: &Q,
) -> Result<LaplacianFunction> {
    check_compatible(g, d.coeffs().len(), "divisor")?;
    if anchor >= g.vertex_count() {
        return Err(Error::InvalidInput(format!("anchor vertex {anchor} not in graph")));
    }
    if !d.degree().is_zero() {
        return Err(Error::NotPrincipal(format!(
            "divisor has degree {}, image of the Laplacian has degree 0",
            d.degree()
        )));
    }
    let values = solve_rational_only(g, d)
        .ok_or_else(|| Error::NotPrincipal("no rational solution".into()))?;
    let shift = anchor_value - &values[anchor];
    let phi = LaplacianFunction::new(values, g.lattice()).shifted(&shift);
    for (e, (u, v, _)) in g.edges().iter().enumerate() {
        let slope = edge_slope(g, &phi, e, false);
        if !on_lattice(&slope, g.lattice()) {
            return Err(Error::NotPrincipal(format!(
                "solution slope {slope} on edge ({u}, {v}) is off the 1/{} lattice",
                g.lattice()
            )));
        }
    }
    Ok(phi)
}

/// Value of the affine extension of `φ` at the point of edge `e` a
/// fraction `x ∈ [0,1]` of the way from its first endpoint.
pub fn extend_pl(g: &MetricGraph, phi: &LaplacianFunction, e: usize, x: &Q) -> Result<Q> {
    if e >= g.edges().len() {
        return Err(Error::InvalidInput(format!("edge {e} not in graph")));
    }
    if x.is_negative() || x > &qi(1) {
        return Err(Error::InvalidInput(format!("offset {x} outside [0, 1]")));
    }
    let (u, v, _) = &g.edges()[e];
    Ok(phi.value(*u) + &(x * &(phi.value(*v) - phi.value(*u))))
}

/// Whether `relation` holds for the PL extension of `φ` at every point of
/// the closure of the selection. Affine on edges, so endpoint checks
/// suffice, including for strict relations.
pub fn compare_on_subgraph(
    g: &MetricGraph,
    phi: &LaplacianFunction,
    t: &SubgraphSelection,
    relation: Relation,
) -> bool {
    t.closure_vertices(g)
        .iter()
        .all(|&v| relation.holds(phi.value(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qr;
    use rand::{Rng, SeedableRng};

    fn unit_path() -> MetricGraph {
        MetricGraph::new(3, vec![(0, 1, qi(1)), (1, 2, qi(1))], 1).unwrap()
    }

    fn triangle() -> MetricGraph {
        MetricGraph::new(3, vec![(0, 1, qi(1)), (1, 2, qi(1)), (2, 0, qi(1))], 1).unwrap()
    }

    #[test]
    fn apply_on_unit_path() {
        let g = unit_path();
        let phi = LaplacianFunction::new(vec![qi(0), qi(1), qi(0)], 1);
        let d = laplacian_apply(&g, &phi).unwrap();
        assert_eq!(d, GraphDivisor::from_ints(&[-1, 2, -1]));
        let constant = LaplacianFunction::constant(qi(7), 3, 1);
        assert!(laplacian_apply(&g, &constant).unwrap().is_zero());
    }

    #[test]
    fn apply_rejects_off_lattice_slope() {
        let g = MetricGraph::new(2, vec![(0, 1, qi(1))], 1).unwrap();
        let phi = LaplacianFunction::new(vec![qi(0), qr(1, 2)], 1);
        assert!(matches!(
            laplacian_apply(&g, &phi),
            Err(Error::NonIntegralSlope(_))
        ));
        // the same function is fine on the half-integer lattice
        let g2 = MetricGraph::new(2, vec![(0, 1, qi(1))], 2).unwrap();
        let phi2 = LaplacianFunction::new(vec![qi(0), qr(1, 2)], 2);
        assert!(laplacian_apply(&g2, &phi2).is_ok());
    }

    #[test]
    fn principality() {
        let g = unit_path();
        assert!(is_principal(&g, &GraphDivisor::zero(3)));
        assert!(!is_principal(&g, &GraphDivisor::from_ints(&[1, 0, 0])));
        assert!(is_principal(&g, &GraphDivisor::from_ints(&[-1, 2, -1])));
        // order-3 class on the triangle
        assert!(!is_principal(&triangle(), &GraphDivisor::from_ints(&[1, -1, 0])));
        assert!(is_principal(&triangle(), &GraphDivisor::from_ints(&[2, -1, -1])));
        // two points on a circle of circumference 4: class of order 2
        let circle = MetricGraph::new(2, vec![(0, 1, qi(2)), (0, 1, qi(2))], 1).unwrap();
        assert!(!is_principal(&circle, &GraphDivisor::from_ints(&[1, -1])));
        assert!(is_principal(&circle, &GraphDivisor::from_ints(&[2, -2])));
    }

    #[test]
    fn solve_round_trips_and_anchoring() {
        let g = unit_path();
        let d = GraphDivisor::from_ints(&[-1, 2, -1]);
        let phi = solve_laplacian(&g, &d, 0, &qi(0)).unwrap();
        assert_eq!(phi.values(), &[qi(0), qi(1), qi(0)]);
        let again = laplacian_apply(&g, &phi).unwrap();
        assert_eq!(again, d);
        // different anchor: same function up to a constant
        let other = solve_laplacian(&g, &d, 1, &qi(5)).unwrap();
        let diff: Vec<Q> = phi
            .values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| b - a)
            .collect();
        assert!(diff.windows(2).all(|w| w[0] == w[1]));
        // non-principal input errors
        assert!(matches!(
            solve_laplacian(&triangle(), &GraphDivisor::from_ints(&[1, -1, 0]), 0, &qi(0)),
            Err(Error::NotPrincipal(_))
        ));
        assert!(matches!(
            solve_laplacian(&g, &GraphDivisor::from_ints(&[1, 0, 0]), 0, &qi(0)),
            Err(Error::NotPrincipal(_))
        ));
    }

    #[test]
    fn random_round_trips_on_random_graphs() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(23);
        for _ in 0..100 {
            let n = rng.gen_range(2..6);
            // random spanning tree plus a few extra edges, unit lengths
            let mut edges: Vec<(usize, usize, Q)> = (1..n)
                .map(|v| (rng.gen_range(0..v), v, qi(1)))
                .collect();
            for _ in 0..rng.gen_range(0..3) {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a != b {
                    edges.push((a, b, qi(1)));
                }
            }
            let g = MetricGraph::new(n, edges, 1).unwrap();
            let phi = LaplacianFunction::new(
                (0..n).map(|_| qi(rng.gen_range(-4..=4))).collect(),
                1,
            );
            let d = laplacian_apply(&g, &phi).unwrap();
            assert!(is_principal(&g, &d));
            let solved = solve_laplacian(&g, &d, 0, phi.value(0)).unwrap();
            assert_eq!(solved.values(), phi.values());
        }
    }

    #[test]
    fn brute_force_principality_agreement() {
        // Exhaustive search over integer φ (anchor 0) in a safe box, versus
        // the solver's verdict, on every degree-0 divisor with small entries.
        // Integer lengths only here, so everything runs in machine integers:
        // Δφ = D becomes Σ_e w_e (φ(u) − φ(v)) = L·D with w_e = L/l_e.
        let graphs: Vec<(MetricGraph, i64)> = vec![
            (unit_path(), 2),
            (triangle(), 2),
            (
                MetricGraph::new(2, vec![(0, 1, qi(2)), (0, 1, qi(2))], 1).unwrap(),
                2,
            ),
            (
                MetricGraph::new(
                    4,
                    vec![(0, 1, qi(1)), (1, 2, qi(1)), (2, 3, qi(1)), (3, 0, qi(1))],
                    1,
                )
                .unwrap(),
                1,
            ),
        ];
        for (g, max_entry) in &graphs {
            let n = g.vertex_count();
            let lens: Vec<i64> = g
                .edges()
                .iter()
                .map(|(_, _, l)| {
                    assert!(l.is_integer());
                    i64::try_from(l.to_integer()).unwrap()
                })
                .collect();
            let scale: i64 = lens.iter().product::<i64>().max(1);
            let weights: Vec<i64> = lens.iter().map(|l| scale / l).collect();
            let total_len: i64 = lens.iter().sum();
            let base = 2 * max_entry + 1;
            let combos = base.pow((n - 1) as u32);
            for trial in 0..combos {
                let mut c: Vec<i64> = Vec::new();
                let mut t = trial;
                for _ in 0..n - 1 {
                    c.push(t % base - max_entry);
                    t /= base;
                }
                let last: i64 = -c.iter().sum::<i64>();
                if last.abs() > *max_entry {
                    continue;
                }
                c.push(last);
                let mass: i64 = c.iter().map(|x| x.abs()).sum();
                let bound = total_len * mass;
                let mut found = false;
                let mut vals = vec![-bound; n];
                vals[0] = 0; // anchor; solutions are shift-invariant
                'outer: loop {
                    let slopes_ok = g
                        .edges()
                        .iter()
                        .enumerate()
                        .all(|(e, (a, b, _))| (vals[*a] - vals[*b]) % lens[e] == 0);
                    let ok = slopes_ok
                        && (0..n).all(|v| {
                            let mut acc = 0i64;
                            for (e, (a, b, _)) in g.edges().iter().enumerate() {
                                if *a == v {
                                    acc += weights[e] * (vals[*a] - vals[*b]);
                                } else if *b == v {
                                    acc += weights[e] * (vals[*b] - vals[*a]);
                                }
                            }
                            acc == scale * c[v]
                        });
                    if ok {
                        found = true;
                        break;
                    }
                    for i in 1..n {
                        if vals[i] < bound {
                            vals[i] += 1;
                            continue 'outer;
                        }
                        vals[i] = -bound;
                    }
                    break;
                }
                let d = GraphDivisor::from_ints(&c);
                assert_eq!(found, is_principal(g, &d), "divisor {c:?} on {g:?}");
            }
        }
    }

    #[test]
    fn pl_extension_and_slopes() {
        let g = MetricGraph::new(2, vec![(0, 1, qi(1))], 1).unwrap();
        let phi = LaplacianFunction::new(vec![qi(0), qi(1)], 1);
        assert_eq!(extend_pl(&g, &phi, 0, &qi(0)).unwrap(), qi(0));
        assert_eq!(extend_pl(&g, &phi, 0, &qi(1)).unwrap(), qi(1));
        assert_eq!(extend_pl(&g, &phi, 0, &qr(1, 3)).unwrap(), qr(1, 3));
        assert!(extend_pl(&g, &phi, 0, &qi(2)).is_err());
        assert_eq!(edge_slope(&g, &phi, 0, false), qi(1));
        assert_eq!(edge_slope(&g, &phi, 0, true), qi(-1));
        assert_eq!(edge_slope_abs(&g, &phi, 0), qi(1));
        // length scales the slope down
        let g2 = MetricGraph::new(2, vec![(0, 1, qi(2))], 1).unwrap();
        assert_eq!(edge_slope(&g2, &phi, 0, false), qr(1, 2));
    }

    #[test]
    fn subgraph_comparisons() {
        let g = unit_path();
        let phi = LaplacianFunction::new(vec![qi(0), qi(1), qi(0)], 1);
        let edge0 = SubgraphSelection::parse(&g, "edges=0-1").unwrap();
        assert!(!compare_on_subgraph(&g, &phi, &edge0, Relation::Positive));
        assert!(compare_on_subgraph(&g, &phi, &edge0, Relation::NonNegative));
        let v1 = SubgraphSelection::parse(&g, "vertices=1").unwrap();
        assert!(compare_on_subgraph(&g, &phi, &v1, Relation::Positive));
        let zero = LaplacianFunction::constant(qi(0), 3, 1);
        let full = SubgraphSelection::full(&g);
        assert!(compare_on_subgraph(&g, &zero, &full, Relation::Zero));
        // implications among the relations, spot-checked
        for t in [edge0, v1, SubgraphSelection::full(&g)] {
            if compare_on_subgraph(&g, &phi, &t, Relation::Positive) {
                assert!(compare_on_subgraph(&g, &phi, &t, Relation::NonNegative));
            }
            let eq = compare_on_subgraph(&g, &phi, &t, Relation::Zero);
            let ge = compare_on_subgraph(&g, &phi, &t, Relation::NonNegative);
            let le = compare_on_subgraph(&g, &phi, &t, Relation::NonPositive);
            assert_eq!(eq, ge && le);
        }
    }

    #[test]
    fn subgraph_parsing_and_validation() {
        let g = unit_path();
        let t = SubgraphSelection::parse(&g, "vertices=0,2;edges=1-2").unwrap();
        assert_eq!(t.vertices.len(), 2);
        assert_eq!(t.edges.len(), 1);
        assert_eq!(t.closure_vertices(&g), [0, 1, 2].into_iter().collect());
        assert!(SubgraphSelection::parse(&g, "edges=0-2").is_err());
        assert!(SubgraphSelection::parse(&g, "vertices=9").is_err());
        assert!(SubgraphSelection::parse(&g, "junk=1").is_err());
        // parallel edges: both selected by the endpoint pair
        let circle = MetricGraph::new(2, vec![(0, 1, qi(2)), (0, 1, qi(2))], 1).unwrap();
        let sel = SubgraphSelection::parse(&circle, "edges=0-1").unwrap();
        assert_eq!(sel.edges.len(), 2);
    }

    #[test]
    fn graph_validation() {
        assert!(MetricGraph::new(0, vec![], 1).is_err());
        assert!(MetricGraph::new(2, vec![(0, 0, qi(1))], 1).is_err());
        assert!(MetricGraph::new(2, vec![(0, 1, qi(0))], 1).is_err());
        assert!(MetricGraph::new(2, vec![(0, 1, qi(-1))], 1).is_err());
        assert!(MetricGraph::new(2, vec![(0, 5, qi(1))], 1).is_err());
        assert!(MetricGraph::new(3, vec![(0, 1, qi(1))], 1).is_err()); // disconnected
        assert!(MetricGraph::new(2, vec![(0, 1, qr(1, 3))], 2).is_err()); // off-lattice length
        assert!(MetricGraph::new(2, vec![(0, 1, qr(1, 3))], 3).is_ok());
        assert!(MetricGraph::new(1, vec![], 1).is_ok()); // single vertex, no edges
    }
}
