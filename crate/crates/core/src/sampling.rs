//! Random instances for tests and benchmarks: disk trees valid by
//! construction, and factored functions whose roots retract onto vertices.

use rand::Rng;

use crate::skeleton::{DiskVertex, FactoredFunction, Retraction, SkeletonTree};
use crate::valued::ValuedElement;
use crate::{qi, qr, Q};

/// A valid tree with at most `max_vertices` vertices on the integer
/// lattice. Children of one parent branch off at the parent's radius with
/// pairwise distinct directions, so segment-overlap constraints hold by
/// construction; at most one child per parent shares its center line.
pub fn random_tree<R: Rng>(rng: &mut R, max_vertices: usize) -> SkeletonTree {
    assert!(max_vertices >= 1);
    let count = rng.gen_range(1..=max_vertices);
    let mut centers: Vec<ValuedElement> = vec![ValuedElement::zero()];
    let mut radii: Vec<i64> = vec![rng.gen_range(0..=1)];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut has_concentric_child = vec![false];
    let mut branch_counter = vec![0i64];

    while centers.len() < count {
        let p = rng.gen_range(0..centers.len());
        let radius = radii[p] + rng.gen_range(1..=2);
        let center = if !has_concentric_child[p] && rng.gen_bool(0.3) {
            has_concentric_child[p] = true;
            centers[p].clone()
        } else {
            branch_counter[p] += 1;
            let coef = qi(branch_counter[p]);
            &centers[p] + &ValuedElement::monomial(coef, qi(radii[p]))
        };
        let u = centers.len();
        centers.push(center);
        radii.push(radius);
        edges.push((p, u));
        has_concentric_child.push(false);
        branch_counter.push(0);
    }

    let vertices = centers
        .into_iter()
        .zip(&radii)
        .map(|(c, &r)| DiskVertex::new(c, qi(r)).expect("nonnegative radius"))
        .collect();
    SkeletonTree::new(vertices, edges, 1).expect("construction keeps the tree valid")
}

fn random_coeff<R: Rng>(rng: &mut R) -> Q {
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    qi(sign * rng.gen_range(1..=3))
}

/// A point of the base field retracting onto a vertex of the tree, found by
/// rejection around randomly chosen vertices.
pub fn random_retracting_point<R: Rng>(rng: &mut R, tree: &SkeletonTree) -> ValuedElement {
    for _ in 0..32 {
        let v = rng.gen_range(0..tree.vertices().len());
        let vert = tree.vertex(v);
        let candidate = if rng.gen_bool(0.25) {
            vert.center().clone()
        } else {
            let bump = rng.gen_range(0..=2);
            let k = vert.radius() + qi(bump);
            vert.center() + &ValuedElement::monomial(random_coeff(rng), k)
        };
        if matches!(tree.retract_point(&candidate), Retraction::Vertex(_)) {
            return candidate;
        }
    }
    // A vertex center always retracts onto the deepest vertex of its line.
    tree.vertex(rng.gen_range(0..tree.vertices().len())).center().clone()
}

/// A factored function with at most `max_roots` roots, every root
/// retracting onto a vertex, multiplicities in [-3, 3] \ {0}, and a random
/// monomial content.
pub fn random_adapted_function<R: Rng>(
    rng: &mut R,
    tree: &SkeletonTree,
    max_roots: usize,
) -> FactoredFunction {
    let n_roots = rng.gen_range(0..=max_roots);
    let mut factors = Vec::with_capacity(n_roots);
    for _ in 0..n_roots {
        let root = random_retracting_point(rng, tree);
        let mut m: i64 = 0;
        while m == 0 {
            m = rng.gen_range(-3..=3);
        }
        factors.push((root, m));
    }
    let content = ValuedElement::monomial(
        if rng.gen_bool(0.3) { qr(1, 2) } else { random_coeff(rng) },
        qi(rng.gen_range(-2..=2)),
    );
    FactoredFunction::new(content, factors).expect("nonzero content")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplacian::laplacian_apply;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn generated_instances_are_usable() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..60 {
            let tree = random_tree(&mut rng, 8);
            assert!(tree.vertices().len() <= 8);
            let f = random_adapted_function(&mut rng, &tree, 5);
            let divisor = tree.specialize_factored(&f).expect("roots retract onto vertices");
            let phi = tree.valuation_profile(&f);
            let applied = laplacian_apply(&tree.metric_graph(), &phi).unwrap();
            assert_eq!(applied, divisor);
        }
    }
}
