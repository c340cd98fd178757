//! Exact machinery for studying elliptic curves over discretely valued
//! function fields through the combinatorics of a model: disk-tree skeleta
//! of the projective line, Gauss valuations and their piecewise-linear
//! profiles, graph Laplacians with exact rational solving, Weierstrass
//! invariants and minimal twists, reduction-type classification on
//! subgraphs, and the mod-N matrix bookkeeping (transvections, subgroup
//! closures, fiber counts) that the classification feeds.
//!
//! Everything is exact: rationals throughout, no floating point anywhere.

pub mod error;
pub mod expr;
pub mod galois;
pub mod laplacian;
pub mod linalg;
pub mod poly;
pub mod reduction;
pub mod sampling;
pub mod skeleton;
pub mod valued;
pub mod weierstrass;

pub use error::{Error, Result};
pub use galois::{
    check_surjectivity, division_polynomial, generate_subgroup, hasse_invariant,
    predict_edge_fiber, sl2_order, tate_parameter_valuation, transvection_check, DivisionPolynomial,
    FiberInputs, FiberPrediction, InertiaChain, ProjLine, Sl2Matrix, TransvectionCertificate,
};
pub use laplacian::{
    compare_on_subgraph, edge_slope, edge_slope_abs, extend_pl, is_principal, laplacian_apply,
    solve_laplacian, GraphDivisor, LaplacianFunction, MetricGraph, Relation, SubgraphSelection,
};
pub use poly::{Poly, RationalFunction};
pub use reduction::{
    base_change_stability, classify, classify_on_subdivision, completion_closure, Classification,
    Evidence, ReductionType,
};
pub use skeleton::{DiskVertex, EdgeChain, FactoredFunction, Retraction, SkeletonTree};
pub use valued::{ResidueConfig, Valuation, ValuedElement};
pub use weierstrass::{
    construct_s_minimal_twist, construct_s_minimal_twist_with_centers, minimality_report,
    short_form_transform, transform, vertical_profile, Invariants, MinimalityReport, TwistResult,
    VerticalProfiles, WeierstrassEquation, WeierstrassTransform,
};

/// Exact rational scalar used everywhere.
pub type Q = num::BigRational;
/// Arbitrary-precision integer.
pub type Z = num::BigInt;

/// Rational from a machine integer.
pub fn qi(n: i64) -> Q {
    Q::from(Z::from(n))
}

/// Rational `p/q` from machine integers. Panics on `q = 0`.
pub fn qr(p: i64, q: i64) -> Q {
    Q::new(Z::from(p), Z::from(q))
}
