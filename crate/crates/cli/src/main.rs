//! Command-line front end: load skeleton models and curves from JSON,
//! dispatch to the library, and print either a human summary or a
//! deterministic JSON report (sorted keys, exact rational strings).
//!
//! Exit codes: 0 on success, 2 on domain errors, with a machine-readable
//! `{"error": CODE, "message": ...}` object on stderr.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use skelred_core::expr::{parse_rational_function, parse_valued_element};
use skelred_core::valued::{format_q, parse_q};
use skelred_core::{
    base_change_stability, classify, classify_on_subdivision, construct_s_minimal_twist,
    construct_s_minimal_twist_with_centers, division_polynomial, edge_slope, generate_subgroup,
    hasse_invariant, laplacian_apply, predict_edge_fiber, sl2_order, solve_laplacian,
    tate_parameter_valuation, transvection_check, vertical_profile, Error, FiberInputs,
    InertiaChain, Q, ReductionType, Result, ResidueConfig, SkeletonTree, Sl2Matrix,
    SubgraphSelection, WeierstrassEquation,
};

#[derive(Parser)]
#[command(name = "skelred", version, about = "Reduction types of elliptic curves on skeleton models")]
struct Cli {
    /// Emit a JSON report instead of the human summary.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Valuation profile, retracted divisor, and edge slopes of a function.
    Laplacian {
        #[arg(long)]
        model: PathBuf,
        /// Rational function in t and pi, e.g. "pi*(t - 1)^2/(t - pi)".
        #[arg(long, conflicts_with = "curve")]
        function: Option<String>,
        /// Curve file; its discriminant is taken as the function.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Retraction of the zero/pole divisor of a function onto the model.
    Divisor {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, conflicts_with = "curve")]
        function: Option<String>,
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Classify reduction over a subgraph of the model.
    ReductionType {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        /// e.g. "vertices=0,1;edges=0", defaults to the whole model.
        #[arg(long)]
        subgraph: Option<String>,
    },
    /// Twist to a model minimal on the selected vertices.
    MinimalTwist {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        /// Vertices to minimize on (closure of the selection), default: all.
        #[arg(long)]
        subgraph: Option<String>,
        /// Extra centers for the scaling function's factor pool.
        #[arg(long)]
        center: Vec<String>,
    },
    /// Per-vertex verdicts on the (1/n)-subdivided model.
    Subdivide {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        subgraph: Option<String>,
        /// Subdivision denominator n.
        #[arg(long)]
        lattice: u32,
        /// Also check that a Good/Multiplicative verdict survives.
        #[arg(long)]
        stability: bool,
    },
    /// Inertia orders of the intermediate vertices over a length-n edge.
    InertiaChain {
        /// Number of unit segments of the edge downstairs.
        #[arg(long)]
        lattice: u64,
        /// Order of the inertia group at the edge.
        #[arg(long)]
        group_order: u64,
    },
    /// Transvection certificate for inertia over one selected edge.
    Transvection {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        /// Must select exactly one edge, e.g. "edges=0-1".
        #[arg(long)]
        subgraph: String,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        group_order: u64,
        /// Residue characteristic, 0 for characteristic zero.
        #[arg(long, default_value_t = 0)]
        residue_char: u64,
    },
    /// Count and length of the edges upstairs over a classified edge.
    Fiber {
        /// good | multiplicative | additive | mixed
        #[arg(long)]
        reduction: String,
        #[arg(long)]
        group_order: u64,
        /// Order of the matrix-group image, when known separately.
        #[arg(long)]
        image_order: Option<u64>,
        #[arg(long)]
        ell: Option<u64>,
        /// |slope| of the j-profile on the edge.
        #[arg(long)]
        delta: Option<u64>,
        /// Edge length downstairs.
        #[arg(long, default_value = "1")]
        length: String,
        /// Certify that the residue characteristic does not divide the level.
        #[arg(long)]
        char_coprime: bool,
        #[arg(long, default_value_t = 0)]
        residue_char: u64,
    },
    /// Orders and closures in SL2 over Z/n.
    Sl2 {
        #[command(subcommand)]
        cmd: Sl2Cmd,
    },
    /// Valuation of the Tate parameter at a vertex with non-integral j.
    TateQ {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        vertex: usize,
    },
    /// Hasse invariant -c4/c6 of a curve.
    Hasse {
        #[arg(long)]
        curve: PathBuf,
    },
    /// x-polynomial of the nontrivial N-torsion, N in {2, 3}.
    DivisionPoly {
        #[arg(long)]
        curve: PathBuf,
        /// Torsion level N.
        #[arg(long)]
        ell: u32,
    },
}

#[derive(Subcommand)]
enum Sl2Cmd {
    /// |SL2(Z/n)|.
    Order {
        #[arg(long)]
        ell: u64,
    },
    /// Closure of the two standard transvections mod ell.
    Generate {
        #[arg(long)]
        ell: u64,
        /// Abort once the closure exceeds this many elements.
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
        /// List the elements in the JSON report.
        #[arg(long)]
        elements: bool,
    },
    /// Whether two transvections generate the full group.
    Check {
        #[arg(long)]
        ell: u64,
        /// First matrix as "a,b,c,d".
        #[arg(long)]
        a: String,
        /// Second matrix as "a,b,c,d".
        #[arg(long)]
        b: String,
    },
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<SkeletonTree> {
    serde_json::from_str(&read_file(path)?)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[derive(Deserialize)]
struct RawCurve {
    a: [String; 5],
}

fn load_curve(path: &Path) -> Result<WeierstrassEquation> {
    let raw: RawCurve = serde_json::from_str(&read_file(path)?)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut coeffs = Vec::with_capacity(5);
    for s in &raw.a {
        coeffs.push(parse_rational_function(s)?);
    }
    WeierstrassEquation::new(coeffs.try_into().expect("five coefficients"))
}

fn selection(tree: &SkeletonTree, spec: Option<&str>) -> Result<SubgraphSelection> {
    let g = tree.metric_graph();
    match spec {
        Some(s) => SubgraphSelection::parse(&g, s),
        None => Ok(SubgraphSelection::full(&g)),
    }
}

/// The function a model-level command operates on: parsed from `--function`
/// or the discriminant of `--curve`.
fn pick_function(function: Option<&str>, curve: Option<&Path>) -> Result<skelred_core::RationalFunction> {
    match (function, curve) {
        (Some(f), _) => parse_rational_function(f),
        (None, Some(p)) => Ok(load_curve(p)?.invariants().delta.clone()),
        (None, None) => Err(Error::InvalidInput(
            "supply --function or --curve to name the function".into(),
        )),
    }
}

fn reduction_from_str(s: &str) -> Result<ReductionType> {
    match s.to_ascii_lowercase().as_str() {
        "good" => Ok(ReductionType::Good),
        "multiplicative" | "mult" => Ok(ReductionType::Multiplicative),
        "additive" => Ok(ReductionType::Additive),
        "mixed" => Ok(ReductionType::Mixed),
        other => Err(Error::InvalidInput(format!("unknown reduction type '{other}'"))),
    }
}

fn qs(q: &Q) -> Value {
    Value::String(format_q(q))
}

fn qlist(qs_: &[Q]) -> Value {
    Value::Array(qs_.iter().map(qs).collect())
}

fn opt_qlist(v: &[Option<Q>]) -> Value {
    Value::Array(v.iter().map(|x| x.as_ref().map_or(Value::Null, qs)).collect())
}

fn matrix_str(m: &Sl2Matrix) -> String {
    let [a, b, c, d] = m.entries();
    format!("{a},{b},{c},{d}")
}

fn run(cmd: &Command) -> Result<(Value, String)> {
    match cmd {
        Command::Laplacian { model, function, curve } => {
            let tree = load_model(model)?;
            let f = pick_function(function.as_deref(), curve.as_deref())?;
            let d = tree.specialize_rational(&f)?;
            let phi = tree.valuation_profile_rational(&f)?;
            let g = tree.metric_graph();
            // the profile really is a Laplacian preimage of the divisor
            assert_eq!(laplacian_apply(&g, &phi)?, d);
            let solved = solve_laplacian(&g, &d, 0, phi.value(0))?;
            assert_eq!(solved.values(), phi.values());
            let slopes: Vec<Q> = (0..g.edges().len())
                .map(|e| edge_slope(&g, &phi, e, false))
                .collect();
            let value = json!({
                "divisor": qlist(d.coeffs()),
                "phi": qlist(phi.values()),
                "slopes": qlist(&slopes),
            });
            let human = format!(
                "phi = [{}]\ndivisor = [{}]\nslopes = [{}]",
                join_q(phi.values()),
                join_q(d.coeffs()),
                join_q(&slopes)
            );
            Ok((value, human))
        }
        Command::Divisor { model, function, curve } => {
            let tree = load_model(model)?;
            let f = pick_function(function.as_deref(), curve.as_deref())?;
            let d = tree.specialize_rational(&f)?;
            let value = json!({
                "degree": qs(&d.degree()),
                "divisor": qlist(d.coeffs()),
            });
            let human = format!("divisor = [{}], degree {}", join_q(d.coeffs()), format_q(&d.degree()));
            Ok((value, human))
        }
        Command::ReductionType { model, curve, subgraph } => {
            let tree = load_model(model)?;
            let w = load_curve(curve)?;
            let sel = selection(&tree, subgraph.as_deref())?;
            let c = classify(&w, &tree, &sel)?;
            let ev = &c.evidence;
            let value = json!({
                "c4_identically_zero": ev.c4_identically_zero,
                "closure_vertices": ev.vertices,
                "scale": ev.scale.to_string(),
                "support_only": ev.support_only,
                "v_c4": opt_qlist(&ev.v_c4),
                "v_delta": qlist(&ev.v_delta),
                "verdict": c.verdict.as_str(),
            });
            let human = format!(
                "verdict: {}\nclosure vertices: {:?}\nv(Delta) = [{}]\nv(c4) = [{}]",
                c.verdict,
                ev.vertices,
                join_q(&ev.v_delta),
                ev.v_c4
                    .iter()
                    .map(|x| x.as_ref().map_or("oo".to_string(), format_q))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Ok((value, human))
        }
        Command::MinimalTwist { model, curve, subgraph, center } => {
            let tree = load_model(model)?;
            let w = load_curve(curve)?;
            let s: Vec<usize> = match subgraph {
                Some(spec) => {
                    let g = tree.metric_graph();
                    let sel = SubgraphSelection::parse(&g, spec)?;
                    sel.closure_vertices(&g).into_iter().collect()
                }
                None => (0..tree.vertices().len()).collect(),
            };
            let res = if center.is_empty() {
                construct_s_minimal_twist(&w, &tree, &s)?
            } else {
                let mut extras = Vec::with_capacity(center.len());
                for c in center {
                    extras.push(parse_valued_element(c)?);
                }
                construct_s_minimal_twist_with_centers(&w, &tree, &s, &extras)?
            };
            let kappa: Vec<Value> = res
                .kappa
                .iter()
                .map(|(z, k)| json!({"kappa": format_q(k), "vertex": z}))
                .collect();
            let value = json!({
                "kappa": kappa,
                "model": {"a": res.minimal.coefficients().iter().map(|c| c.to_string()).collect::<Vec<_>>()},
                "scale": res.scale.to_string(),
                "transform": {
                    "r": res.transform.r.to_string(),
                    "s": res.transform.s.to_string(),
                    "t": res.transform.t.to_string(),
                    "u": res.transform.u.to_string(),
                },
            });
            let human = format!(
                "u = {}\nscale = {}\nkappa: {}\ntwisted a = [{}]",
                res.transform.u,
                res.scale,
                res.kappa
                    .iter()
                    .map(|(z, k)| format!("{z} -> {}", format_q(k)))
                    .collect::<Vec<_>>()
                    .join(", "),
                res.minimal
                    .coefficients()
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Ok((value, human))
        }
        Command::Subdivide { model, curve, subgraph, lattice, stability } => {
            let tree = load_model(model)?;
            let w = load_curve(curve)?;
            let sel = selection(&tree, subgraph.as_deref())?;
            let (fine, verdicts) = classify_on_subdivision(&w, &tree, &sel, *lattice)?;
            let stable = if *stability {
                Some(base_change_stability(&w, &tree, &sel, *lattice)?)
            } else {
                None
            };
            let rows: Vec<Value> = verdicts
                .iter()
                .map(|(z, t)| {
                    let v = fine.vertex(*z);
                    json!({
                        "center": v.center().to_string(),
                        "radius": format_q(v.radius()),
                        "verdict": t.as_str(),
                        "vertex": z,
                    })
                })
                .collect();
            let mut value = json!({
                "lattice": lattice,
                "vertices": rows,
            });
            if let Some(st) = stable {
                value["stable"] = Value::Bool(st);
            }
            let mut human: Vec<String> = verdicts
                .iter()
                .map(|(z, t)| format!("vertex {z} at {}: {t}", fine.vertex(*z)))
                .collect();
            if let Some(st) = stable {
                human.push(format!("verdict stable under subdivision: {st}"));
            }
            Ok((value, human.join("\n")))
        }
        Command::InertiaChain { lattice, group_order } => {
            let chain = InertiaChain::new(*lattice, *group_order)?;
            let value = json!({
                "edge_length": chain.edge_length,
                "inertia_order": chain.inertia_order,
                "orders": chain.orders,
            });
            let human = chain.to_string();
            Ok((value, human))
        }
        Command::Transvection { model, curve, subgraph, ell, group_order, residue_char } => {
            let tree = load_model(model)?;
            let w = load_curve(curve)?;
            let g = tree.metric_graph();
            let sel = SubgraphSelection::parse(&g, subgraph)?;
            if sel.edges.len() != 1 || !sel.vertices.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "transvection needs exactly one selected edge, got {subgraph:?}"
                )));
            }
            let e = *sel.edges.iter().next().expect("one edge");
            let residue = ResidueConfig::new(*residue_char)?;
            let cert = transvection_check(&w, &tree, e, *ell, *group_order, &residue)?;
            let value = json!({
                "delta_j": cert.delta_j,
                "edge": cert.edge,
                "ell": cert.ell,
                "group_order": cert.group_order,
                "matrix": cert.matrix.as_ref().map(matrix_str),
                "notes": cert.notes,
                "predicted_fiber": cert.predicted_fiber.as_ref().map(|f| json!({
                    "count": f.count,
                    "length": format_q(&f.length),
                })),
                "reduction": cert.reduction.as_str(),
                "verdict": cert.verdict,
            });
            let mut human = format!(
                "edge {}: {} reduction, delta_j = {}, verdict {}",
                cert.edge,
                cert.reduction,
                cert.delta_j.map_or("oo".to_string(), |d| d.to_string()),
                if cert.verdict { "transvection" } else { "no transvection" }
            );
            if let Some(m) = &cert.matrix {
                human.push_str(&format!("\nmatrix = [{}] mod {}", matrix_str(m), m.modulus()));
            }
            if let Some(f) = &cert.predicted_fiber {
                human.push_str(&format!(
                    "\nfiber upstairs: {} edges of length {}",
                    f.count,
                    format_q(&f.length)
                ));
            }
            for n in &cert.notes {
                human.push_str(&format!("\n- {n}"));
            }
            Ok((value, human))
        }
        Command::Fiber {
            reduction,
            group_order,
            image_order,
            ell,
            delta,
            length,
            char_coprime,
            residue_char,
        } => {
            let inputs = FiberInputs {
                reduction: reduction_from_str(reduction)?,
                group_order: *group_order,
                image_order: *image_order,
                ell: *ell,
                delta_j: *delta,
                length: parse_q(length)?,
                char_coprime_to_level: *char_coprime,
                residue_char: match ResidueConfig::new(*residue_char)? {
                    r if r.is_char_zero() => None,
                    r => Some(r.residue_char()),
                },
            };
            let f = predict_edge_fiber(&inputs)?;
            let value = json!({
                "count": f.count,
                "length": format_q(&f.length),
            });
            let human = format!("{} edges of length {}", f.count, format_q(&f.length));
            Ok((value, human))
        }
        Command::Sl2 { cmd } => match cmd {
            Sl2Cmd::Order { ell } => {
                let n = sl2_order(*ell)?;
                Ok((json!({"modulus": ell, "order": n}), format!("|SL2(Z/{ell})| = {n}")))
            }
            Sl2Cmd::Generate { ell, cap, elements } => {
                let t1 = Sl2Matrix::new(*ell, [1, 1, 0, 1])?;
                let t2 = Sl2Matrix::new(*ell, [1, 0, 1, 1])?;
                let set = generate_subgroup(&[t1, t2], *cap)?;
                let full = sl2_order(*ell).map(|n| n == set.len() as u64).ok();
                let mut value = json!({
                    "modulus": ell,
                    "order": set.len(),
                });
                if let Some(f) = full {
                    value["full"] = Value::Bool(f);
                }
                if *elements {
                    value["elements"] =
                        Value::Array(set.iter().map(|m| Value::String(matrix_str(m))).collect());
                }
                let human = format!(
                    "closure of the standard transvections mod {ell}: {} elements{}",
                    set.len(),
                    match full {
                        Some(true) => " (the full group)",
                        Some(false) => " (a proper subgroup)",
                        None => "",
                    }
                );
                Ok((value, human))
            }
            Sl2Cmd::Check { ell, a, b } => {
                let ma = Sl2Matrix::parse(a, *ell)?;
                let mb = Sl2Matrix::parse(b, *ell)?;
                let surjective = skelred_core::check_surjectivity(&[ma, mb])?;
                Ok((
                    json!({"modulus": ell, "surjective": surjective}),
                    format!("generate SL2(Z/{ell}): {surjective}"),
                ))
            }
        },
        Command::TateQ { model, curve, vertex } => {
            let tree = load_model(model)?;
            let w = load_curve(curve)?;
            let profiles = vertical_profile(&w, &tree)?;
            let phi_j = profiles.j.as_ref().ok_or_else(|| {
                Error::NotNonIntegralJ("j vanishes identically, so v(j) = +oo everywhere".into())
            })?;
            if *vertex >= tree.vertices().len() {
                return Err(Error::InvalidInput(format!("vertex {vertex} not in model")));
            }
            let vq = tate_parameter_valuation(phi_j, *vertex)?;
            let value = json!({
                "v_j": format_q(phi_j.value(*vertex)),
                "v_q": format_q(&vq),
                "vertex": vertex,
            });
            let human = format!("v(q) = {} at vertex {vertex}", format_q(&vq));
            Ok((value, human))
        }
        Command::Hasse { curve } => {
            let w = load_curve(curve)?;
            let h = hasse_invariant(&w)?;
            Ok((json!({"hasse": h.to_string()}), format!("-c4/c6 = {h}")))
        }
        Command::DivisionPoly { curve, ell } => {
            let w = load_curve(curve)?;
            let p = division_polynomial(&w, *ell)?;
            let value = json!({
                "coeffs": p.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "level": p.level,
            });
            Ok((value, p.to_string()))
        }
    }
}

fn join_q(v: &[Q]) -> String {
    v.iter().map(format_q).collect::<Vec<_>>().join(", ")
}

fn main() {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok((value, human)) => {
            if cli.json {
                println!("{value}");
            } else {
                println!("{human}");
            }
        }
        Err(e) => {
            eprintln!("{}", json!({"error": e.code(), "message": e.to_string()}));
            std::process::exit(2);
        }
    }
}
