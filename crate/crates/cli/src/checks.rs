use serde_json::{json, Value};

use ergolab::appendix_lab::appendix_report;
use ergolab::base_systems::{
    component_factor_check, disintegrate, ergodic_decomposition, is_rfmp, rokhlin_coordinatize, FiniteSystem,
    InvariantPartition,
};
use ergolab::ergodic_structure::{ergodic_components, mackey_action};
use ergolab::groups_cocycles::{build_skew_product, is_ergodic_cocycle, AnyCocycle, GroupAction};
use ergolab::joinings::{
    graph_joining, is_disjoint, joining_polytope, lemma_j1_surrogate, pairwise_independent_triple_search,
    relative_unique_ergodicity, simplex_isomorphism_check,
};
use ergolab::linalg::CMat;
use ergolab::rank_modules::{
    check_constant_norm, cohomology_test, fiberwise_orthogonality, invariance_residuals, irreducible_decomposition,
    relative_eigenvalue, CohomologyVerdict, FiberedSystem, ModuleBundle, OrthogonalityVerdict,
};
use ergolab::rational::{self, vec_to_strings};
use ergolab::spectra::{
    eigenvalue_group, eigenvalue_quotient, product_ergodicity_check, weyl_eigenvalue_scan, RotationSampler,
};
use ergolab::{Error, Result};

use crate::config::{Instance, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    System,
    Pair,
    Extension,
    Bundle,
    Appendix,
    Rotation,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::System => "system",
            Kind::Pair => "pair",
            Kind::Extension => "extension",
            Kind::Bundle => "bundle",
            Kind::Appendix => "appendix",
            Kind::Rotation => "rotation",
        }
    }
}

pub struct CheckInfo {
    pub name: &'static str,
    pub kind: Kind,
    pub description: &'static str,
}

const fn info(name: &'static str, kind: Kind, description: &'static str) -> CheckInfo {
    CheckInfo { name, kind, description }
}

pub const CHECKS: &[CheckInfo] = &[
    info("rfmp", Kind::System, "partition is relatively finite measure-preserving (α constant on blocks)"),
    info("disintegration", Kind::System, "conditional measures satisfy μ_{Sy} = μ_y∘T⁻¹ and reconstruct μ exactly"),
    info(
        "ergodic_decomposition",
        Kind::System,
        "orbit decomposition reconstructs μ and keeps the Radon–Nikodym derivative",
    ),
    info(
        "component_factors",
        Kind::System,
        "every ergodic component keeps an ergodic r.f.m.p. factor with its measure",
    ),
    info("rokhlin_coordinates", Kind::System, "product coordinates Y × Z with T(y, z) = (Sy, Θ(y)z)"),
    info("eigenvalue_group", Kind::System, "exact eigenvalue group of an ergodic system, eigenfunctions verified"),
    info(
        "eigenvalue_quotient",
        Kind::System,
        "eigenvalues split into cosets of the factor's eigenvalues; rank-one modules per coset",
    ),
    info("pid_search", Kind::System, "invariant triple self-joinings with independent pair marginals"),
    info("joinings", Kind::Pair, "vertices of the joining polytope of two ergodic cycles"),
    info("disjointness", Kind::Pair, "the product measure is the only joining"),
    info("product_ergodicity", Kind::Pair, "product ergodicity by orbit count agrees with trivial common eigenvalues"),
    info("graph_joining", Kind::Pair, "graph joining of a conjugacy W (params.map)"),
    info(
        "skew_product",
        Kind::Extension,
        "skew product is a bijection, commutes with the right translations, and satisfies the iterate identity",
    ),
    info("ergodic_components", Kind::Extension, "ergodic components of the skew product and their weights"),
    info("mackey_action", Kind::Extension, "induced action on components is a transitive homomorphism"),
    info("cocycle_ergodicity", Kind::Extension, "cocycle ergodic exactly when the skew product has one component"),
    info("recurrence", Kind::Extension, "cocycle recurrence on an ergodic base (any group)"),
    info(
        "simplex_isomorphism",
        Kind::Extension,
        "invariant measures of the Rokhlin extension match those of the induced action, vertex by vertex",
    ),
    info(
        "relative_unique_ergodicity",
        Kind::Extension,
        "ergodic cocycle and uniquely ergodic action give a unique extension measure",
    ),
    info(
        "lemma_surrogate",
        Kind::Extension,
        "joinings with an R-cycle (params.r) factor when component spectra avoid R",
    ),
    info("invariance", Kind::Bundle, "bundle is invariant: pulled-back fibers stay in the span"),
    info("constant_norm", Kind::Bundle, "Σ_j |φ_j|² equals the rank everywhere"),
    info("relative_eigenvalue", Kind::Bundle, "relative eigenvalue cocycle is unitary"),
    info("irreducible_decomposition", Kind::Bundle, "splits the bundle into rank-one invariant pieces"),
    info("orthogonality", Kind::Bundle, "two rank-one bundles are orthogonal or have equal spans"),
    info("cohomology", Kind::Bundle, "two bundles are orthogonal or cohomologous via the projection test"),
    info(
        "appendix",
        Kind::Appendix,
        "U(2) construction: α constancy, Gram trace, rank, Schur moments, finite-base cohomology",
    ),
    info("weyl_scan", Kind::Rotation, "Weyl sums of a circle rotation at candidate frequencies"),
];

pub fn lookup(name: &str) -> Option<&'static CheckInfo> {
    CHECKS.iter().find(|c| c.name == name)
}

pub struct Outcome {
    pub passed: bool,
    pub details: Value,
}

fn outcome(passed: bool, details: Value) -> Outcome {
    Outcome { passed, details }
}

/// Pass when `holds` matches `params.expect` (default `true`).
fn expect(params: &Value, holds: bool, details: Value) -> Outcome {
    let want = params.get("expect").and_then(Value::as_bool).unwrap_or(true);
    outcome(holds == want, details)
}

fn param_usize(params: &Value, key: &str) -> Result<usize> {
    params
        .get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| Error::InvalidParameter(format!("params.{key} must be a non-negative integer")))
}

fn cmat_json(m: &CMat) -> Value {
    json!((0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn need_partition(part: &Option<InvariantPartition>) -> Result<&InvariantPartition> {
    part.as_ref().ok_or_else(|| Error::InvalidParameter("instance has no partition".into()))
}

fn need_other(other: &Option<ModuleBundle>) -> Result<&ModuleBundle> {
    other.as_ref().ok_or_else(|| Error::InvalidParameter("instance has no second bundle (`other`)".into()))
}

/// Runs one check. Library errors become failed records, never aborts.
pub fn run(name: &str, inst: &Instance, params: &Value, settings: &Settings) -> Outcome {
    let result = match inst {
        Instance::System { sys, part } => system_check(name, sys, part, params, settings),
        Instance::Pair { left, right } => pair_check(name, left, right, params, settings),
        Instance::Extension { cocycle, action } => extension_check(name, cocycle, action.as_ref(), params, settings),
        Instance::Bundle { fs, bundle, other } => bundle_check(name, fs, bundle, other, params, settings),
        Instance::Appendix { constr, seed, samples, cycle } => {
            let seed = seed.unwrap_or(settings.seed);
            appendix_report(constr, seed, *samples, *cycle).and_then(|rep| {
                let details = serde_json::to_value(&rep).map_err(|e| Error::Parse(e.to_string()))?;
                Ok(outcome(rep.checks.all(), details))
            })
        }
        Instance::Rotation { alpha, x0, k } => weyl(*alpha, *x0, *k, params),
    };
    result.unwrap_or_else(|e| outcome(false, json!({ "error": e.to_string() })))
}

fn system_check(
    name: &str,
    sys: &FiniteSystem,
    part: &Option<InvariantPartition>,
    params: &Value,
    settings: &Settings,
) -> Result<Outcome> {
    Ok(match name {
        "rfmp" => {
            let holds = is_rfmp(sys, need_partition(part)?)?;
            expect(params, holds, json!({ "rfmp": holds, "radon_nikodym": vec_to_strings(&sys.radon_nikodym()) }))
        }
        "disintegration" => {
            let d = disintegrate(sys, need_partition(part)?)?;
            let violations = d.pushforward_violations(sys);
            let reconstructs = d.reconstruct(sys.len()) == sys.weights();
            let conditionals: Vec<Vec<(usize, String)>> =
                d.conditionals.iter().map(|c| c.iter().map(|(x, m)| (*x, rational::to_string(m))).collect()).collect();
            expect(
                params,
                violations.is_empty() && reconstructs,
                json!({
                    "factor_weights": vec_to_strings(&d.factor_weights),
                    "conditionals": conditionals,
                    "violations": violations,
                    "reconstructs": reconstructs,
                }),
            )
        }
        "ergodic_decomposition" => {
            let dec = ergodic_decomposition(sys);
            let reconstructs = dec.reconstruct(sys.len()) == sys.weights();
            let rn = dec.rn_agrees(sys);
            let comps: Vec<Value> = dec
                .components
                .iter()
                .map(|c| json!({ "support": c.support, "measure": vec_to_strings(&c.measure), "weight": rational::to_string(&c.weight) }))
                .collect();
            expect(
                params,
                reconstructs && rn,
                json!({ "components": comps, "reconstructs": reconstructs, "rn_agrees": rn }),
            )
        }
        "component_factors" => {
            let checks = component_factor_check(sys, need_partition(part)?)?;
            let holds = checks.iter().all(|c| c.factor_measure_matches && c.still_rfmp);
            let rows: Vec<Value> = checks
                .iter()
                .map(|c| json!({ "factor_measure_matches": c.factor_measure_matches, "still_rfmp": c.still_rfmp }))
                .collect();
            expect(params, holds, json!({ "components": rows }))
        }
        "rokhlin_coordinates" => {
            let rc = rokhlin_coordinatize(sys, need_partition(part)?)?;
            let holds = rc.verify(sys);
            expect(
                params,
                holds,
                json!({
                    "base_weights": vec_to_strings(rc.base.weights()),
                    "fiber": vec_to_strings(&rc.fiber),
                    "theta": rc.theta.iter().map(|t| t.images().to_vec()).collect::<Vec<_>>(),
                    "coords": rc.coords,
                }),
            )
        }
        "eigenvalue_group" => {
            let (group, data) = eigenvalue_group(sys)?;
            let verified = data.iter().all(|d| d.verify(sys));
            expect(params, verified, json!({ "group": group.to_json(), "eigenfunctions_verified": verified }))
        }
        "eigenvalue_quotient" => {
            let rep = eigenvalue_quotient(sys, need_partition(part)?, &settings.tolerances())?;
            expect(
                params,
                rep.holds(),
                json!({
                    "group": rep.group.to_json(),
                    "factor_group": rep.factor_group.to_json(),
                    "index": rep.order,
                    "representatives": vec_to_strings(&rep.representatives),
                    "cover_exact": rep.cover_exact,
                    "distinct_modules_exact": rep.distinct_modules_exact,
                    "distinct_orthogonal": rep.distinct_orthogonal,
                    "same_coset_equal": rep.same_coset_equal,
                    "all_invariant": rep.all_invariant,
                    "max_cross_gram": rep.max_cross_gram,
                }),
            )
        }
        "pid_search" => {
            let rep = pairwise_independent_triple_search(sys, settings.cap)?;
            let vertices: Vec<Vec<String>> = rep.polytope.vertex_measures().iter().map(|v| vec_to_strings(v)).collect();
            expect(params, rep.pid, json!({ "pid": rep.pid, "vertices": vertices }))
        }
        _ => unreachable!("validated check name"),
    })
}

fn pair_check(name: &str, t: &FiniteSystem, s: &FiniteSystem, params: &Value, settings: &Settings) -> Result<Outcome> {
    Ok(match name {
        "joinings" => {
            let simplex = joining_polytope(t, s, settings.cap)?;
            let count = simplex.joinings.len();
            let holds = params.get("vertices").and_then(Value::as_u64).is_none_or(|v| v as usize == count);
            outcome(holds, simplex.to_json())
        }
        "disjointness" => {
            let d = is_disjoint(t, s, settings.cap)?;
            let cert: Vec<Value> = d.certificate.iter().map(|j| j.to_json()).collect();
            expect(params, d.disjoint, json!({ "disjoint": d.disjoint, "certificate": cert }))
        }
        "product_ergodicity" => {
            let rep = product_ergodicity_check(t, s)?;
            expect(
                params,
                rep.agree(),
                json!({
                    "ergodic_by_orbits": rep.ergodic_by_orbits,
                    "orbit_count": rep.orbit_count,
                    "intersection": rep.intersection.to_json(),
                }),
            )
        }
        "graph_joining" => {
            let map: Vec<usize> = params
                .get("map")
                .and_then(|v| serde_json::from_value(v.clone()).ok())
                .ok_or_else(|| Error::InvalidParameter("params.map must be a list of states".into()))?;
            let g = graph_joining(t, s, &map)?;
            expect(
                params,
                g.isomorphic_to_t,
                json!({ "joining": g.joining.to_json(), "isomorphic_to_t": g.isomorphic_to_t }),
            )
        }
        _ => unreachable!("validated check name"),
    })
}

fn need_action(action: Option<&GroupAction>) -> Result<&GroupAction> {
    action.ok_or_else(|| Error::Unsupported("check needs a finite group action".into()))
}

fn extension_check(
    name: &str,
    cocycle: &AnyCocycle,
    action: Option<&GroupAction>,
    params: &Value,
    settings: &Settings,
) -> Result<Outcome> {
    if name == "recurrence" {
        let recurrent = cocycle.is_recurrent()?;
        return Ok(expect(params, recurrent, json!({ "recurrent": recurrent })));
    }
    let c = cocycle.as_finite()?;
    Ok(match name {
        "skew_product" => {
            let skew = build_skew_product(c)?;
            let order = c.group().order();
            let commutes = (0..order).all(|g| skew.tau_commutes(g));
            let n = c.base().len() as i64;
            let iterates =
                (-n..=n).all(|k| (0..c.base().len()).all(|x| (0..order).all(|g| skew.iterate_identity_holds(k, x, g))));
            expect(
                params,
                commutes && iterates,
                json!({ "states": skew.system().len(), "tau_commutes": commutes, "iterate_identity": iterates }),
            )
        }
        "ergodic_components" => {
            let space = ergodic_components(&build_skew_product(c)?);
            expect(params, space.weights_equal(), space.to_json())
        }
        "mackey_action" => {
            let mackey = mackey_action(&build_skew_product(c)?)?;
            let (t, h) = (mackey.is_transitive(), mackey.is_homomorphism());
            expect(params, t && h, json!({ "perms": mackey.to_json(), "transitive": t, "homomorphism": h }))
        }
        "cocycle_ergodicity" => {
            let ergodic = is_ergodic_cocycle(c)?;
            let components = ergodic_components(&build_skew_product(c)?).len();
            outcome(ergodic == (components == 1), json!({ "ergodic": ergodic, "components": components }))
        }
        "simplex_isomorphism" => {
            let iso = simplex_isomorphism_check(c, need_action(action)?, settings.cap)?;
            let list = |v: &[Vec<ergolab::Rational>]| v.iter().map(|m| vec_to_strings(m)).collect::<Vec<_>>();
            expect(
                params,
                iso.holds(),
                json!({
                    "left_vertices": list(&iso.left.vertex_measures()),
                    "right_vertices": list(&iso.right.vertex_measures()),
                    "images": iso.images,
                    "affine": iso.affine,
                    "injective": iso.injective,
                    "surjective": iso.surjective,
                    "images_valid": iso.images_valid,
                    "dimensions_match": iso.dimensions_match,
                }),
            )
        }
        "relative_unique_ergodicity" => {
            let rue = relative_unique_ergodicity(c, need_action(action)?, settings.cap)?;
            expect(
                params,
                rue.consistent(),
                json!({
                    "unique": rue.unique,
                    "vertex_count": rue.vertex_count,
                    "cocycle_ergodic": rue.cocycle_ergodic,
                    "action_uniquely_ergodic": rue.action_uniquely_ergodic,
                }),
            )
        }
        "lemma_surrogate" => {
            let r = param_usize(params, "r")?;
            let rep = lemma_j1_surrogate(c, need_action(action)?, &FiniteSystem::cycle(r), settings.cap)?;
            let overlaps: Vec<Value> = rep
                .overlaps
                .iter()
                .map(|o| json!({ "component": o.component, "length": o.component_length, "intersection_order": o.intersection_order }))
                .collect();
            let consistent = !rep.hypothesis_holds || rep.conclusion_holds;
            expect(
                params,
                consistent,
                json!({
                    "hypothesis_holds": rep.hypothesis_holds,
                    "overlaps": overlaps,
                    "joining_vertices": rep.joining_vertices,
                    "slice_vertices": rep.slice_vertices,
                    "conclusion_holds": rep.conclusion_holds,
                    "witness": rep.witness.as_ref().map(|w| vec_to_strings(w)),
                }),
            )
        }
        _ => unreachable!("validated check name"),
    })
}

fn bundle_check(
    name: &str,
    fs: &FiberedSystem,
    bundle: &ModuleBundle,
    other: &Option<ModuleBundle>,
    params: &Value,
    settings: &Settings,
) -> Result<Outcome> {
    let tol = settings.tolerances();
    Ok(match name {
        "invariance" => {
            let res = invariance_residuals(bundle, fs);
            let max = res.iter().copied().fold(0.0, f64::max);
            expect(params, max <= tol.residual, json!({ "residuals": res, "max_residual": max }))
        }
        "constant_norm" => {
            let rep = check_constant_norm(bundle, fs, &tol)?;
            let details = serde_json::to_value(&rep).map_err(|e| Error::Parse(e.to_string()))?;
            expect(params, rep.holds, details)
        }
        "relative_eigenvalue" => {
            let eig = relative_eigenvalue(bundle, fs, &tol)?;
            let holds = eig.max_unitarity_residual <= tol.constraint;
            let mon = eig.monodromy(fs).ok();
            expect(
                params,
                holds,
                json!({
                    "matrices": eig.matrices.iter().map(cmat_json).collect::<Vec<_>>(),
                    "monodromy": mon.as_ref().map(cmat_json),
                    "max_unitarity_residual": eig.max_unitarity_residual,
                    "max_reconstruction_residual": eig.max_reconstruction_residual,
                }),
            )
        }
        "irreducible_decomposition" => {
            let dec = irreducible_decomposition(bundle, fs, &tol)?;
            expect(
                params,
                dec.reconstruction_residual <= tol.residual,
                json!({
                    "pieces": dec.pieces.len(),
                    "eigenvalues": dec.eigenvalues.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                    "non_unique": dec.non_unique,
                    "reconstruction_residual": dec.reconstruction_residual,
                }),
            )
        }
        "orthogonality" => {
            let rep = fiberwise_orthogonality(bundle, need_other(other)?, fs, &tol)?;
            let verdict = match rep.verdict {
                OrthogonalityVerdict::Orthogonal => "orthogonal",
                OrthogonalityVerdict::EqualSpans => "equal_spans",
                OrthogonalityVerdict::NonOrthogonal => "non_orthogonal",
            };
            expect(
                params,
                rep.verdict != OrthogonalityVerdict::NonOrthogonal,
                json!({ "verdict": verdict, "max_entry": rep.max_entry, "max_span_distance": rep.max_span_distance }),
            )
        }
        "cohomology" => {
            let details = match cohomology_test(bundle, need_other(other)?, fs, &tol)? {
                CohomologyVerdict::Orthogonal { max_entry } => {
                    json!({ "verdict": "orthogonal", "max_entry": max_entry })
                }
                CohomologyVerdict::Cohomologous { alpha, transfer, intertwining_residual } => json!({
                    "verdict": "cohomologous",
                    "alpha": alpha,
                    "transfer": transfer.iter().map(cmat_json).collect::<Vec<_>>(),
                    "intertwining_residual": intertwining_residual,
                }),
            };
            outcome(true, details)
        }
        _ => unreachable!("validated check name"),
    })
}

fn weyl(alpha: f64, x0: f64, k: i64, params: &Value) -> Result<Outcome> {
    let candidates: Vec<f64> = params
        .get("candidates")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .ok_or_else(|| Error::InvalidParameter("params.candidates must be a list of numbers".into()))?;
    let samples = param_usize(params, "samples")?;
    let rep = weyl_eigenvalue_scan(&mut RotationSampler::new(alpha, x0, k), &candidates, samples)?;
    Ok(outcome(true, serde_json::to_value(&rep).map_err(|e| Error::Parse(e.to_string()))?))
}
