//! Exact joining polytopes.
//!
//! Invariant measures of a group of permutations are nonnegative combinations
//! of uniform orbit measures, so every polytope here lives in orbit-mass
//! coordinates and is cut out by marginal equalities. Vertices are enumerated
//! by the double description method in integer arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::base_systems::FiniteSystem;
use crate::ergodic_structure::{ergodic_components, mackey_action};
use crate::error::{Error, Result};
use crate::groups_cocycles::{build_rokhlin_extension, build_skew_product, Cocycle, FiniteGroup, GroupAction};
use crate::perm::{orbit_labels, orbits_of_generated, Perm};
use crate::rational::{self, Rational};

pub const DEFAULT_CAP: usize = 1_000_000;

/// `Σ_{s : projection[s] = v} κ(s) = target[v]` for every value `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalConstraint {
    pub projection: Vec<usize>,
    pub target: Vec<Rational>,
}

/// Invariant measures on `0..n` satisfying marginal constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitPolytope {
    pub states: usize,
    pub orbits: Vec<Vec<usize>>,
    labels: Vec<usize>,
    /// Orbit masses of each vertex, in lexicographic order.
    pub vertices: Vec<Vec<Rational>>,
}

impl OrbitPolytope {
    /// Spreads orbit masses uniformly over orbit states.
    pub fn measure(&self, masses: &[Rational]) -> Vec<Rational> {
        (0..self.states)
            .map(|s| {
                let o = self.labels[s];
                &masses[o] / rational::int(self.orbits[o].len() as i64)
            })
            .collect()
    }

    pub fn vertex_measures(&self) -> Vec<Vec<Rational>> {
        self.vertices.iter().map(|v| self.measure(v)).collect()
    }

    pub fn orbit_of(&self, s: usize) -> usize {
        self.labels[s]
    }

    /// Orbit masses of a state measure (assumed invariant).
    pub fn masses_of(&self, measure: &[Rational]) -> Vec<Rational> {
        self.orbits.iter().map(|o| rational::sum(o.iter().map(|&s| &measure[s]))).collect()
    }
}

pub fn invariant_polytope(
    states: usize,
    gens: &[&Perm],
    constraints: &[MarginalConstraint],
    cap: usize,
) -> Result<OrbitPolytope> {
    let orbits = orbits_of_generated(states, gens);
    if orbits.len() > cap {
        return Err(Error::SizeCap { size: orbits.len(), cap });
    }
    let labels = orbit_labels(states, &orbits);
    let d = orbits.len();
    let mut rows: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for c in constraints {
        assert_eq!(c.projection.len(), states);
        let mut coef = vec![vec![Rational::zero(); d]; c.target.len()];
        for s in 0..states {
            coef[c.projection[s]][labels[s]] += rational::ratio(1, orbits[labels[s]].len() as i64);
        }
        rows.extend(coef.into_iter().zip(c.target.iter().cloned()));
    }
    let mut vertices = polytope_vertices(d, &rows);
    vertices.sort();
    Ok(OrbitPolytope { states, orbits, labels, vertices })
}

type Bits = Vec<u64>;

fn bit_get(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn bits_subset(a: &Bits, b: &Bits) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

struct Ray {
    v: Vec<BigInt>,
    zeros: Bits,
}

impl Ray {
    fn new(v: Vec<BigInt>) -> Self {
        let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        let v: Vec<BigInt> = if g.is_zero() || g.is_one() { v } else { v.into_iter().map(|x| x / &g).collect() };
        let mut zeros = vec![0u64; v.len().div_ceil(64)];
        for (i, x) in v.iter().enumerate() {
            if x.is_zero() {
                zeros[i / 64] |= 1 << (i % 64);
            }
        }
        Ray { v, zeros }
    }
}

/// Vertices of `{m ≥ 0 : a·m = b for every row}` via the homogenized cone
/// `{(m, s) ≥ 0 : a·m − b s = 0}`, adding one hyperplane at a time.
pub fn polytope_vertices(d: usize, rows: &[(Vec<Rational>, Rational)]) -> Vec<Vec<Rational>> {
    let dim = d + 1;
    let mut rays: Vec<Ray> = (0..dim)
        .map(|i| Ray::new((0..dim).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()))
        .collect();
    for (a, b) in rows {
        let den = rational::lcm_of_denominators(a.iter().chain(std::iter::once(b)));
        let h: Vec<BigInt> = a
            .iter()
            .map(|x| (x * Rational::from_integer(den.clone())).to_integer())
            .chain(std::iter::once(-(b * Rational::from_integer(den.clone())).to_integer()))
            .collect();
        let vals: Vec<BigInt> = rays.iter().map(|r| r.v.iter().zip(&h).map(|(x, y)| x * y).sum()).collect();
        if vals.iter().all(Zero::is_zero) {
            continue;
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let mut next: Vec<Ray> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common: Bits = rays[p].zeros.iter().zip(&rays[n].zeros).map(|(x, y)| x & y).collect();
                let adjacent = (0..rays.len()).all(|k| k == p || k == n || !bits_subset(&common, &rays[k].zeros));
                if adjacent {
                    let v = rays[p].v.iter().zip(&rays[n].v).map(|(x, y)| &vals[p] * y - &vals[n] * x).collect();
                    next.push(Ray::new(v));
                }
            }
        }
        let zero: Vec<Ray> = rays.into_iter().zip(&vals).filter(|(_, v)| v.is_zero()).map(|(r, _)| r).collect();
        rays = zero;
        rays.extend(next);
    }
    rays.iter()
        .filter(|r| !bit_get(&r.zeros, d))
        .map(|r| {
            let s = Rational::from_integer(r.v[d].clone());
            r.v[..d].iter().map(|x| Rational::from_integer(x.clone()) / &s).collect()
        })
        .collect()
}

/// Rank of a rational matrix given as rows.
pub fn rational_rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let f = &row[col] / &pivot_row[col];
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Dimension of the affine hull of a point set.
pub fn affine_dimension(points: &[Vec<Rational>]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let diffs: Vec<Vec<Rational>> =
        points[1..].iter().map(|p| p.iter().zip(&points[0]).map(|(a, b)| a - b).collect()).collect();
    rational_rank(&diffs)
}

/// Exact measure `κ` on `X × Y`, `entries[x][y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JoiningMatrix {
    pub entries: Vec<Vec<Rational>>,
}

impl JoiningMatrix {
    pub fn from_flat(flat: &[Rational], cols: usize) -> Self {
        Self { entries: flat.chunks(cols).map(<[Rational]>::to_vec).collect() }
    }

    pub fn flat(&self) -> Vec<Rational> {
        self.entries.iter().flatten().cloned().collect()
    }

    /// Nonnegative, marginals `μ` and `ν`, and `(T × S)`-invariant.
    pub fn is_joining(&self, t: &FiniteSystem, s: &FiniteSystem) -> bool {
        let (n, m) = (t.len(), s.len());
        if self.entries.len() != n || self.entries.iter().any(|r| r.len() != m) {
            return false;
        }
        let nonneg = self.entries.iter().flatten().all(|k| !k.is_negative());
        let rows = (0..n).all(|x| &rational::sum(&self.entries[x]) == t.weight(x));
        let cols = (0..m).all(|y| &rational::sum((0..n).map(|x| &self.entries[x][y])) == s.weight(y));
        let inv =
            (0..n).all(|x| (0..m).all(|y| self.entries[t.perm().apply(x)][s.perm().apply(y)] == self.entries[x][y]));
        nonneg && rows && cols && inv
    }

    pub fn is_product(&self, t: &FiniteSystem, s: &FiniteSystem) -> bool {
        (0..t.len()).all(|x| (0..s.len()).all(|y| self.entries[x][y] == t.weight(x) * s.weight(y)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self.entries.iter().map(|r| rational::vec_to_strings(r)).collect::<Vec<_>>())
    }
}

fn require_ergodic_mp(sys: &FiniteSystem, name: &str) -> Result<()> {
    if !sys.is_measure_preserving() {
        return Err(Error::Precondition(format!("{name} is not measure-preserving")));
    }
    if !sys.is_ergodic() {
        return Err(Error::NotErgodic { components: sys.orbits().len() });
    }
    Ok(())
}

fn product_perm(a: &Perm, b: &Perm) -> Perm {
    let m = b.len();
    Perm::new((0..a.len() * m).map(|i| a.apply(i / m) * m + b.apply(i % m)).collect()).expect("product of bijections")
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoiningSimplex {
    pub polytope: OrbitPolytope,
    pub joinings: Vec<JoiningMatrix>,
}

impl JoiningSimplex {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "orbits": self.polytope.orbits.len(),
            "vertices": self.polytope.vertices.iter().map(|v| rational::vec_to_strings(v)).collect::<Vec<_>>(),
            "joinings": self.joinings.iter().map(JoiningMatrix::to_json).collect::<Vec<_>>(),
        })
    }
}

pub fn joining_polytope(t: &FiniteSystem, s: &FiniteSystem, cap: usize) -> Result<JoiningSimplex> {
    require_ergodic_mp(t, "T")?;
    require_ergodic_mp(s, "S")?;
    let (n, m) = (t.len(), s.len());
    let prod = product_perm(t.perm(), s.perm());
    let constraints = [
        MarginalConstraint { projection: (0..n * m).map(|i| i / m).collect(), target: t.weights().to_vec() },
        MarginalConstraint { projection: (0..n * m).map(|i| i % m).collect(), target: s.weights().to_vec() },
    ];
    let polytope = invariant_polytope(n * m, &[&prod], &constraints, cap)?;
    let joinings = polytope.vertex_measures().iter().map(|k| JoiningMatrix::from_flat(k, m)).collect();
    Ok(JoiningSimplex { polytope, joinings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Disjointness {
    pub disjoint: bool,
    /// The vertex list; for non-disjoint pairs, the witnesses.
    pub certificate: Vec<JoiningMatrix>,
}

pub fn is_disjoint(t: &FiniteSystem, s: &FiniteSystem, cap: usize) -> Result<Disjointness> {
    let simplex = joining_polytope(t, s, cap)?;
    let disjoint = simplex.joinings.len() == 1 && simplex.joinings[0].is_product(t, s);
    Ok(Disjointness { disjoint, certificate: simplex.joinings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphJoining {
    pub joining: JoiningMatrix,
    /// The joined system restricted to its support has the cycle type of `T`.
    pub isomorphic_to_t: bool,
}

/// `κ(x, y) = μ(x)·[y = W(x)]`.
pub fn graph_joining(t: &FiniteSystem, s: &FiniteSystem, w: &[usize]) -> Result<GraphJoining> {
    let (n, m) = (t.len(), s.len());
    if w.len() != n || n != m {
        return Err(Error::InvalidIsomorphism {
            state: 0,
            detail: format!("map has {} entries for {n} → {m} states", w.len()),
        });
    }
    if let Err(e) = Perm::new(w.to_vec()) {
        return Err(Error::InvalidIsomorphism { state: 0, detail: e.to_string() });
    }
    for x in 0..n {
        if w[t.perm().apply(x)] != s.perm().apply(w[x]) {
            return Err(Error::InvalidIsomorphism { state: x, detail: "W∘T ≠ S∘W".into() });
        }
        if t.weight(x) != s.weight(w[x]) {
            return Err(Error::InvalidIsomorphism { state: x, detail: "weights differ".into() });
        }
    }
    let entries = (0..n)
        .map(|x| (0..m).map(|y| if y == w[x] { t.weight(x).clone() } else { Rational::zero() }).collect())
        .collect();
    let prod = product_perm(t.perm(), s.perm());
    let support: Vec<usize> = (0..n).map(|x| x * m + w[x]).collect();
    let mut lengths: Vec<usize> = orbits_of_generated(n * m, &[&prod])
        .into_iter()
        .filter(|o| o.iter().any(|st| support.contains(st)))
        .map(|o| o.len())
        .collect();
    lengths.sort_unstable();
    Ok(GraphJoining { joining: JoiningMatrix { entries }, isomorphic_to_t: lengths == t.perm().cycle_type() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PidReport {
    pub polytope: OrbitPolytope,
    /// Only `μ^{⊗3}` is invariant with product pair marginals.
    pub pid: bool,
}

/// Invariant measures on `X³` whose three pair marginals are `μ ⊗ μ`.
pub fn pairwise_independent_triple_search(t: &FiniteSystem, cap: usize) -> Result<PidReport> {
    require_ergodic_mp(t, "T")?;
    let n = t.len();
    let total = n
        .checked_pow(3)
        .filter(|&v| v <= cap.saturating_mul(n.max(1)))
        .ok_or(Error::SizeCap { size: usize::MAX, cap })?;
    let p = t.perm();
    let prod =
        Perm::new((0..total).map(|i| (p.apply(i / (n * n)) * n + p.apply(i / n % n)) * n + p.apply(i % n)).collect())?;
    let pair_target: Vec<Rational> = (0..n * n).map(|i| t.weight(i / n) * t.weight(i % n)).collect();
    let coord = |i: usize, k: usize| [i / (n * n), i / n % n, i % n][k];
    let constraints: Vec<MarginalConstraint> = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(a, b)| MarginalConstraint {
            projection: (0..total).map(|i| coord(i, a) * n + coord(i, b)).collect(),
            target: pair_target.clone(),
        })
        .collect();
    let polytope = invariant_polytope(total, &[&prod], &constraints, cap)?;
    let product: Vec<Rational> =
        (0..total).map(|i| t.weight(coord(i, 0)) * t.weight(coord(i, 1)) * t.weight(coord(i, 2))).collect();
    let pid = polytope.vertices.len() == 1 && polytope.vertex_measures()[0] == product;
    Ok(PidReport { polytope, pid })
}

/// Invariant measures of `T_{φ,S}` on `X × Y` with `X`-marginal `μ`.
pub fn extension_polytope(cocycle: &Cocycle<FiniteGroup>, action: &GroupAction, cap: usize) -> Result<OrbitPolytope> {
    let ext = build_rokhlin_extension(cocycle, action)?;
    let m = action.space_len();
    let n = ext.system().len();
    let constraint =
        MarginalConstraint { projection: (0..n).map(|i| i / m).collect(), target: cocycle.base().weights().to_vec() };
    invariant_polytope(n, &[ext.system().perm()], &[constraint], cap)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexIsomorphism {
    pub left: OrbitPolytope,
    pub right: OrbitPolytope,
    /// `images[k]` is the index of the right vertex hit by left vertex `k`.
    pub images: Vec<Option<usize>>,
    pub affine: bool,
    pub injective: bool,
    pub surjective: bool,
    /// Every image is `τ^φ × S`-invariant with `C_φ`-marginal `λ_φ`.
    pub images_valid: bool,
    pub dimensions_match: bool,
}

impl SimplexIsomorphism {
    pub fn holds(&self) -> bool {
        self.affine && self.injective && self.surjective && self.images_valid && self.dimensions_match
    }
}

/// The lift-and-project map `κ ↦ κ̃`:
/// `κ̃(c, y) = Σ_{(x,g) ∈ c} λ(g) κ(x, S_g y)`.
pub fn lift_to_components(
    kappa: &[Rational],
    cocycle: &Cocycle<FiniteGroup>,
    action: &GroupAction,
) -> Result<Vec<Rational>> {
    let skew = build_skew_product(cocycle)?;
    let space = ergodic_components(&skew);
    let order = cocycle.group().order();
    let m = action.space_len();
    let lambda = rational::ratio(1, order as i64);
    let mut out = vec![Rational::zero(); space.len() * m];
    for x in 0..cocycle.base().len() {
        for g in 0..order {
            let c = space.component_of(skew.state(x, g));
            for y in 0..m {
                out[c * m + y] += &lambda * &kappa[x * m + action.perm(g).apply(y)];
            }
        }
    }
    Ok(out)
}

pub fn simplex_isomorphism_check(
    cocycle: &Cocycle<FiniteGroup>,
    action: &GroupAction,
    cap: usize,
) -> Result<SimplexIsomorphism> {
    if !cocycle.base().is_ergodic() {
        return Err(Error::NotErgodic { components: cocycle.base().orbits().len() });
    }
    let left = extension_polytope(cocycle, action, cap)?;

    let skew = build_skew_product(cocycle)?;
    let space = ergodic_components(&skew);
    let mackey = mackey_action(&skew)?;
    let m = action.space_len();
    let k = space.len();
    let gens: Vec<Perm> =
        cocycle.group().generators().into_iter().map(|g| product_perm(mackey.perm(g), action.perm(g))).collect();
    let gen_refs: Vec<&Perm> = gens.iter().collect();
    let constraint =
        MarginalConstraint { projection: (0..k * m).map(|i| i / m).collect(), target: space.lambda().to_vec() };
    let right = invariant_polytope(k * m, &gen_refs, &[constraint.clone()], cap)?;
    let right_measures = right.vertex_measures();

    let left_measures = left.vertex_measures();
    let mapped =
        left_measures.iter().map(|kappa| lift_to_components(kappa, cocycle, action)).collect::<Result<Vec<_>>>()?;
    let images: Vec<Option<usize>> = mapped.iter().map(|img| right_measures.iter().position(|r| r == img)).collect();

    let all_gens: Vec<Perm> =
        (0..cocycle.group().order()).map(|g| product_perm(mackey.perm(g), action.perm(g))).collect();
    let images_valid = mapped.iter().all(|img| {
        let invariant = all_gens.iter().all(|p| (0..k * m).all(|i| img[p.apply(i)] == img[i]));
        let marginal = (0..k).all(|c| rational::sum(&img[c * m..(c + 1) * m]) == space.lambda()[c]);
        invariant && marginal && img.iter().all(|v| !v.is_negative())
    });

    // Linearity on the barycenter of the left vertices.
    let count = rational::int(left_measures.len().max(1) as i64);
    let bary: Vec<Rational> =
        (0..left.states).map(|s| rational::sum(left_measures.iter().map(|v| &v[s])) / &count).collect();
    let bary_img = lift_to_components(&bary, cocycle, action)?;
    let affine = (0..k * m).all(|i| bary_img[i] == rational::sum(mapped.iter().map(|v| &v[i])) / &count);

    let mut hit: Vec<usize> = images.iter().flatten().copied().collect();
    hit.sort_unstable();
    let injective = images.iter().all(Option::is_some) && hit.windows(2).all(|w| w[0] != w[1]);
    hit.dedup();
    let surjective = hit.len() == right.vertices.len();
    let dimensions_match = affine_dimension(&left.vertices) == affine_dimension(&right.vertices);
    Ok(SimplexIsomorphism { left, right, images, affine, injective, surjective, images_valid, dimensions_match })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeUniqueErgodicity {
    pub unique: bool,
    pub vertex_count: usize,
    pub cocycle_ergodic: bool,
    pub action_uniquely_ergodic: bool,
}

impl RelativeUniqueErgodicity {
    /// Ergodic cocycle and uniquely ergodic action force uniqueness.
    pub fn consistent(&self) -> bool {
        !(self.cocycle_ergodic && self.action_uniquely_ergodic) || self.unique
    }
}

pub fn relative_unique_ergodicity(
    cocycle: &Cocycle<FiniteGroup>,
    action: &GroupAction,
    cap: usize,
) -> Result<RelativeUniqueErgodicity> {
    let poly = extension_polytope(cocycle, action, cap)?;
    let m = action.space_len();
    let product: Vec<Rational> =
        (0..poly.states).map(|i| cocycle.base().weight(i / m) * &action.weights()[i % m]).collect();
    let unique = poly.vertices.len() == 1 && poly.vertex_measures()[0] == product;
    Ok(RelativeUniqueErgodicity {
        unique,
        vertex_count: poly.vertices.len(),
        cocycle_ergodic: build_skew_product(cocycle)?.system().is_ergodic(),
        action_uniquely_ergodic: action.is_transitive(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOverlap {
    pub component: usize,
    pub component_length: usize,
    /// Order of `e(T_φ|_c) ∩ e(R)`.
    pub intersection_order: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub hypothesis_holds: bool,
    pub overlaps: Vec<SpectralOverlap>,
    /// Vertices of the joining polytope (`X`-marginal `μ`, `Z`-marginal `ρ`).
    pub joining_vertices: usize,
    /// Vertices of the slice where additionally `κ|_{X×Z} = μ ⊗ ρ`.
    pub slice_vertices: usize,
    /// Every slice vertex equals `κ_{X×Y} ⊗ ρ`.
    pub conclusion_holds: bool,
    /// A slice vertex that is not of that form, as a measure on `X × Y × Z`.
    pub witness: Option<Vec<Rational>>,
}

/// Slice vertices (and so every point of the slice, by linearity) are
/// checked for `κ = κ_{X×Y} ⊗ ρ`.
pub fn lemma_j1_surrogate(
    cocycle: &Cocycle<FiniteGroup>,
    action: &GroupAction,
    r: &FiniteSystem,
    cap: usize,
) -> Result<LemmaReport> {
    require_ergodic_mp(r, "R")?;
    let skew = build_skew_product(cocycle)?;
    let space = ergodic_components(&skew);
    let overlaps: Vec<SpectralOverlap> = space
        .components()
        .iter()
        .enumerate()
        .map(|(c, supp)| SpectralOverlap {
            component: c,
            component_length: supp.len(),
            intersection_order: supp.len().gcd(&r.len()),
        })
        .filter(|o| o.intersection_order > 1)
        .collect();

    let ext = build_rokhlin_extension(cocycle, action)?;
    let (nx, ny, nz) = (cocycle.base().len(), action.space_len(), r.len());
    let total = nx * ny * nz;
    let prod = product_perm(ext.system().perm(), r.perm());
    let x_of = |i: usize| i / (ny * nz);
    let z_of = |i: usize| i % nz;
    let x_marginal =
        MarginalConstraint { projection: (0..total).map(x_of).collect(), target: cocycle.base().weights().to_vec() };
    let z_marginal = MarginalConstraint { projection: (0..total).map(z_of).collect(), target: r.weights().to_vec() };
    let xz_marginal = MarginalConstraint {
        projection: (0..total).map(|i| x_of(i) * nz + z_of(i)).collect(),
        target: (0..nx * nz).map(|i| cocycle.base().weight(i / nz) * r.weight(i % nz)).collect(),
    };
    let joinings = invariant_polytope(total, &[&prod], &[x_marginal, z_marginal], cap)?;
    let slice = invariant_polytope(total, &[&prod], &[xz_marginal], cap)?;

    let factors = |kappa: &[Rational]| {
        (0..nx * ny).all(|xy| {
            let marg = rational::sum(&kappa[xy * nz..(xy + 1) * nz]);
            (0..nz).all(|z| kappa[xy * nz + z] == &marg * r.weight(z))
        })
    };
    let measures = slice.vertex_measures();
    let witness = measures.iter().find(|k| !factors(k)).cloned();
    Ok(LemmaReport {
        hypothesis_holds: overlaps.is_empty(),
        overlaps,
        joining_vertices: joinings.vertices.len(),
        slice_vertices: slice.vertices.len(),
        conclusion_holds: witness.is_none(),
        witness,
    })
}

/// `instance,orbits,vertices,disjoint` rows.
pub fn summary_csv(rows: &[(String, usize, usize, bool)]) -> String {
    let mut out = String::from("instance,orbits,vertices,disjoint\n");
    for (name, o, v, d) in rows {
        out.push_str(&format!("{name},{o},{v},{d}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn cyc(n: usize) -> FiniteSystem {
        FiniteSystem::cycle(n)
    }

    /// Independent oracle: a feasible point is a vertex iff the constraint
    /// columns on its support are linearly independent.
    fn is_vertex_by_rank(poly: &OrbitPolytope, constraints: &[MarginalConstraint], v: &[Rational]) -> bool {
        let support: Vec<usize> = (0..v.len()).filter(|&o| !v[o].is_zero()).collect();
        let mut cols = Vec::new();
        for &o in &support {
            let mut col = Vec::new();
            for c in constraints {
                let mut per = vec![Rational::zero(); c.target.len()];
                for &s in &poly.orbits[o] {
                    per[c.projection[s]] += ratio(1, poly.orbits[o].len() as i64);
                }
                col.extend(per);
            }
            cols.push(col);
        }
        rational_rank(&cols) == support.len()
    }

    #[test]
    fn polytope_examples() {
        let s = joining_polytope(&cyc(2), &cyc(3), DEFAULT_CAP).unwrap();
        assert_eq!(s.joinings.len(), 1);
        assert!(s.joinings[0].is_product(&cyc(2), &cyc(3)));

        let s = joining_polytope(&cyc(2), &cyc(2), DEFAULT_CAP).unwrap();
        assert_eq!(s.joinings.len(), 2);
        assert!(s.joinings.iter().all(|j| j.is_joining(&cyc(2), &cyc(2))));

        let w = FiniteSystem::new(vec![ratio(1, 2); 2], Perm::rotation(2, 1)).unwrap();
        assert_eq!(joining_polytope(&w, &cyc(1), DEFAULT_CAP).unwrap().joinings.len(), 1);

        assert!(matches!(joining_polytope(&cyc(3), &cyc(3), 2), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn self_joinings_of_cycles_are_graphs() {
        for n in 1..=12 {
            let s = joining_polytope(&cyc(n), &cyc(n), DEFAULT_CAP).unwrap();
            assert_eq!(s.joinings.len(), n);
            assert!(s.joinings.iter().all(|j| j.is_joining(&cyc(n), &cyc(n))));
        }
    }

    #[test]
    fn disjointness_examples() {
        assert!(is_disjoint(&cyc(2), &cyc(3), DEFAULT_CAP).unwrap().disjoint);
        let d = is_disjoint(&cyc(2), &cyc(2), DEFAULT_CAP).unwrap();
        assert!(!d.disjoint);
        assert_eq!(d.certificate.len(), 2);
        for w in [vec![0, 1], vec![1, 0]] {
            let g = graph_joining(&cyc(2), &cyc(2), &w).unwrap();
            assert!(d.certificate.contains(&g.joining));
        }
        assert!(is_disjoint(&cyc(5), &cyc(1), DEFAULT_CAP).unwrap().disjoint);
    }

    #[test]
    fn graph_joining_examples() {
        let g = graph_joining(&cyc(4), &cyc(4), &[0, 1, 2, 3]).unwrap();
        assert!(g.isomorphic_to_t);
        assert!((0..4).all(|x| g.joining.entries[x][x] == ratio(1, 4)));
        let g = graph_joining(&cyc(4), &cyc(4), &[1, 2, 3, 0]).unwrap();
        let s = joining_polytope(&cyc(4), &cyc(4), DEFAULT_CAP).unwrap();
        assert!(s.joinings.contains(&g.joining));
        let err = graph_joining(&cyc(4), &cyc(4), &[0, 2, 1, 3]).unwrap_err();
        assert_eq!(err, Error::InvalidIsomorphism { state: 0, detail: "W∘T ≠ S∘W".into() });
    }

    #[test]
    fn pid_examples() {
        let r = pairwise_independent_triple_search(&cyc(3), DEFAULT_CAP).unwrap();
        assert!(!r.pid);
        // Uniform on x + y + z ≡ 0 (mod 3) is invariant and pairwise independent.
        let plane: Vec<Rational> =
            (0..27).map(|i| if (i / 9 + i / 3 % 3 + i % 3) % 3 == 0 { ratio(1, 9) } else { ratio(0, 1) }).collect();
        let masses = r.polytope.masses_of(&plane);
        assert!(r.polytope.vertices.contains(&masses));

        let r = pairwise_independent_triple_search(&cyc(2), DEFAULT_CAP).unwrap();
        assert!(r.pid);
        assert_eq!(r.polytope.vertices, vec![vec![ratio(1, 4); 4]]);

        assert!(pairwise_independent_triple_search(&cyc(1), DEFAULT_CAP).unwrap().pid);
    }

    #[test]
    fn vertices_pass_rank_oracle() {
        let (t, s) = (cyc(4), cyc(6));
        let prod = product_perm(t.perm(), s.perm());
        let cons = [
            MarginalConstraint { projection: (0..24).map(|i| i / 6).collect(), target: t.weights().to_vec() },
            MarginalConstraint { projection: (0..24).map(|i| i % 6).collect(), target: s.weights().to_vec() },
        ];
        let poly = invariant_polytope(24, &[&prod], &cons, DEFAULT_CAP).unwrap();
        assert_eq!(poly.vertices.len(), 2);
        assert!(poly.vertices.iter().all(|v| is_vertex_by_rank(&poly, &cons, v)));
    }

    fn z2_swap() -> GroupAction {
        GroupAction::cyclic_generator(2, Perm::rotation(2, 1), vec![ratio(1, 2); 2]).unwrap()
    }

    #[test]
    fn simplex_isomorphism_examples() {
        let z2 = FiniteGroup::cyclic(2);
        let c = Cocycle::new(cyc(2), z2.clone(), vec![1, 1]).unwrap();
        let r = simplex_isomorphism_check(&c, &z2_swap(), DEFAULT_CAP).unwrap();
        assert_eq!((r.left.vertices.len(), r.right.vertices.len()), (2, 2));
        assert!(r.holds(), "{r:?}");

        let c = Cocycle::new(cyc(2), z2.clone(), vec![1, 0]).unwrap();
        let r = simplex_isomorphism_check(&c, &z2_swap(), DEFAULT_CAP).unwrap();
        assert_eq!((r.left.vertices.len(), r.right.vertices.len()), (1, 1));
        assert!(r.holds());

        let trivial = FiniteGroup::cyclic(1);
        let c = Cocycle::new(cyc(3), trivial.clone(), vec![0; 3]).unwrap();
        let act = GroupAction::trivial(&trivial, 2);
        let r = simplex_isomorphism_check(&c, &act, DEFAULT_CAP).unwrap();
        assert_eq!(r.left.vertices.len(), r.right.vertices.len());
        assert!(r.holds());
    }

    #[test]
    fn relative_unique_ergodicity_examples() {
        let z2 = FiniteGroup::cyclic(2);
        let c = Cocycle::new(cyc(2), z2.clone(), vec![1, 0]).unwrap();
        let r = relative_unique_ergodicity(&c, &z2_swap(), DEFAULT_CAP).unwrap();
        assert!(r.unique && r.consistent());

        let c = Cocycle::new(cyc(2), z2.clone(), vec![0, 0]).unwrap();
        let r = relative_unique_ergodicity(&c, &z2_swap(), DEFAULT_CAP).unwrap();
        assert!(!r.unique && r.vertex_count > 1);

        let r = relative_unique_ergodicity(&c, &GroupAction::trivial(&z2, 1), DEFAULT_CAP).unwrap();
        assert!(r.unique);
    }

    #[test]
    fn lemma_examples() {
        let z2 = FiniteGroup::cyclic(2);
        let c = Cocycle::new(cyc(2), z2.clone(), vec![1, 0]).unwrap();
        let r = lemma_j1_surrogate(&c, &z2_swap(), &cyc(3), DEFAULT_CAP).unwrap();
        assert!(r.hypothesis_holds && r.conclusion_holds);

        let r = lemma_j1_surrogate(&c, &z2_swap(), &cyc(1), DEFAULT_CAP).unwrap();
        assert!(r.hypothesis_holds && r.conclusion_holds);

        // Shared eigenvalue 1/2, but every joining with product X × Z marginal
        // is still a product here.
        let r = lemma_j1_surrogate(&c, &z2_swap(), &cyc(2), DEFAULT_CAP).unwrap();
        assert!(!r.hypothesis_holds);
        assert_eq!(r.overlaps[0].intersection_order, 2);
        assert!(r.conclusion_holds);

        // Over a 3-point base the 6-cycle meets R = Z2 in a non-product slice vertex.
        let c = Cocycle::new(cyc(3), z2, vec![1, 0, 0]).unwrap();
        let r = lemma_j1_surrogate(&c, &z2_swap(), &cyc(2), DEFAULT_CAP).unwrap();
        assert!(!r.hypothesis_holds);
        assert!(!r.conclusion_holds);
        assert!(r.witness.is_some());
    }

    #[test]
    fn rank_of_dependent_rows() {
        let rows = vec![
            vec![ratio(1, 1), ratio(2, 1), ratio(3, 1)],
            vec![ratio(2, 1), ratio(4, 1), ratio(6, 1)],
            vec![ratio(0, 1), ratio(1, 1), ratio(1, 2)],
        ];
        assert_eq!(rational_rank(&rows), 2);
    }
}
