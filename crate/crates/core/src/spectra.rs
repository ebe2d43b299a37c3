//! Eigenvalue groups of finite systems, coset structure over factors, and a
//! numeric Weyl-sum scanner for sampled circle maps.
//!
//! Eigenvalues are fractions `p/q` standing for `e^{2πi p/q}`; eigenfunctions
//! store phases, so `f(x) = e^{2πi phase(x)}`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::base_systems::{factor_system, is_rfmp, rokhlin_coordinatize, FiniteSystem, InvariantPartition};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::perm::{orbits_of_generated, Perm};
use crate::rank_modules::{
    fiberwise_gram_schmidt, fiberwise_orthogonality, is_invariant, FiberedSystem, ModuleBundle, OrthogonalityVerdict,
    Tolerances,
};
use crate::rational::{self, Rational};

/// The cyclic group `{p/q : 0 ≤ p < q}` under addition mod 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootOfUnityGroup {
    order: usize,
}

impl RootOfUnityGroup {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        Self { order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn elements(&self) -> Vec<Rational> {
        (0..self.order).map(|p| rational::ratio(p as i64, self.order as i64)).collect()
    }

    pub fn contains(&self, c: &Rational) -> bool {
        let q = self.order as i64;
        let scaled = c * rational::int(q);
        scaled.is_integer()
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self::new(self.order.gcd(&other.order))
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "order": self.order,
            "elements": rational::vec_to_strings(&self.elements()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenData {
    pub eigenvalue: Rational,
    /// `phases[x]` for every state of the system the eigenfunction lives on.
    pub phases: Vec<Rational>,
}

impl EigenData {
    pub fn value(&self, x: usize) -> Complex64 {
        linalg::cis(rational::to_f64(&self.phases[x]))
    }

    /// `f(Tx) = e^{2πi c} f(x)` at every state, compared as fractions.
    pub fn verify(&self, sys: &FiniteSystem) -> bool {
        self.phases.len() == sys.len()
            && (0..sys.len())
                .all(|x| self.phases[sys.perm().apply(x)] == rational::frac(&(&self.phases[x] + &self.eigenvalue)))
    }

    pub fn values(&self) -> Vec<Complex64> {
        (0..self.phases.len()).map(|x| self.value(x)).collect()
    }
}

fn require_ergodic(sys: &FiniteSystem) -> Result<()> {
    let k = sys.orbits().len();
    if k != 1 {
        return Err(Error::NotErgodic { components: k });
    }
    Ok(())
}

/// The eigenfunction for `c`, propagated along the orbit from `f(0) = 1`.
pub fn eigenfunction(sys: &FiniteSystem, c: &Rational) -> Result<EigenData> {
    require_ergodic(sys)?;
    let group = RootOfUnityGroup::new(sys.len());
    if !group.contains(c) {
        return Err(Error::InvalidParameter(format!("{} is not an eigenvalue", rational::to_string(c))));
    }
    let c = rational::frac(c);
    let mut phases = vec![Rational::default(); sys.len()];
    let mut x = 0;
    let mut phase = rational::int(0);
    for _ in 0..sys.len() {
        phases[x] = phase.clone();
        phase = rational::frac(&(&phase + &c));
        x = sys.perm().apply(x);
    }
    Ok(EigenData { eigenvalue: c, phases })
}

/// `e(T)` for an ergodic system, with one eigenfunction per eigenvalue.
pub fn eigenvalue_group(sys: &FiniteSystem) -> Result<(RootOfUnityGroup, Vec<EigenData>)> {
    require_ergodic(sys)?;
    let group = RootOfUnityGroup::new(sys.len());
    let data = group.elements().iter().map(|c| eigenfunction(sys, c)).collect::<Result<Vec<_>>>()?;
    Ok((group, data))
}

/// `Σ_y f|_y` as a rank-1 bundle in Rokhlin coordinates over the factor.
pub fn rank_one_module_from_eigenfunction(
    f: &EigenData,
    sys: &FiniteSystem,
    part: &InvariantPartition,
    tol: &Tolerances,
) -> Result<(FiberedSystem, ModuleBundle)> {
    let coords = rokhlin_coordinatize(sys, part)?;
    let fs = FiberedSystem::from_rokhlin(&coords)?;
    let fibers =
        coords.state_at.iter().map(|states| CMat::from_fn(states.len(), 1, |z, _| f.value(states[z]))).collect();
    let bundle = fiberwise_gram_schmidt(&ModuleBundle::new(&fs, fibers)?, &fs, tol)?;
    Ok((fs, bundle))
}

/// `f / g` is constant on every block, i.e. `f` and `g` generate the same
/// rank-1 module. Exact.
pub fn same_module_exact(f: &EigenData, g: &EigenData, part: &InvariantPartition) -> bool {
    part.blocks().iter().all(|b| {
        let d = |x: usize| rational::frac(&(&f.phases[x] - &g.phases[x]));
        let d0 = d(b[0]);
        b.iter().all(|&x| d(x) == d0)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientReport {
    pub group: RootOfUnityGroup,
    pub factor_group: RootOfUnityGroup,
    pub order: usize,
    pub representatives: Vec<Rational>,
    pub eigenfunctions: Vec<EigenData>,
    /// The cosets `c_i + e(S)` are disjoint and cover `e(T)`.
    pub cover_exact: bool,
    /// Representatives generate pairwise distinct modules (exact).
    pub distinct_modules_exact: bool,
    /// Rank-1 bundles of distinct representatives are fiberwise orthogonal.
    pub distinct_orthogonal: bool,
    /// Shifting a representative by `e(S)` leaves its bundle unchanged.
    pub same_coset_equal: bool,
    pub all_invariant: bool,
    pub max_cross_gram: f64,
}

impl QuotientReport {
    pub fn holds(&self) -> bool {
        self.cover_exact
            && self.distinct_modules_exact
            && self.distinct_orthogonal
            && self.same_coset_equal
            && self.all_invariant
    }
}

pub fn eigenvalue_quotient(sys: &FiniteSystem, part: &InvariantPartition, tol: &Tolerances) -> Result<QuotientReport> {
    require_ergodic(sys)?;
    if !is_rfmp(sys, part)? {
        return Err(Error::Precondition("factor is not r.f.m.p.".into()));
    }
    let factor = factor_system(sys, part)?;
    require_ergodic(&factor)?;
    let group = RootOfUnityGroup::new(sys.len());
    let factor_group = RootOfUnityGroup::new(factor.len());
    let (n, m) = (group.order(), factor_group.order());
    let order = n / m;
    let representatives: Vec<Rational> = (0..order).map(|i| rational::ratio(i as i64, n as i64)).collect();

    let mut seen = BTreeSet::new();
    let mut count = 0;
    for c in &representatives {
        for s in factor_group.elements() {
            seen.insert(rational::frac(&(c + &s)));
            count += 1;
        }
    }
    let cover_exact = count == n && seen.len() == n && seen.iter().all(|c| group.contains(c));

    let eigenfunctions = representatives.iter().map(|c| eigenfunction(sys, c)).collect::<Result<Vec<_>>>()?;
    let mut bundles = Vec::with_capacity(order);
    for f in &eigenfunctions {
        bundles.push(rank_one_module_from_eigenfunction(f, sys, part, tol)?);
    }
    let fs = &bundles[0].0;
    let all_invariant = bundles.iter().all(|(_, b)| is_invariant(b, fs, tol));

    let mut distinct_modules_exact = true;
    let mut distinct_orthogonal = true;
    let mut max_cross_gram = 0.0f64;
    for i in 0..order {
        for j in i + 1..order {
            distinct_modules_exact &= !same_module_exact(&eigenfunctions[i], &eigenfunctions[j], part);
            let rep = fiberwise_orthogonality(&bundles[i].1, &bundles[j].1, fs, tol)?;
            max_cross_gram = max_cross_gram.max(rep.max_entry);
            distinct_orthogonal &= rep.verdict == OrthogonalityVerdict::Orthogonal;
        }
    }

    let mut same_coset_equal = true;
    if m > 1 {
        let shift = rational::ratio(1, m as i64);
        for (f, (_, b)) in eigenfunctions.iter().zip(&bundles) {
            let g = eigenfunction(sys, &(&f.eigenvalue + &shift))?;
            let (_, bg) = rank_one_module_from_eigenfunction(&g, sys, part, tol)?;
            same_coset_equal &= same_module_exact(f, &g, part);
            same_coset_equal &= fiberwise_orthogonality(b, &bg, fs, tol)?.verdict == OrthogonalityVerdict::EqualSpans;
        }
    }

    Ok(QuotientReport {
        group,
        factor_group,
        order,
        representatives,
        eigenfunctions,
        cover_exact,
        distinct_modules_exact,
        distinct_orthogonal,
        same_coset_equal,
        all_invariant,
        max_cross_gram,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductErgodicity {
    pub ergodic_by_orbits: bool,
    pub orbit_count: usize,
    pub intersection: RootOfUnityGroup,
}

impl ProductErgodicity {
    pub fn agree(&self) -> bool {
        self.ergodic_by_orbits == self.intersection.is_trivial()
    }
}

/// Orbit count of `T × R` against the spectral criterion `e(T) ∩ e(R) = {0}`.
pub fn product_ergodicity_check(t: &FiniteSystem, r: &FiniteSystem) -> Result<ProductErgodicity> {
    require_ergodic(t)?;
    require_ergodic(r)?;
    let m = r.len();
    let images: Vec<usize> = (0..t.len() * m).map(|i| t.perm().apply(i / m) * m + r.perm().apply(i % m)).collect();
    let product = Perm::new(images)?;
    let orbit_count = orbits_of_generated(product.len(), &[&product]).len();
    // Intersect as explicit fraction sets, not via the gcd shortcut.
    let et: BTreeSet<Rational> = eigenvalue_group(t)?.0.elements().into_iter().collect();
    let er: BTreeSet<Rational> = eigenvalue_group(r)?.0.elements().into_iter().collect();
    let common = et.intersection(&er).count();
    Ok(ProductErgodicity {
        ergodic_by_orbits: orbit_count == 1,
        orbit_count,
        intersection: RootOfUnityGroup::new(common),
    })
}

/// Produces `h(T^n x_0)` for `n = 0, 1, 2, ...`.
pub trait TrajectorySampler {
    fn next_value(&mut self) -> Complex64;
}

/// `x ↦ x + α` on the circle observed through `e^{2πi k x}`.
#[derive(Debug, Clone)]
pub struct RotationSampler {
    alpha: f64,
    x0: f64,
    k: i64,
    n: u64,
}

impl RotationSampler {
    pub fn new(alpha: f64, x0: f64, k: i64) -> Self {
        Self { alpha, x0, k, n: 0 }
    }
}

impl TrajectorySampler for RotationSampler {
    fn next_value(&mut self) -> Complex64 {
        let x = (self.x0 + self.n as f64 * self.alpha).rem_euclid(1.0);
        self.n += 1;
        linalg::cis(self.k as f64 * x)
    }
}

/// `(x, y) ↦ (x + α, y + β + m x)` on the 2-torus observed through
/// `e^{2πi (a x + b y)}`.
#[derive(Debug, Clone)]
pub struct SkewRotationSampler {
    alpha: f64,
    beta: f64,
    m: i64,
    a: i64,
    b: i64,
    x: f64,
    y: f64,
}

impl SkewRotationSampler {
    pub fn new(alpha: f64, beta: f64, m: i64, character: (i64, i64), start: (f64, f64)) -> Self {
        Self { alpha, beta, m, a: character.0, b: character.1, x: start.0, y: start.1 }
    }
}

impl TrajectorySampler for SkewRotationSampler {
    fn next_value(&mut self) -> Complex64 {
        let v = linalg::cis(self.a as f64 * self.x + self.b as f64 * self.y);
        self.y = (self.y + self.beta + self.m as f64 * self.x).rem_euclid(1.0);
        self.x = (self.x + self.alpha).rem_euclid(1.0);
        v
    }
}

pub const WEYL_MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylRow {
    pub candidate: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylReport {
    pub samples: usize,
    pub noise_floor: f64,
    pub rows: Vec<WeylRow>,
}

impl WeylReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("candidate,modulus,N\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.candidate, r.modulus, self.samples));
        }
        out
    }
}

/// `|1/N Σ_{n<N} e^{-2πi c n} h(T^n x_0)|` for each candidate `c`.
pub fn weyl_eigenvalue_scan(
    sampler: &mut dyn TrajectorySampler,
    candidates: &[f64],
    samples: usize,
) -> Result<WeylReport> {
    if samples < WEYL_MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!("{samples} samples is below the minimum of {WEYL_MIN_SAMPLES}")));
    }
    let values: Vec<Complex64> = (0..samples).map(|_| sampler.next_value()).collect();
    let rows = candidates
        .iter()
        .map(|&c| {
            let sum: Complex64 =
                values.iter().enumerate().map(|(n, h)| linalg::cis(-(c * n as f64).rem_euclid(1.0)) * h).sum();
            WeylRow { candidate: c, modulus: sum.norm() / samples as f64 }
        })
        .collect();
    Ok(WeylReport { samples, noise_floor: 1.0 / (samples as f64).sqrt(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups_cocycles::{build_skew_product, Cocycle, FiniteGroup};
    use crate::rational::ratio;

    fn eight_cycle() -> (FiniteSystem, InvariantPartition) {
        let c = Cocycle::new(FiniteSystem::cycle(4), FiniteGroup::cyclic(2), vec![1, 0, 0, 0]).unwrap();
        let sys = build_skew_product(&c).unwrap().system().clone();
        let part = InvariantPartition::new(&sys, (0..4).map(|x| vec![2 * x, 2 * x + 1]).collect()).unwrap();
        (sys, part)
    }

    fn weighted_four() -> FiniteSystem {
        FiniteSystem::new(vec![ratio(3, 10), ratio(2, 10), ratio(3, 10), ratio(2, 10)], Perm::rotation(4, 1)).unwrap()
    }

    #[test]
    fn eigenvalue_group_examples() {
        let sys = weighted_four();
        let (g, data) = eigenvalue_group(&sys).unwrap();
        assert_eq!(g.order(), 4);
        assert!(data.iter().all(|f| f.verify(&sys)));
        let (g, _) = eigenvalue_group(&FiniteSystem::cycle(1)).unwrap();
        assert_eq!(g.elements(), vec![ratio(0, 1)]);
        let (g, data) = eigenvalue_group(&eight_cycle().0).unwrap();
        assert_eq!(g.order(), 8);
        assert!(data.iter().all(|f| f.verify(&eight_cycle().0)));
        assert_eq!(g.to_json()["elements"][1], serde_json::Value::String("1/8".into()));
        let two = FiniteSystem::uniform(Perm::identity(2));
        assert_eq!(eigenvalue_group(&two), Err(Error::NotErgodic { components: 2 }));
    }

    #[test]
    fn quotient_examples() {
        let tol = Tolerances::default();
        let (sys, part) = eight_cycle();
        let q = eigenvalue_quotient(&sys, &part, &tol).unwrap();
        assert_eq!(q.order, 2);
        assert_eq!(q.representatives, vec![ratio(0, 1), ratio(1, 8)]);
        assert!(q.holds(), "{q:?}");

        let single = crate::base_systems::singleton_partition(&sys);
        assert_eq!(eigenvalue_quotient(&sys, &single, &tol).unwrap().order, 1);

        let w = weighted_four();
        let part = InvariantPartition::new(&w, vec![vec![0, 2], vec![1, 3]]).unwrap();
        let q = eigenvalue_quotient(&w, &part, &tol).unwrap();
        assert_eq!((q.group.order(), q.factor_group.order(), q.order), (4, 2, 2));
        assert!(q.holds(), "{q:?}");
    }

    #[test]
    fn rank_one_module_examples() {
        let tol = Tolerances::default();
        let (sys, part) = eight_cycle();
        let one = eigenfunction(&sys, &ratio(0, 1)).unwrap();
        let (fs, b) = rank_one_module_from_eigenfunction(&one, &sys, &part, &tol).unwrap();
        let constants = ModuleBundle::constants(&fs);
        assert!(b.fibers().iter().zip(constants.fibers()).all(|(x, y)| (x - y).norm() < 1e-12));

        let f = eigenfunction(&sys, &ratio(1, 8)).unwrap();
        let (fs, b) = rank_one_module_from_eigenfunction(&f, &sys, &part, &tol).unwrap();
        assert!(is_invariant(&b, &fs, &tol));
        let u = crate::rank_modules::relative_eigenvalue(&b, &fs, &tol).unwrap();
        assert!(u.matrices.iter().all(|m| (m[(0, 0)].norm() - 1.0).abs() < 1e-12));

        let g = eigenfunction(&sys, &ratio(5, 8)).unwrap();
        let (_, bg) = rank_one_module_from_eigenfunction(&g, &sys, &part, &tol).unwrap();
        assert!(same_module_exact(&f, &g, &part));
        let rep = fiberwise_orthogonality(&b, &bg, &fs, &tol).unwrap();
        assert_eq!(rep.verdict, OrthogonalityVerdict::EqualSpans);
    }

    #[test]
    fn product_ergodicity_examples() {
        let p = product_ergodicity_check(&FiniteSystem::cycle(2), &FiniteSystem::cycle(3)).unwrap();
        assert!(p.ergodic_by_orbits && p.intersection.is_trivial() && p.agree());
        let p = product_ergodicity_check(&FiniteSystem::cycle(2), &FiniteSystem::cycle(2)).unwrap();
        assert!(!p.ergodic_by_orbits && p.intersection.order() == 2 && p.agree());
        let p = product_ergodicity_check(&weighted_four(), &FiniteSystem::cycle(1)).unwrap();
        assert!(p.ergodic_by_orbits && p.agree());
    }

    #[test]
    fn weyl_examples() {
        let alpha = 2f64.sqrt() - 1.0;
        let mut s = RotationSampler::new(alpha, 0.1, 1);
        let r = weyl_eigenvalue_scan(&mut s, &[alpha, alpha + 0.5, 0.0], 10_000).unwrap();
        assert!((r.rows[0].modulus - 1.0).abs() < 1e-9);
        for row in &r.rows[1..] {
            let d = linalg::cis(row.candidate - alpha);
            let bound = 2.0 / (r.samples as f64 * (Complex64::new(1.0, 0.0) - d).norm());
            assert!(row.modulus <= bound + 1e-12, "{row:?}");
        }

        let mut s = RotationSampler::new(alpha, 0.3, 0);
        let r = weyl_eigenvalue_scan(&mut s, &[0.0], 1000).unwrap();
        assert!((r.rows[0].modulus - 1.0).abs() < 1e-12);
        assert!(r.to_csv().starts_with("candidate,modulus,N\n0,1"));

        assert!(weyl_eigenvalue_scan(&mut s, &[0.0], 999).is_err());
    }

    #[test]
    fn skew_rotation_second_coordinate_is_not_an_eigenfunction() {
        // The character e^{2πi y} of an Anzai skew product has no eigenvalue
        // among rotation multiples; Birkhoff moduli stay near the noise floor.
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        let mut s = SkewRotationSampler::new(alpha, 0.0, 1, (0, 1), (0.2, 0.7));
        let cands: Vec<f64> = (0..8).map(|k| (k as f64 * alpha).rem_euclid(1.0)).collect();
        let r = weyl_eigenvalue_scan(&mut s, &cands, 20_000).unwrap();
        assert!(r.rows.iter().all(|row| row.modulus < 0.1), "{r:?}");
    }
}
