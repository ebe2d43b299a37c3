//! Groups, cocycles, skew products and Rokhlin cocycle extensions.
//!
//! Finite groups are the only ones that can be materialised as product
//! spaces. The integers are supported for drift (recurrence) analysis, the
//! circle for exact rational rotations, and `U(2)` for the numerical lab.

use std::fmt::Debug;

use nalgebra::Matrix2;
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::base_systems::FiniteSystem;
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::rational::{self, Rational};

pub trait Group: Clone + Debug {
    type Elem: Clone + PartialEq + Debug;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;

    fn as_finite(&self) -> Option<&FiniteGroup> {
        None
    }

    fn finite_index(&self, _e: &Self::Elem) -> Option<usize> {
        None
    }

    /// Recurrence of a cocycle over an ergodic cycle, decided from its total
    /// value around the cycle. `None` when the group has no finite criterion.
    fn recurrent_from_total(&self, _total: &Self::Elem) -> Option<bool> {
        None
    }
}

/// Largest order for which an explicit multiplication table is kept.
pub const TABLE_LIMIT: usize = 256;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Table { table: Vec<Vec<usize>>, inverse: Vec<usize>, identity: usize },
    CyclicProduct { moduli: Vec<usize> },
}

/// A finite group on the element indices `0..order`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroup {
    repr: Repr,
}

impl FiniteGroup {
    pub fn cyclic(n: usize) -> Self {
        Self::cyclic_product(&[n]).expect("n >= 1")
    }

    /// `Z_{m1} × ... × Z_{mk}` with mixed-radix indices (first factor most
    /// significant). Materialised as a table when small enough.
    pub fn cyclic_product(moduli: &[usize]) -> Result<Self> {
        if moduli.is_empty() || moduli.contains(&0) {
            return Err(Error::InvalidGroup("cyclic factors must be positive".into()));
        }
        let structured = Self { repr: Repr::CyclicProduct { moduli: moduli.to_vec() } };
        let order = structured.order();
        if order > TABLE_LIMIT {
            return Ok(structured);
        }
        let table = (0..order).map(|a| (0..order).map(|b| structured.mul_idx(a, b)).collect()).collect();
        Self::from_table(table)
    }

    /// The symmetric group on `n` letters; elements are permutations in
    /// lexicographic order (index 0 is the identity), `a·b = a ∘ b`.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > 5 {
            return Err(Error::InvalidGroup(format!("symmetric group S_{n} not supported")));
        }
        let elems = lex_permutations(n);
        let index: std::collections::HashMap<Vec<usize>, usize> =
            elems.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let table = elems
            .iter()
            .map(|a| elems.iter().map(|b| index[&b.iter().map(|&x| a[x]).collect::<Vec<_>>()]).collect())
            .collect();
        Self::from_table(table)
    }

    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        if n > TABLE_LIMIT {
            return Err(Error::InvalidGroup(format!("table order {n} exceeds {TABLE_LIMIT}")));
        }
        for (a, row) in table.iter().enumerate() {
            if row.len() != n || Perm::new(row.clone()).is_err() {
                return Err(Error::InvalidGroup(format!("row {a} is not a permutation")));
            }
        }
        for b in 0..n {
            if Perm::new((0..n).map(|a| table[a][b]).collect()).is_err() {
                return Err(Error::InvalidGroup(format!("column {b} is not a permutation")));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let inverse = (0..n).map(|a| (0..n).find(|&b| table[a][b] == identity).unwrap()).collect();
        let g = Self { repr: Repr::Table { table, inverse, identity } };
        g.check_associative()?;
        Ok(g)
    }

    /// Exhaustive up to order 64, deterministic spot checks beyond.
    fn check_associative(&self) -> Result<()> {
        let n = self.order();
        let triples: Box<dyn Iterator<Item = (usize, usize, usize)>> = if n <= 64 {
            Box::new((0..n).flat_map(move |a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c)))))
        } else {
            Box::new((0..20_000usize).map(move |k| {
                let h = k.wrapping_mul(2_654_435_761);
                (h % n, (h / n) % n, (h / (n * n)) % n)
            }))
        };
        for (a, b, c) in triples {
            if self.mul_idx(self.mul_idx(a, b), c) != self.mul_idx(a, self.mul_idx(b, c)) {
                return Err(Error::InvalidGroup(format!("not associative at ({a}, {b}, {c})")));
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        match &self.repr {
            Repr::Table { table, .. } => table.len(),
            Repr::CyclicProduct { moduli } => moduli.iter().product(),
        }
    }

    pub fn identity_idx(&self) -> usize {
        match &self.repr {
            Repr::Table { identity, .. } => *identity,
            Repr::CyclicProduct { .. } => 0,
        }
    }

    pub fn mul_idx(&self, a: usize, b: usize) -> usize {
        match &self.repr {
            Repr::Table { table, .. } => table[a][b],
            Repr::CyclicProduct { moduli } => {
                let (da, db) = (digits(moduli, a), digits(moduli, b));
                let sum: Vec<usize> = da.iter().zip(&db).zip(moduli).map(|((x, y), m)| (x + y) % m).collect();
                undigits(moduli, &sum)
            }
        }
    }

    pub fn inv_idx(&self, a: usize) -> usize {
        match &self.repr {
            Repr::Table { inverse, .. } => inverse[a],
            Repr::CyclicProduct { moduli } => {
                let d: Vec<usize> = digits(moduli, a).iter().zip(moduli).map(|(x, m)| (m - x) % m).collect();
                undigits(moduli, &d)
            }
        }
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        match &self.repr {
            Repr::CyclicProduct { .. } => true,
            Repr::Table { table, .. } => (0..n).all(|a| (0..n).all(|b| table[a][b] == table[b][a])),
        }
    }

    /// A generating set, chosen greedily in index order.
    pub fn generators(&self) -> Vec<usize> {
        if let Repr::CyclicProduct { moduli } = &self.repr {
            return (0..moduli.len())
                .map(|i| {
                    let mut d = vec![0; moduli.len()];
                    d[i] = 1 % moduli[i];
                    undigits(moduli, &d)
                })
                .collect();
        }
        let n = self.order();
        let mut gens = Vec::new();
        let mut reached = vec![false; n];
        reached[self.identity_idx()] = true;
        for g in 0..n {
            if reached[g] {
                continue;
            }
            gens.push(g);
            // closure of the subgroup generated so far
            let mut frontier: Vec<usize> = (0..n).filter(|&x| reached[x]).collect();
            while let Some(x) = frontier.pop() {
                for &s in &gens {
                    let y = self.mul_idx(x, s);
                    if !reached[y] {
                        reached[y] = true;
                        frontier.push(y);
                    }
                }
            }
        }
        gens
    }

    /// Order of the subgroup generated by `elems`.
    pub fn generated_subgroup_order(&self, elems: &[usize]) -> usize {
        let n = self.order();
        let mut reached = vec![false; n];
        reached[self.identity_idx()] = true;
        let mut frontier = vec![self.identity_idx()];
        while let Some(x) = frontier.pop() {
            for &s in elems {
                let y = self.mul_idx(x, s);
                if !reached[y] {
                    reached[y] = true;
                    frontier.push(y);
                }
            }
        }
        reached.iter().filter(|&&r| r).count()
    }
}

fn digits(moduli: &[usize], mut a: usize) -> Vec<usize> {
    let mut d = vec![0; moduli.len()];
    for i in (0..moduli.len()).rev() {
        d[i] = a % moduli[i];
        a /= moduli[i];
    }
    d
}

fn undigits(moduli: &[usize], d: &[usize]) -> usize {
    d.iter().zip(moduli).fold(0, |acc, (x, m)| acc * m + x)
}

fn lex_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

impl Group for FiniteGroup {
    type Elem = usize;

    fn identity(&self) -> usize {
        self.identity_idx()
    }

    fn mul(&self, a: &usize, b: &usize) -> usize {
        self.mul_idx(*a, *b)
    }

    fn inv(&self, a: &usize) -> usize {
        self.inv_idx(*a)
    }

    fn as_finite(&self) -> Option<&FiniteGroup> {
        Some(self)
    }

    fn finite_index(&self, e: &usize) -> Option<usize> {
        Some(*e)
    }

    fn recurrent_from_total(&self, _total: &usize) -> Option<bool> {
        // A permutation of a finite space is conservative.
        Some(true)
    }
}

/// The additive integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IntegerGroup;

impl Group for IntegerGroup {
    type Elem = i64;

    fn identity(&self) -> i64 {
        0
    }

    fn mul(&self, a: &i64, b: &i64) -> i64 {
        a + b
    }

    fn inv(&self, a: &i64) -> i64 {
        -a
    }

    fn recurrent_from_total(&self, total: &i64) -> Option<bool> {
        Some(*total == 0)
    }
}

/// The circle, restricted to rational rotation numbers `p/q ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CircleGroup;

impl Group for CircleGroup {
    type Elem = Rational;

    fn identity(&self) -> Rational {
        Rational::zero()
    }

    fn mul(&self, a: &Rational, b: &Rational) -> Rational {
        rational::frac(&(a + b))
    }

    fn inv(&self, a: &Rational) -> Rational {
        rational::frac(&-a)
    }
}

pub type Mat2 = Matrix2<Complex64>;

pub const UNITARY_TOL: f64 = 1e-9;

/// `U(2)` in double precision.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Unitary2Group;

impl Unitary2Group {
    pub fn unitarity_residual(m: &Mat2) -> f64 {
        (m.adjoint() * m - Mat2::identity()).norm()
    }

    pub fn element(&self, m: Mat2) -> Result<Mat2> {
        let r = Self::unitarity_residual(&m);
        if r > UNITARY_TOL {
            return Err(Error::InvalidGroup(format!("matrix is not unitary (residual {r:e})")));
        }
        Ok(m)
    }
}

impl Group for Unitary2Group {
    type Elem = Mat2;

    fn identity(&self) -> Mat2 {
        Mat2::identity()
    }

    fn mul(&self, a: &Mat2, b: &Mat2) -> Mat2 {
        a * b
    }

    fn inv(&self, a: &Mat2) -> Mat2 {
        a.adjoint()
    }
}

/// A map from the base states into a group.
#[derive(Debug, Clone, PartialEq)]
pub struct Cocycle<G: Group> {
    base: FiniteSystem,
    group: G,
    values: Vec<G::Elem>,
}

impl<G: Group> Cocycle<G> {
    pub fn new(base: FiniteSystem, group: G, values: Vec<G::Elem>) -> Result<Self> {
        if values.len() != base.len() {
            return Err(Error::InvalidParameter(format!(
                "cocycle has {} values for {} base states",
                values.len(),
                base.len()
            )));
        }
        Ok(Self { base, group, values })
    }

    pub fn base(&self) -> &FiniteSystem {
        &self.base
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn values(&self) -> &[G::Elem] {
        &self.values
    }

    pub fn value(&self, x: usize) -> &G::Elem {
        &self.values[x]
    }

    /// `φ^(n)(x)`: `φ(T^{n-1}x)···φ(x)` for `n > 0`, the identity for
    /// `n = 0`, and `(φ(T^{-1}x)···φ(T^n x))^{-1}` for `n < 0`.
    pub fn iterate(&self, n: i64, x: usize) -> G::Elem {
        let t = self.base.perm();
        let g = &self.group;
        match n {
            0 => g.identity(),
            n if n > 0 => {
                let mut acc = g.identity();
                let mut y = x;
                for _ in 0..n {
                    acc = g.mul(&self.values[y], &acc);
                    y = t.apply(y);
                }
                acc
            }
            n => {
                let tinv = t.inverse();
                // φ(T^{-1}x)·φ(T^{-2}x)···φ(T^{n}x), built right to left.
                let mut points = Vec::with_capacity(n.unsigned_abs() as usize);
                let mut y = x;
                for _ in 0..n.unsigned_abs() {
                    y = tinv.apply(y);
                    points.push(y);
                }
                let prod = points.iter().fold(g.identity(), |acc, &p| g.mul(&acc, &self.values[p]));
                g.inv(&prod)
            }
        }
    }

    /// Total value `φ^(N)(x)` around the cycle through `x`.
    pub fn cycle_total(&self, x: usize) -> G::Elem {
        let len = self.base.orbits().into_iter().find(|c| c.contains(&x)).map(|c| c.len()).unwrap_or(1);
        self.iterate(len as i64, x)
    }
}

/// `T_φ(x, g) = (Tx, φ(x) g)` on `X × G`, state index `x·|G| + g`, with
/// measure `μ ⊗ uniform`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewProduct {
    cocycle: Cocycle<FiniteGroup>,
    system: FiniteSystem,
}

impl SkewProduct {
    pub fn cocycle(&self) -> &Cocycle<FiniteGroup> {
        &self.cocycle
    }

    pub fn group(&self) -> &FiniteGroup {
        self.cocycle.group()
    }

    pub fn system(&self) -> &FiniteSystem {
        &self.system
    }

    pub fn map(&self) -> &Perm {
        self.system.perm()
    }

    pub fn base_len(&self) -> usize {
        self.cocycle.base().len()
    }

    pub fn state(&self, x: usize, g: usize) -> usize {
        x * self.group().order() + g
    }

    pub fn coords(&self, i: usize) -> (usize, usize) {
        let n = self.group().order();
        (i / n, i % n)
    }

    /// `τ_g(x, h) = (x, h g^{-1})`.
    pub fn tau(&self, g: usize) -> Perm {
        let grp = self.group();
        let ginv = grp.inv_idx(g);
        let images = (0..self.system.len())
            .map(|i| {
                let (x, h) = self.coords(i);
                self.state(x, grp.mul_idx(h, ginv))
            })
            .collect();
        Perm::new(images).expect("right translation is a bijection")
    }

    pub fn tau_commutes(&self, g: usize) -> bool {
        let tau = self.tau(g);
        tau.compose(self.map()) == self.map().compose(&tau)
    }

    /// `(T_φ)^n(x, g) = (T^n x, φ^(n)(x) g)`.
    pub fn iterate_identity_holds(&self, n: i64, x: usize, g: usize) -> bool {
        let lhs = self.map().pow(n).apply(self.state(x, g));
        let tx = self.cocycle.base().perm().pow(n).apply(x);
        let rhs = self.state(tx, self.group().mul_idx(self.cocycle.iterate(n, x), g));
        lhs == rhs
    }
}

/// Materialises `T_φ`; only possible for finite groups.
pub fn build_skew_product<G: Group>(cocycle: &Cocycle<G>) -> Result<SkewProduct> {
    let group = cocycle
        .group()
        .as_finite()
        .ok_or_else(|| Error::Unsupported("skew product over an infinite group".into()))?
        .clone();
    let base = cocycle.base().clone();
    if !base.is_measure_preserving() {
        return Err(Error::Precondition("skew products need a measure-preserving base".into()));
    }
    let values: Vec<usize> =
        cocycle.values().iter().map(|v| cocycle.group().finite_index(v).expect("finite group")).collect();
    let order = group.order();
    let images = (0..base.len() * order)
        .map(|i| {
            let (x, g) = (i / order, i % order);
            base.perm().apply(x) * order + group.mul_idx(values[x], g)
        })
        .collect();
    let weights = (0..base.len() * order).map(|i| base.weight(i / order) / rational::int(order as i64)).collect();
    let system = FiniteSystem::measure_preserving(weights, Perm::new(images)?)?;
    let cocycle = Cocycle::new(base, group, values)?;
    Ok(SkewProduct { cocycle, system })
}

pub fn is_ergodic_cocycle<G: Group>(cocycle: &Cocycle<G>) -> Result<bool> {
    Ok(build_skew_product(cocycle)?.system().is_ergodic())
}

/// Finite groups: always. Integers over an ergodic cycle: zero drift.
pub fn is_recurrent<G: Group>(cocycle: &Cocycle<G>) -> Result<bool> {
    if !cocycle.base().is_ergodic() {
        return Err(Error::Precondition("recurrence test needs an ergodic base".into()));
    }
    let total = cocycle.cycle_total(0);
    cocycle.group().recurrent_from_total(&total).ok_or_else(|| Error::Unsupported("recurrence for this group".into()))
}

/// A homomorphism `g ↦ S_g` into measure-preserving permutations of a finite
/// probability space `(Y, ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAction {
    group: FiniteGroup,
    weights: Vec<Rational>,
    perms: Vec<Perm>,
}

impl GroupAction {
    pub fn new(group: FiniteGroup, weights: Vec<Rational>, perms: Vec<Perm>) -> Result<Self> {
        if perms.len() != group.order() {
            return Err(Error::InvalidAction(format!(
                "{} permutations for a group of order {}",
                perms.len(),
                group.order()
            )));
        }
        // Reuse the system validator for the weights.
        FiniteSystem::new(weights.clone(), Perm::identity(weights.len()))
            .map_err(|e| Error::InvalidAction(e.to_string()))?;
        if let Some(g) = perms.iter().position(|p| p.len() != weights.len()) {
            return Err(Error::InvalidAction(format!("S_{g} acts on the wrong number of points")));
        }
        let action = Self { group, weights, perms };
        action.check()?;
        Ok(action)
    }

    /// `S_g(h) = g·h` on `Y = G` with uniform `ν`.
    pub fn left_translation(group: &FiniteGroup) -> Self {
        let n = group.order();
        let perms = (0..n).map(|g| Perm::new((0..n).map(|h| group.mul_idx(g, h)).collect()).unwrap()).collect();
        Self::new(group.clone(), vec![rational::ratio(1, n as i64); n], perms).expect("left translation is an action")
    }

    /// Every `S_g` is the identity on `m` uniform points.
    pub fn trivial(group: &FiniteGroup, m: usize) -> Self {
        let perms = vec![Perm::identity(m); group.order()];
        Self::new(group.clone(), vec![rational::ratio(1, m as i64); m], perms).expect("trivial action")
    }

    /// Cyclic `Z_n` acting through `k ↦ σ^k`.
    pub fn cyclic_generator(n: usize, sigma: Perm, weights: Vec<Rational>) -> Result<Self> {
        let perms = (0..n).map(|k| sigma.pow(k as i64)).collect();
        Self::new(FiniteGroup::cyclic(n), weights, perms)
    }

    fn check(&self) -> Result<()> {
        let g = &self.group;
        let e = g.identity_idx();
        if !self.perms[e].is_identity() {
            return Err(Error::InvalidAction("S_e is not the identity".into()));
        }
        for (k, p) in self.perms.iter().enumerate() {
            if let Some(y) = (0..self.weights.len()).find(|&y| self.weights[p.apply(y)] != self.weights[y]) {
                return Err(Error::InvalidAction(format!("S_{k} does not preserve ν at point {y}")));
            }
        }
        // S_{gs} = S_g ∘ S_s for every g and generator s determines the rest.
        for s in g.generators() {
            for a in 0..g.order() {
                if self.perms[g.mul_idx(a, s)] != self.perms[a].compose(&self.perms[s]) {
                    return Err(Error::InvalidAction(format!("homomorphism law fails for ({a}, {s})")));
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn perm(&self, g: usize) -> &Perm {
        &self.perms[g]
    }

    pub fn perms(&self) -> &[Perm] {
        &self.perms
    }

    pub fn space_len(&self) -> usize {
        self.weights.len()
    }

    /// A finite action is uniquely ergodic exactly when it is transitive.
    pub fn is_transitive(&self) -> bool {
        let refs: Vec<&Perm> = self.perms.iter().collect();
        crate::perm::orbits_of_generated(self.space_len(), &refs).len() == 1
    }
}

/// `T_{φ,S}(x, y) = (Tx, S_{φ(x)} y)` on `X × Y`, index `x·|Y| + y`.
#[derive(Debug, Clone, PartialEq)]
pub struct RokhlinExtension {
    cocycle: Cocycle<FiniteGroup>,
    action: GroupAction,
    system: FiniteSystem,
}

impl RokhlinExtension {
    pub fn cocycle(&self) -> &Cocycle<FiniteGroup> {
        &self.cocycle
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn system(&self) -> &FiniteSystem {
        &self.system
    }

    pub fn state(&self, x: usize, y: usize) -> usize {
        x * self.action.space_len() + y
    }

    pub fn coords(&self, i: usize) -> (usize, usize) {
        let m = self.action.space_len();
        (i / m, i % m)
    }
}

pub fn build_rokhlin_extension(cocycle: &Cocycle<FiniteGroup>, action: &GroupAction) -> Result<RokhlinExtension> {
    if cocycle.group() != action.group() {
        return Err(Error::InvalidAction("action is for a different group".into()));
    }
    let base = cocycle.base();
    if !base.is_measure_preserving() {
        return Err(Error::Precondition("extensions need a measure-preserving base".into()));
    }
    let m = action.space_len();
    let n = base.len() * m;
    let images = (0..n)
        .map(|i| {
            let (x, y) = (i / m, i % m);
            base.perm().apply(x) * m + action.perm(*cocycle.value(x)).apply(y)
        })
        .collect();
    let weights = (0..n).map(|i| base.weight(i / m) * &action.weights()[i % m]).collect();
    let system = FiniteSystem::measure_preserving(weights, Perm::new(images)?)?;
    Ok(RokhlinExtension { cocycle: cocycle.clone(), action: action.clone(), system })
}

/// Group description used in JSON documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    Cyclic { n: usize },
    Product { factors: Vec<usize> },
    Symmetric { n: usize },
    Table { table: Vec<Vec<usize>> },
    Integers,
    Circle,
    Unitary2,
}

impl GroupSpec {
    pub fn to_finite(&self) -> Result<FiniteGroup> {
        match self {
            GroupSpec::Cyclic { n } if *n >= 1 => Ok(FiniteGroup::cyclic(*n)),
            GroupSpec::Cyclic { .. } => Err(Error::InvalidGroup("cyclic order must be >= 1".into())),
            GroupSpec::Product { factors } => FiniteGroup::cyclic_product(factors),
            GroupSpec::Symmetric { n } => FiniteGroup::symmetric(*n),
            GroupSpec::Table { table } => FiniteGroup::from_table(table.clone()),
            other => Err(Error::Unsupported(format!("{other:?} is not a finite group"))),
        }
    }
}

/// `U(2)` elements as `[[[re, im], [re, im]], [[re, im], [re, im]]]`, row-major.
pub type Mat2Json = [[[f64; 2]; 2]; 2];

pub fn mat2_from_json(m: &Mat2Json) -> Mat2 {
    Mat2::new(
        Complex64::new(m[0][0][0], m[0][0][1]),
        Complex64::new(m[0][1][0], m[0][1][1]),
        Complex64::new(m[1][0][0], m[1][0][1]),
        Complex64::new(m[1][1][0], m[1][1][1]),
    )
}

pub fn mat2_to_json(m: &Mat2) -> Mat2Json {
    let c = |i: usize, j: usize| [m[(i, j)].re, m[(i, j)].im];
    [[c(0, 0), c(0, 1)], [c(1, 0), c(1, 1)]]
}

/// JSON form: `{"group": {"kind": "cyclic", "n": 2}, "values": [1, 0, 0, 0]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleDocument {
    pub group: GroupSpec,
    pub values: Vec<serde_json::Value>,
}

/// A cocycle over whichever group a document names.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyCocycle {
    Finite(Cocycle<FiniteGroup>),
    Integer(Cocycle<IntegerGroup>),
    Circle(Cocycle<CircleGroup>),
    Unitary2(Cocycle<Unitary2Group>),
}

impl AnyCocycle {
    pub fn base(&self) -> &FiniteSystem {
        match self {
            AnyCocycle::Finite(c) => c.base(),
            AnyCocycle::Integer(c) => c.base(),
            AnyCocycle::Circle(c) => c.base(),
            AnyCocycle::Unitary2(c) => c.base(),
        }
    }

    pub fn is_recurrent(&self) -> Result<bool> {
        match self {
            AnyCocycle::Finite(c) => is_recurrent(c),
            AnyCocycle::Integer(c) => is_recurrent(c),
            AnyCocycle::Circle(c) => is_recurrent(c),
            AnyCocycle::Unitary2(c) => is_recurrent(c),
        }
    }

    pub fn as_finite(&self) -> Result<&Cocycle<FiniteGroup>> {
        match self {
            AnyCocycle::Finite(c) => Ok(c),
            _ => Err(Error::Unsupported("operation requires a finite group".into())),
        }
    }
}

impl CocycleDocument {
    pub fn to_cocycle(&self, base: FiniteSystem) -> Result<AnyCocycle> {
        let bad = |i: usize| Error::Parse(format!("cocycle value {i} has the wrong type"));
        match &self.group {
            GroupSpec::Integers => {
                let v = self
                    .values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v.as_i64().ok_or_else(|| bad(i)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyCocycle::Integer(Cocycle::new(base, IntegerGroup, v)?))
            }
            GroupSpec::Circle => {
                let v = self
                    .values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.as_str().ok_or_else(|| bad(i)).and_then(rational::parse).map(|r| rational::frac(&r))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyCocycle::Circle(Cocycle::new(base, CircleGroup, v)?))
            }
            GroupSpec::Unitary2 => {
                let v = self
                    .values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let m: Mat2Json = serde_json::from_value(v.clone()).map_err(|_| bad(i))?;
                        Unitary2Group.element(mat2_from_json(&m))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyCocycle::Unitary2(Cocycle::new(base, Unitary2Group, v)?))
            }
            spec => {
                let group = spec.to_finite()?;
                let v = self
                    .values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v.as_u64().map(|u| u as usize).filter(|&u| u < group.order()).ok_or_else(|| bad(i)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyCocycle::Finite(Cocycle::new(base, group, v)?))
            }
        }
    }
}
