//! Non-singular automorphisms of finite probability spaces.
//!
//! A [`FiniteSystem`] is a bijection of `0..n` together with strictly positive
//! exact weights summing to one. Every non-singular automorphism of a finite
//! space has this form, and every identity in this module holds with zero
//! tolerance.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSystem {
    weights: Vec<Rational>,
    perm: Perm,
}

impl FiniteSystem {
    pub fn new(weights: Vec<Rational>, perm: Perm) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidSystem("system needs at least one state".into()));
        }
        if weights.len() != perm.len() {
            return Err(Error::InvalidSystem(format!(
                "{} weights for a permutation of {} states",
                weights.len(),
                perm.len()
            )));
        }
        if let Some(x) = weights.iter().position(|w| !rational::is_positive(w)) {
            return Err(Error::InvalidSystem(format!("weight of state {x} is not positive")));
        }
        let total = rational::sum(&weights);
        if !total.is_one() {
            return Err(Error::InvalidSystem(format!("weights sum to {}, not 1", rational::to_string(&total))));
        }
        Ok(Self { weights, perm })
    }

    /// Same as [`FiniteSystem::new`] but additionally demands `μ∘T = μ`.
    pub fn measure_preserving(weights: Vec<Rational>, perm: Perm) -> Result<Self> {
        let sys = Self::new(weights, perm)?;
        if let Some(x) = (0..sys.len()).find(|&x| sys.weights[sys.perm.apply(x)] != sys.weights[x]) {
            return Err(Error::InvalidSystem(format!("measure-preserving flag violated at state {x}")));
        }
        Ok(sys)
    }

    pub fn uniform(perm: Perm) -> Self {
        let n = perm.len() as i64;
        let weights = vec![rational::ratio(1, n); perm.len()];
        Self { weights, perm }
    }

    /// The ergodic `n`-cycle `x -> x+1` with uniform weights.
    pub fn cycle(n: usize) -> Self {
        Self::uniform(Perm::rotation(n, 1))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, x: usize) -> &Rational {
        &self.weights[x]
    }

    pub fn perm(&self) -> &Perm {
        &self.perm
    }

    pub fn is_measure_preserving(&self) -> bool {
        (0..self.len()).all(|x| self.weights[self.perm.apply(x)] == self.weights[x])
    }

    pub fn is_ergodic(&self) -> bool {
        self.perm.is_single_cycle()
    }

    pub fn orbits(&self) -> Vec<Vec<usize>> {
        self.perm.cycles()
    }

    /// `α(x) = μ(Tx) / μ(x)`.
    pub fn radon_nikodym(&self) -> Vec<Rational> {
        (0..self.len()).map(|x| &self.weights[self.perm.apply(x)] / &self.weights[x]).collect()
    }

    /// Product of `α` along each cycle; always one.
    pub fn cycle_products(&self) -> Vec<Rational> {
        let alpha = self.radon_nikodym();
        self.orbits().iter().map(|c| c.iter().fold(Rational::one(), |acc, &x| acc * &alpha[x])).collect()
    }

    /// The system restricted to a `perm`-invariant support, reindexed in the
    /// order of `support` and renormalised.
    pub fn restrict(&self, support: &[usize]) -> Result<FiniteSystem> {
        let mut index = vec![usize::MAX; self.len()];
        for (i, &x) in support.iter().enumerate() {
            index[x] = i;
        }
        let mut images = Vec::with_capacity(support.len());
        for &x in support {
            let j = index[self.perm.apply(x)];
            if j == usize::MAX {
                return Err(Error::Precondition(format!("support is not invariant at state {x}")));
            }
            images.push(j);
        }
        let mass = rational::sum(support.iter().map(|&x| &self.weights[x]));
        let weights = support.iter().map(|&x| &self.weights[x] / &mass).collect();
        FiniteSystem::new(weights, Perm::new(images)?)
    }
}

/// A partition of the states whose blocks are permuted by `T`: a finite
/// factor together with its factor map.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantPartition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
    induced: Perm,
}

impl InvariantPartition {
    pub fn new(sys: &FiniteSystem, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = sys.len();
        let mut block_of = vec![usize::MAX; n];
        let mut blocks = blocks;
        for (b, block) in blocks.iter_mut().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidFactor(format!("block {b} is empty")));
            }
            block.sort_unstable();
            for &x in block.iter() {
                if x >= n {
                    return Err(Error::InvalidFactor(format!("state {x} out of range")));
                }
                if block_of[x] != usize::MAX {
                    return Err(Error::InvalidFactor(format!("state {x} appears twice")));
                }
                block_of[x] = b;
            }
        }
        if let Some(x) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidFactor(format!("state {x} is not covered")));
        }
        let mut images = Vec::with_capacity(blocks.len());
        for (b, block) in blocks.iter().enumerate() {
            let target = block_of[sys.perm().apply(block[0])];
            if let Some(&x) = block.iter().find(|&&x| block_of[sys.perm().apply(x)] != target) {
                return Err(Error::InvalidFactor(format!("block {b} is split by the map at state {x}")));
            }
            if blocks[target].len() != block.len() {
                return Err(Error::InvalidFactor(format!("block {b} is not mapped onto block {target}")));
            }
            images.push(target);
        }
        let induced =
            Perm::new(images).map_err(|_| Error::InvalidFactor("induced block map is not a bijection".into()))?;
        Ok(Self { blocks, block_of, induced })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.block_of[x]
    }

    pub fn induced(&self) -> &Perm {
        &self.induced
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    fn check_matches(&self, sys: &FiniteSystem) -> Result<()> {
        if self.block_of.len() != sys.len() {
            return Err(Error::InvalidFactor(format!(
                "partition covers {} states, system has {}",
                self.block_of.len(),
                sys.len()
            )));
        }
        for (b, block) in self.blocks.iter().enumerate() {
            let target = self.induced.apply(b);
            if let Some(&x) = block.iter().find(|&&x| self.block_of[sys.perm().apply(x)] != target) {
                return Err(Error::InvalidFactor(format!("partition not invariant at state {x}")));
            }
        }
        Ok(())
    }
}

/// Singleton partition that is valid for any system.
pub fn singleton_partition(sys: &FiniteSystem) -> InvariantPartition {
    InvariantPartition::new(sys, (0..sys.len()).map(|x| vec![x]).collect()).expect("singletons are always invariant")
}

/// One-block partition, valid for any system.
pub fn trivial_partition(sys: &FiniteSystem) -> InvariantPartition {
    InvariantPartition::new(sys, vec![(0..sys.len()).collect()]).expect("one block is invariant")
}

/// `α` is measurable with respect to the factor: constant on every block.
pub fn is_rfmp(sys: &FiniteSystem, part: &InvariantPartition) -> Result<bool> {
    part.check_matches(sys)?;
    let alpha = sys.radon_nikodym();
    Ok(part.blocks().iter().all(|block| block.iter().all(|&x| alpha[x] == alpha[block[0]])))
}

pub fn factor_system(sys: &FiniteSystem, part: &InvariantPartition) -> Result<FiniteSystem> {
    part.check_matches(sys)?;
    let weights = part.blocks().iter().map(|b| rational::sum(b.iter().map(|&x| sys.weight(x)))).collect();
    FiniteSystem::new(weights, part.induced().clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Disintegration {
    /// `ν(y)` for every block.
    pub factor_weights: Vec<Rational>,
    /// `μ_y` as `(state, conditional mass)` pairs, in block order.
    pub conditionals: Vec<Vec<(usize, Rational)>>,
}

impl Disintegration {
    /// `Σ_y ν(y) μ_y` as a measure on the states.
    pub fn reconstruct(&self, n: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); n];
        for (nu, cond) in self.factor_weights.iter().zip(&self.conditionals) {
            for (x, m) in cond {
                out[*x] += nu * m;
            }
        }
        out
    }

    /// States `x` where the push-forward of `μ_y` through `T` disagrees with
    /// `μ_{Sy}`, i.e. where `μ_{Sπ(x)}(Tx) ≠ μ_{π(x)}(x)`.
    pub fn pushforward_violations(&self, sys: &FiniteSystem) -> Vec<usize> {
        let mut cond_of = vec![Rational::zero(); sys.len()];
        for cond in &self.conditionals {
            for (x, m) in cond {
                cond_of[*x] = m.clone();
            }
        }
        (0..sys.len()).filter(|&x| cond_of[sys.perm().apply(x)] != cond_of[x]).collect()
    }

    pub fn pushforward_holds(&self, sys: &FiniteSystem) -> bool {
        self.pushforward_violations(sys).is_empty()
    }
}

pub fn disintegrate(sys: &FiniteSystem, part: &InvariantPartition) -> Result<Disintegration> {
    part.check_matches(sys)?;
    let mut factor_weights = Vec::with_capacity(part.len());
    let mut conditionals = Vec::with_capacity(part.len());
    for block in part.blocks() {
        let nu = rational::sum(block.iter().map(|&x| sys.weight(x)));
        conditionals.push(block.iter().map(|&x| (x, sys.weight(x) / &nu)).collect());
        factor_weights.push(nu);
    }
    Ok(Disintegration { factor_weights, conditionals })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicComponent {
    pub support: Vec<usize>,
    /// Normalised measure `ε`, aligned with `support`.
    pub measure: Vec<Rational>,
    /// `Q(ε)`, the mass of the support.
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicDecomposition {
    pub components: Vec<ErgodicComponent>,
}

impl ErgodicDecomposition {
    pub fn reconstruct(&self, n: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); n];
        for c in &self.components {
            for (x, e) in c.support.iter().zip(&c.measure) {
                out[*x] += &c.weight * e;
            }
        }
        out
    }

    /// Each component's Radon–Nikodym derivative equals the parent's on its
    /// support.
    pub fn rn_agrees(&self, sys: &FiniteSystem) -> bool {
        let alpha = sys.radon_nikodym();
        self.components.iter().all(|c| {
            let mut eps = vec![Rational::zero(); sys.len()];
            for (x, e) in c.support.iter().zip(&c.measure) {
                eps[*x] = e.clone();
            }
            c.support.iter().all(|&x| &eps[sys.perm().apply(x)] / &eps[x] == alpha[x])
        })
    }

    pub fn component_system(&self, sys: &FiniteSystem, i: usize) -> Result<FiniteSystem> {
        sys.restrict(&self.components[i].support)
    }
}

pub fn ergodic_decomposition(sys: &FiniteSystem) -> ErgodicDecomposition {
    let components = sys
        .orbits()
        .into_iter()
        .map(|mut support| {
            support.sort_unstable();
            let weight = rational::sum(support.iter().map(|&x| sys.weight(x)));
            let measure = support.iter().map(|&x| sys.weight(x) / &weight).collect();
            ErgodicComponent { support, measure, weight }
        })
        .collect();
    ErgodicDecomposition { components }
}

/// How one ergodic component sees a factor of the whole system.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentFactor {
    /// The push-forward of `ε` to the factor equals `ν`.
    pub factor_measure_matches: bool,
    /// The factor, restricted to the component, is still r.f.m.p. for `ε`.
    pub still_rfmp: bool,
}

/// For an ergodic r.f.m.p. factor, checks every ergodic component keeps the
/// factor (with its measure) and stays r.f.m.p. over it.
pub fn component_factor_check(sys: &FiniteSystem, part: &InvariantPartition) -> Result<Vec<ComponentFactor>> {
    if !is_rfmp(sys, part)? {
        return Err(Error::Precondition("factor is not r.f.m.p.".into()));
    }
    let factor = factor_system(sys, part)?;
    if !factor.is_ergodic() {
        return Err(Error::Precondition("factor is not ergodic".into()));
    }
    let decomposition = ergodic_decomposition(sys);
    let mut out = Vec::new();
    for (i, c) in decomposition.components.iter().enumerate() {
        let mut pushed = vec![Rational::zero(); part.len()];
        for (x, e) in c.support.iter().zip(&c.measure) {
            pushed[part.block_of(*x)] += e;
        }
        let factor_measure_matches = pushed.as_slice() == factor.weights();

        let comp = decomposition.component_system(sys, i)?;
        let mut local_blocks: Vec<Vec<usize>> = vec![Vec::new(); part.len()];
        for (local, &x) in c.support.iter().enumerate() {
            local_blocks[part.block_of(x)].push(local);
        }
        local_blocks.retain(|b| !b.is_empty());
        let still_rfmp = InvariantPartition::new(&comp, local_blocks).and_then(|p| is_rfmp(&comp, &p)).unwrap_or(false);
        out.push(ComponentFactor { factor_measure_matches, still_rfmp });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeProduct {
    pub system: FiniteSystem,
    /// `pairs[i] = (x, x')` for the `i`-th state of the fibered square.
    pub pairs: Vec<(usize, usize)>,
}

/// The fibered square `{(x, x'): π(x) = π(x')}` with measure
/// `ν(y) μ_y(x) μ_y(x')` and map `T × T`.
pub fn relative_product(sys: &FiniteSystem, part: &InvariantPartition) -> Result<RelativeProduct> {
    if !is_rfmp(sys, part)? {
        return Err(Error::Precondition("relative product needs an r.f.m.p. factor".into()));
    }
    let d = disintegrate(sys, part)?;
    let mut pairs = Vec::new();
    let mut weights = Vec::new();
    for (nu, cond) in d.factor_weights.iter().zip(&d.conditionals) {
        for (x, mx) in cond {
            for (x2, mx2) in cond {
                pairs.push((*x, *x2));
                weights.push(nu * mx * mx2);
            }
        }
    }
    let index: std::collections::HashMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let images = pairs.iter().map(|&(x, x2)| index[&(sys.perm().apply(x), sys.perm().apply(x2))]).collect();
    let system = FiniteSystem::new(weights, Perm::new(images)?)?;
    Ok(RelativeProduct { system, pairs })
}

/// Product coordinates `X ≅ Y × Z` in which `T(y, z) = (Sy, Θ(y) z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RokhlinCoordinates {
    pub base: FiniteSystem,
    /// `ρ`, conditional masses in fiber-position order (non-increasing).
    pub fiber: Vec<Rational>,
    /// `Θ(y)` as a permutation of fiber positions.
    pub theta: Vec<Perm>,
    /// `coords[x] = (y, z)`.
    pub coords: Vec<(usize, usize)>,
    /// `state_at[y][z] = x`.
    pub state_at: Vec<Vec<usize>>,
}

impl RokhlinCoordinates {
    /// The conjugated map agrees with `T` state by state and every `Θ(y)`
    /// preserves `ρ`.
    pub fn verify(&self, sys: &FiniteSystem) -> bool {
        let conj_ok = (0..sys.len()).all(|x| {
            let (y, z) = self.coords[x];
            let (y2, z2) = (self.base.perm().apply(y), self.theta[y].apply(z));
            self.state_at[y2][z2] == sys.perm().apply(x)
        });
        let weights_ok = (0..sys.len()).all(|x| {
            let (y, z) = self.coords[x];
            sys.weight(x) == &(self.base.weight(y) * &self.fiber[z])
        });
        let preserve_ok =
            self.theta.iter().all(|t| (0..self.fiber.len()).all(|z| self.fiber[t.apply(z)] == self.fiber[z]));
        conj_ok && weights_ok && preserve_ok
    }
}

/// Identifies every fiber with a common model `(Z, ρ)`. States in a block are
/// ordered by decreasing conditional mass, ties broken by state index, and
/// matched position by position.
pub fn rokhlin_coordinatize(sys: &FiniteSystem, part: &InvariantPartition) -> Result<RokhlinCoordinates> {
    if !is_rfmp(sys, part)? {
        return Err(Error::Precondition("Rokhlin coordinates need an r.f.m.p. factor".into()));
    }
    let base = factor_system(sys, part)?;
    let d = disintegrate(sys, part)?;
    let ordered: Vec<Vec<(usize, Rational)>> = d
        .conditionals
        .iter()
        .map(|cond| {
            let mut c = cond.clone();
            c.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            c
        })
        .collect();
    let fiber: Vec<Rational> = ordered[0].iter().map(|(_, m)| m.clone()).collect();
    for (y, c) in ordered.iter().enumerate() {
        if c.len() != fiber.len() {
            return Err(Error::CoordinatizationImpossible(format!(
                "fiber {y} has {} points, fiber 0 has {}",
                c.len(),
                fiber.len()
            )));
        }
        if c.iter().zip(&fiber).any(|((_, m), f)| m != f) {
            return Err(Error::CoordinatizationImpossible(format!(
                "conditional measure on fiber {y} is not isomorphic to fiber 0"
            )));
        }
    }
    let mut coords = vec![(0, 0); sys.len()];
    let state_at: Vec<Vec<usize>> = ordered
        .iter()
        .enumerate()
        .map(|(y, c)| {
            c.iter()
                .enumerate()
                .map(|(z, (x, _))| {
                    coords[*x] = (y, z);
                    *x
                })
                .collect()
        })
        .collect();
    let theta = state_at
        .iter()
        .map(|states| {
            let images = states.iter().map(|&x| coords[sys.perm().apply(x)].1).collect();
            Perm::new(images)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RokhlinCoordinates { base, fiber, theta, coords, state_at })
}

/// JSON form: `{"states": n, "weights": ["3/10", ...], "perm": [...], "partition": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDocument {
    pub states: usize,
    pub weights: Vec<String>,
    pub perm: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<Vec<usize>>>,
}

impl SystemDocument {
    pub fn from_system(sys: &FiniteSystem, part: Option<&InvariantPartition>) -> Self {
        Self {
            states: sys.len(),
            weights: rational::vec_to_strings(sys.weights()),
            perm: sys.perm().images().to_vec(),
            partition: part.map(|p| p.blocks().to_vec()),
        }
    }

    pub fn to_system(&self) -> Result<FiniteSystem> {
        if self.weights.len() != self.states || self.perm.len() != self.states {
            return Err(Error::InvalidSystem(format!(
                "declared {} states but got {} weights and {} perm entries",
                self.states,
                self.weights.len(),
                self.perm.len()
            )));
        }
        let weights = self.weights.iter().map(|s| rational::parse(s)).collect::<Result<Vec<_>>>()?;
        FiniteSystem::new(weights, Perm::new(self.perm.clone())?)
    }

    pub fn to_parts(&self) -> Result<(FiniteSystem, Option<InvariantPartition>)> {
        let sys = self.to_system()?;
        let part = match &self.partition {
            Some(blocks) => Some(InvariantPartition::new(&sys, blocks.clone())?),
            None => None,
        };
        Ok((sys, part))
    }
}
