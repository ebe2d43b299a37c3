//! Seeded random instances for tests, acceptance runs and `generate`.

use num_complex::Complex64;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::appendix_lab::{random_admissible, AppendixConstruction, HaarSampler};
use crate::base_systems::{FiniteSystem, InvariantPartition};
use crate::groups_cocycles::{Cocycle, FiniteGroup, GroupAction, Mat2};
use crate::linalg::{self, c, CMat};
use crate::perm::Perm;
use crate::rank_modules::FiberedSystem;
use crate::rational::{self, Rational};

fn random_perm<R: Rng>(rng: &mut R, n: usize) -> Perm {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    Perm::new(v).unwrap()
}

/// A random `n`-cycle.
pub fn random_cycle<R: Rng>(rng: &mut R, n: usize) -> Perm {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut images = vec![0; n];
    for k in 0..n {
        images[order[k]] = order[(k + 1) % n];
    }
    Perm::new(images).unwrap()
}

fn normalize(raw: &[i64]) -> Vec<Rational> {
    let total: i64 = raw.iter().sum();
    raw.iter().map(|&w| rational::ratio(w, total)).collect()
}

fn random_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..n).map(|_| rng.random_range(1..=9)).collect();
    normalize(&raw)
}

/// An `n`-cycle with random positive weights (non-singular, usually not
/// measure-preserving).
pub fn weighted_cycle<R: Rng>(rng: &mut R, n: usize) -> FiniteSystem {
    FiniteSystem::new(random_weights(rng, n), Perm::rotation(n, 1)).unwrap()
}

/// Fiber masses constant on random level sets, with a permutation group
/// preserving them.
fn random_fiber<R: Rng>(rng: &mut R, m: usize) -> (Vec<Rational>, Vec<usize>) {
    let levels = rng.random_range(1..=m.min(3));
    let level: Vec<usize> = (0..m).map(|z| if z < levels { z } else { rng.random_range(0..levels) }).collect();
    let values: Vec<i64> = (0..levels).map(|_| rng.random_range(1..=5)).collect();
    let raw: Vec<i64> = level.iter().map(|&l| values[l]).collect();
    (normalize(&raw), level)
}

fn level_preserving_perm<R: Rng>(rng: &mut R, level: &[usize]) -> Perm {
    let mut images = vec![0; level.len()];
    let max = level.iter().max().copied().unwrap_or(0);
    for l in 0..=max {
        let pts: Vec<usize> = (0..level.len()).filter(|&z| level[z] == l).collect();
        let mut shuffled = pts.clone();
        shuffled.shuffle(rng);
        for (a, b) in pts.iter().zip(&shuffled) {
            images[*a] = *b;
        }
    }
    Perm::new(images).unwrap()
}

/// A random system with an r.f.m.p. partition, built as `Y × Z` with
/// `T(y, z) = (Sy, Θ(y) z)` and randomly relabelled. The base is a single
/// cycle when `ergodic_base`, otherwise an arbitrary permutation.
pub fn random_rfmp<R: Rng>(rng: &mut R, max_states: usize, ergodic_base: bool) -> (FiniteSystem, InvariantPartition) {
    let m = rng.random_range(1..=4.min(max_states));
    let ny = rng.random_range(1..=(max_states / m).max(1));
    let s = if ergodic_base { random_cycle(rng, ny) } else { random_perm(rng, ny) };
    let nu = random_weights(rng, ny);
    let (rho, level) = random_fiber(rng, m);
    let theta: Vec<Perm> = (0..ny).map(|_| level_preserving_perm(rng, &level)).collect();
    let n = ny * m;
    let relabel = random_perm(rng, n);
    let mut weights = vec![Rational::default(); n];
    let mut images = vec![0; n];
    for y in 0..ny {
        for z in 0..m {
            let x = relabel.apply(y * m + z);
            weights[x] = &nu[y] * &rho[z];
            images[x] = relabel.apply(s.apply(y) * m + theta[y].apply(z));
        }
    }
    let sys = FiniteSystem::new(weights, Perm::new(images).unwrap()).unwrap();
    let blocks = (0..ny).map(|y| (0..m).map(|z| relabel.apply(y * m + z)).collect()).collect();
    let part = InvariantPartition::new(&sys, blocks).unwrap();
    (sys, part)
}

/// An invariant partition that is not r.f.m.p.: two states in one block
/// get different weight ratios along `T`. `None` if the draw cannot make one.
pub fn random_non_rfmp<R: Rng>(rng: &mut R, half: usize) -> Option<(FiniteSystem, InvariantPartition)> {
    if half < 2 {
        return None;
    }
    // Two parallel cycles of length `half`, blocks {i, half + i}.
    let n = 2 * half;
    let images: Vec<usize> =
        (0..n).map(|x| if x < half { (x + 1) % half } else { half + (x - half + 1) % half }).collect();
    let mut raw: Vec<i64> = (0..n).map(|_| rng.random_range(1..=9)).collect();
    raw[0] = 1;
    raw[1] = 2;
    raw[half] = 2;
    raw[half + 1] = 1;
    let sys = FiniteSystem::new(normalize(&raw), Perm::new(images).unwrap()).unwrap();
    let part = InvariantPartition::new(&sys, (0..half).map(|i| vec![i, half + i]).collect()).ok()?;
    Some((sys, part))
}

/// An `N`-cycle over its `M`-cycle factor (`M | N`, `N ≤ max_len`) with
/// weights `ν(x mod M)·M/N`.
pub fn cycle_over_cycle<R: Rng>(rng: &mut R, max_len: usize) -> (FiniteSystem, InvariantPartition) {
    let n = rng.random_range(1..=max_len);
    let divisors: Vec<usize> = (1..=n).filter(|d| n % d == 0).collect();
    let m = *divisors.choose(rng).unwrap();
    let nu = random_weights(rng, m);
    let scale = rational::ratio(m as i64, n as i64);
    let weights = (0..n).map(|x| &nu[x % m] * &scale).collect();
    let sys = FiniteSystem::new(weights, Perm::rotation(n, 1)).unwrap();
    let blocks = (0..m).map(|i| (i..n).step_by(m).collect()).collect();
    let part = InvariantPartition::new(&sys, blocks).unwrap();
    (sys, part)
}

/// Cyclic base of length `n`, uniform fiber of size `m`, random `Θ` whose
/// monodromy is an `m`-cycle (so `S_Θ` is ergodic). Returns the system and
/// the monodromy cycle as an orbit list starting at fiber point 0.
pub fn ergodic_fibered<R: Rng>(rng: &mut R, n: usize, m: usize) -> (FiberedSystem, Vec<usize>) {
    let mut theta: Vec<Perm> = (0..n).map(|_| random_perm(rng, m)).collect();
    let partial = (0..n - 1).fold(Perm::identity(m), |acc, y| theta[y].compose(&acc));
    let target = random_cycle(rng, m);
    theta[n - 1] = target.compose(&partial.inverse());
    let base = FiniteSystem::new(random_weights(rng, n), Perm::rotation(n, 1)).unwrap();
    let fs = FiberedSystem::new(base, vec![rational::ratio(1, m as i64); m], theta).unwrap();
    let w = fs.monodromy_perm().unwrap();
    let mut orbit = vec![0];
    let mut z = w.apply(0);
    while z != 0 {
        orbit.push(z);
        z = w.apply(z);
    }
    (fs, orbit)
}

/// The character `χ_k(W^j z0) = e^{2πi k j / m}` along a monodromy cycle; it
/// satisfies `χ_k ∘ W = e^{2πi k/m} χ_k`.
pub fn monodromy_character(orbit: &[usize], k: usize) -> CMat {
    let m = orbit.len();
    let mut v = CMat::zeros(m, 1);
    for (j, &z) in orbit.iter().enumerate() {
        v[(z, 0)] = linalg::cis((k * j % m) as f64 / m as f64);
    }
    v
}

/// A random basis of the span of the given characters: the characters mixed
/// by a random complex Gaussian `r × r` matrix.
pub fn mixed_characters<R: Rng>(rng: &mut R, orbit: &[usize], ks: &[usize]) -> CMat {
    let cols: Vec<_> = ks.iter().map(|&k| monodromy_character(orbit, k).column(0).into_owned()).collect();
    let chars = CMat::from_columns(&cols);
    let r = ks.len();
    loop {
        let mix = CMat::from_fn(r, r, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c(re, im)
        });
        let s = linalg::singular_values(&mix);
        if s[r - 1] > 0.1 * s[0] {
            return &chars * mix;
        }
    }
}

/// `r` distinct character indices out of `m`, sorted.
pub fn distinct_characters<R: Rng>(rng: &mut R, m: usize, r: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (0..m).collect();
    ks.shuffle(rng);
    let mut out = ks[..r].to_vec();
    out.sort_unstable();
    out
}

/// A random group action of `Z_k` on a few points: by a permutation whose
/// order divides `k`, with uniform measure.
pub fn random_cyclic_action<R: Rng>(rng: &mut R, k: usize, max_points: usize) -> GroupAction {
    loop {
        let m = rng.random_range(1..=max_points);
        let sigma = random_perm(rng, m);
        if sigma.pow(k as i64).is_identity() {
            return GroupAction::cyclic_generator(k, sigma, vec![rational::ratio(1, m as i64); m]).unwrap();
        }
    }
}

/// A random cocycle on a uniform `n`-cycle into `Z_k`.
pub fn random_cyclic_cocycle<R: Rng>(rng: &mut R, n: usize, k: usize) -> Cocycle<FiniteGroup> {
    let values = (0..n).map(|_| rng.random_range(0..k)).collect();
    Cocycle::new(FiniteSystem::cycle(n), FiniteGroup::cyclic(k), values).unwrap()
}

/// Instance family with a non-product slice joining: base `Z_a`, `G = Z_p`
/// rotating `Y = Z_p`, `φ = 1_{0}`, against `R = Z_p` with `gcd(a, p) = 1`.
pub fn lemma_witness(a: usize, p: usize) -> (Cocycle<FiniteGroup>, GroupAction, FiniteSystem) {
    let mut values = vec![0; a];
    values[0] = 1 % p;
    let cocycle = Cocycle::new(FiniteSystem::cycle(a), FiniteGroup::cyclic(p), values).unwrap();
    let action = GroupAction::cyclic_generator(p, Perm::rotation(p, 1), vec![rational::ratio(1, p as i64); p]).unwrap();
    (cocycle, action, FiniteSystem::cycle(p))
}

/// The fixed `w = [[a, −b̄], [b, ā]]` with `a = e^{0.3i} cos 0.7`,
/// `b = e^{0.5i} sin 0.7`.
pub fn default_appendix_w() -> Mat2 {
    let (co, si) = (0.7f64.cos(), 0.7f64.sin());
    let a = Complex64::from_polar(co, 0.3);
    let b = Complex64::from_polar(si, 0.5);
    Mat2::new(a, -b.conj(), b, a.conj())
}

/// A random admissible `w`, drawn from a stream disjoint from the sample
/// streams of the same seed.
pub fn appendix_construction(seed: u64) -> AppendixConstruction {
    random_admissible(&mut HaarSampler::new(seed ^ 0x5757_0000_0000_0000))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_systems::is_rfmp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_satisfy_their_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let (sys, part) = random_rfmp(&mut rng, 64, false);
            assert!(sys.len() <= 64);
            assert!(is_rfmp(&sys, &part).unwrap());
            let (sys, part) = cycle_over_cycle(&mut rng, 48);
            assert!(sys.is_ergodic() && is_rfmp(&sys, &part).unwrap());
            let (fs, orbit) = ergodic_fibered(&mut rng, 5, 4);
            assert!(fs.is_ergodic());
            assert_eq!(orbit.len(), 4);
        }
        let (sys, part) = random_non_rfmp(&mut rng, 3).unwrap();
        assert!(!is_rfmp(&sys, &part).unwrap());
    }
}
