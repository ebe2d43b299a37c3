use num_integer::Integer;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ergolab::base_systems::{disintegrate, is_rfmp, rokhlin_coordinatize, FiniteSystem};
use ergolab::ergodic_structure::{ergodic_components, mackey_action};
use ergolab::fixtures;
use ergolab::groups_cocycles::{build_skew_product, Cocycle, FiniteGroup};
use ergolab::joinings::{joining_polytope, DEFAULT_CAP};
use ergolab::linalg::cis;
use ergolab::rank_modules::{
    fiberwise_gram_schmidt, invariant_bundle_from_monodromy, relative_eigenvalue, ModuleBundle, Tolerances,
};
use ergolab::rational;
use ergolab::spectra::product_ergodicity_check;
use ergolab::{Perm, Rational};

fn group_for(choice: u8) -> FiniteGroup {
    match choice % 3 {
        0 => FiniteGroup::cyclic(4),
        1 => FiniteGroup::symmetric(3).unwrap(),
        _ => FiniteGroup::cyclic_product(&[2, 3]).unwrap(),
    }
}

fn random_cocycle(seed: u64, choice: u8) -> Cocycle<FiniteGroup> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = group_for(choice);
    let n = rng.random_range(1..=6);
    let values = (0..n).map(|_| rng.random_range(0..g.order())).collect();
    Cocycle::new(FiniteSystem::cycle(n), g, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cocycle_chain_rule(seed in any::<u64>(), choice in any::<u8>(), m in -8i64..8, n in -8i64..8) {
        let c = random_cocycle(seed, choice);
        let g = c.group();
        for x in 0..c.base().len() {
            let tm = c.base().perm().pow(m).apply(x);
            prop_assert_eq!(c.iterate(m + n, x), g.mul_idx(c.iterate(n, tm), c.iterate(m, x)));
        }
    }

    #[test]
    fn components_divide_group_order(seed in any::<u64>(), choice in any::<u8>()) {
        let c = random_cocycle(seed, choice);
        let skew = build_skew_product(&c).unwrap();
        let space = ergodic_components(&skew);
        prop_assert_eq!(c.group().order() % space.len(), 0);
        prop_assert!(space.weights_equal());
        let mackey = mackey_action(&skew).unwrap();
        prop_assert!(mackey.is_transitive() && mackey.is_homomorphism());
        for g in 0..c.group().order() {
            prop_assert!(skew.tau_commutes(g));
        }
    }

    #[test]
    fn rfmp_fixtures_disintegrate_and_coordinatize(seed in any::<u64>(), ergodic in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sys, part) = fixtures::random_rfmp(&mut rng, 64, ergodic);
        prop_assert!(is_rfmp(&sys, &part).unwrap());
        let d = disintegrate(&sys, &part).unwrap();
        prop_assert!(d.pushforward_holds(&sys));
        prop_assert_eq!(d.reconstruct(sys.len()), sys.weights().to_vec());
        let coords = rokhlin_coordinatize(&sys, &part).unwrap();
        prop_assert!(coords.verify(&sys));
    }

    #[test]
    fn non_rfmp_partitions_are_rejected(seed in any::<u64>(), half in 2usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sys, part) = fixtures::random_non_rfmp(&mut rng, half).unwrap();
        prop_assert!(!is_rfmp(&sys, &part).unwrap());
        prop_assert!(rokhlin_coordinatize(&sys, &part).is_err());
    }

    #[test]
    fn rational_text_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = rational::ratio(p, q);
        prop_assert_eq!(rational::parse(&rational::to_string(&r)).unwrap(), r);
    }

    #[test]
    fn perm_inverse_and_pow(seed in any::<u64>(), n in 1usize..20, k in -30i64..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = fixtures::random_cycle(&mut rng, n);
        prop_assert!(p.compose(&p.inverse()).is_identity());
        prop_assert!(p.pow(k).compose(&p.pow(-k)).is_identity());
        prop_assert!(p.pow(n as i64).is_identity());
    }

    #[test]
    fn character_monodromy_is_its_phase(seed in any::<u64>(), n in 1usize..12, m in 1usize..8, k in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = k % m;
        let (fs, orbit) = fixtures::ergodic_fibered(&mut rng, n, m);
        let tol = Tolerances::default();
        let bundle = invariant_bundle_from_monodromy(&fs, &fixtures::monodromy_character(&orbit, k), &tol).unwrap();
        let mon = relative_eigenvalue(&bundle, &fs, &tol).unwrap().monodromy(&fs).unwrap();
        prop_assert!((mon[(0, 0)] - cis(k as f64 / m as f64)).norm() < 1e-9);
    }

    #[test]
    fn gram_schmidt_orthonormalizes_mixed_bases(seed in any::<u64>(), n in 1usize..10, m in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (fs, orbit) = fixtures::ergodic_fibered(&mut rng, n, m);
        let r = rng.random_range(1..=m);
        let ks = fixtures::distinct_characters(&mut rng, m, r);
        let fibers = (0..n).map(|_| fixtures::mixed_characters(&mut rng, &orbit, &ks)).collect();
        let raw = ModuleBundle::new(&fs, fibers).unwrap();
        let on = fiberwise_gram_schmidt(&raw, &fs, &Tolerances::default()).unwrap();
        prop_assert!(on.orthonormality_residual(&fs) < 1e-10);
    }

    #[test]
    fn product_ergodicity_matches_gcd(n in 1usize..40, m in 1usize..40) {
        let rep = product_ergodicity_check(&FiniteSystem::cycle(n), &FiniteSystem::cycle(m)).unwrap();
        prop_assert_eq!(rep.orbit_count, n.gcd(&m));
        prop_assert!(rep.agree());
    }
}

#[test]
fn cycle_self_joinings_are_the_rotation_graphs() {
    for n in 1..=8 {
        let t = FiniteSystem::cycle(n);
        let simplex = joining_polytope(&t, &t, DEFAULT_CAP).unwrap();
        assert_eq!(simplex.joinings.len(), n);
        for j in &simplex.joinings {
            assert!(j.is_joining(&t, &t));
            let support = j.entries.iter().flatten().filter(|v| **v != Rational::default()).count();
            assert_eq!(support, n);
        }
    }
}

#[test]
fn rotation_powers_match_apply_n() {
    let p = Perm::rotation(7, 3);
    for x in 0..7 {
        assert_eq!(p.apply_n(x, 5), p.pow(5).apply(x));
    }
}
