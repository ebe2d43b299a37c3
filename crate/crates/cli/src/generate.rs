use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ergolab::base_systems::SystemDocument;
use ergolab::fixtures;
use ergolab::groups_cocycles::{mat2_to_json, CocycleDocument, GroupSpec};
use ergolab::rank_modules::{invariant_bundle_from_monodromy, BundleDocument, Tolerances};
use ergolab::{rational, Error, Result};

use crate::config::{ActionDocument, InstanceDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureKind {
    WeightedCycle,
    SkewProduct,
    RokhlinExtension,
    MonodromyBundle,
    Appendix,
}

#[derive(Debug, Clone)]
pub struct FixtureParams {
    pub seed: u64,
    /// Base length.
    pub n: usize,
    /// Group order or fiber size.
    pub m: usize,
    pub rank: usize,
    /// Points of the acted-on space.
    pub points: usize,
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidParameter(format!("--{name} must be positive")));
    }
    Ok(())
}

pub fn generate(kind: FixtureKind, p: &FixtureParams) -> Result<InstanceDoc> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    positive("n", p.n)?;
    Ok(match kind {
        FixtureKind::WeightedCycle => {
            InstanceDoc::System(SystemDocument::from_system(&fixtures::weighted_cycle(&mut rng, p.n), None))
        }
        FixtureKind::SkewProduct | FixtureKind::RokhlinExtension => {
            positive("m", p.m)?;
            let cocycle = fixtures::random_cyclic_cocycle(&mut rng, p.n, p.m);
            let action = if kind == FixtureKind::RokhlinExtension {
                positive("points", p.points)?;
                let a = fixtures::random_cyclic_action(&mut rng, p.m, p.points);
                Some(ActionDocument::Explicit {
                    weights: rational::vec_to_strings(a.weights()),
                    perms: a.perms().iter().map(|q| q.images().to_vec()).collect(),
                })
            } else {
                None
            };
            InstanceDoc::Extension {
                base: SystemDocument::from_system(cocycle.base(), None),
                cocycle: CocycleDocument {
                    group: GroupSpec::Cyclic { n: p.m },
                    values: cocycle.values().iter().map(|&v| v.into()).collect(),
                },
                action,
            }
        }
        FixtureKind::MonodromyBundle => {
            positive("m", p.m)?;
            if p.rank == 0 || p.rank > p.m {
                return Err(Error::InvalidParameter(format!("--rank must be in 1..={}", p.m)));
            }
            let (fs, orbit) = fixtures::ergodic_fibered(&mut rng, p.n, p.m);
            let ks = fixtures::distinct_characters(&mut rng, p.m, p.rank);
            let v = fixtures::mixed_characters(&mut rng, &orbit, &ks);
            let bundle = invariant_bundle_from_monodromy(&fs, &v, &Tolerances::default())?;
            // A second, independent rank-one bundle for pairwise checks.
            let k = rng.random_range(0..p.m);
            let other = invariant_bundle_from_monodromy(
                &fs,
                &fixtures::monodromy_character(&orbit, k),
                &Tolerances::default(),
            )?;
            InstanceDoc::Bundle {
                base: SystemDocument::from_system(fs.base(), None),
                fiber: rational::vec_to_strings(fs.fiber()),
                theta: (0..fs.base_len()).map(|y| fs.theta(y).images().to_vec()).collect(),
                bundle: BundleDocument::from_bundle(&bundle, &fs),
                other: Some(BundleDocument::from_bundle(&other, &fs)),
            }
        }
        FixtureKind::Appendix => {
            let constr = fixtures::appendix_construction(p.seed);
            InstanceDoc::Appendix { w: Some(mat2_to_json(constr.w())), seed: Some(p.seed), samples: 100_000, cycle: 3 }
        }
    })
}
