use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use ergolab::appendix_lab::AppendixConstruction;
use ergolab::base_systems::{FiniteSystem, InvariantPartition, SystemDocument};
use ergolab::groups_cocycles::{mat2_from_json, AnyCocycle, CocycleDocument, GroupAction, Mat2Json};
use ergolab::joinings::DEFAULT_CAP;
use ergolab::rank_modules::{BundleDocument, FiberedSystem, ModuleBundle, Tolerances};
use ergolab::{rational, Perm};

use crate::checks::{self, Kind};

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn default_seed() -> u64 {
    0
}

fn default_tol() -> f64 {
    1e-8
}

fn default_cap() -> usize {
    DEFAULT_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_cap")]
    pub cap: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self { seed: default_seed(), tol: default_tol(), cap: default_cap() }
    }
}

impl Settings {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances { constraint: self.tol / 10.0, residual: self.tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionDocument {
    /// The group acting on itself by left translation.
    Translation,
    Trivial {
        points: usize,
    },
    /// `perms[g]` for every group element index `g`.
    Explicit {
        weights: Vec<String>,
        perms: Vec<Vec<usize>>,
    },
}

fn default_cycle() -> usize {
    3
}

fn default_samples() -> usize {
    100_000
}

fn default_k() -> i64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceDoc {
    System(SystemDocument),
    Pair {
        left: SystemDocument,
        right: SystemDocument,
    },
    Extension {
        base: SystemDocument,
        cocycle: CocycleDocument,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        action: Option<ActionDocument>,
    },
    Bundle {
        base: SystemDocument,
        fiber: Vec<String>,
        theta: Vec<Vec<usize>>,
        bundle: BundleDocument,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        other: Option<BundleDocument>,
    },
    Appendix {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w: Option<Mat2Json>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default = "default_cycle")]
        cycle: usize,
    },
    Rotation {
        alpha: f64,
        #[serde(default)]
        x0: f64,
        #[serde(default = "default_k")]
        k: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub check: String,
    pub instance: String,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub settings: Settings,
    #[serde(default)]
    pub instances: BTreeMap<String, InstanceDoc>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

pub enum Instance {
    System { sys: FiniteSystem, part: Option<InvariantPartition> },
    Pair { left: FiniteSystem, right: FiniteSystem },
    Extension { cocycle: AnyCocycle, action: Option<GroupAction> },
    Bundle { fs: FiberedSystem, bundle: ModuleBundle, other: Option<ModuleBundle> },
    Appendix { constr: AppendixConstruction, seed: Option<u64>, samples: usize, cycle: usize },
    Rotation { alpha: f64, x0: f64, k: i64 },
}

impl Instance {
    pub fn kind(&self) -> Kind {
        match self {
            Instance::System { .. } => Kind::System,
            Instance::Pair { .. } => Kind::Pair,
            Instance::Extension { .. } => Kind::Extension,
            Instance::Bundle { .. } => Kind::Bundle,
            Instance::Appendix { .. } => Kind::Appendix,
            Instance::Rotation { .. } => Kind::Rotation,
        }
    }
}

fn parse_weights(weights: &[String]) -> ergolab::Result<Vec<ergolab::Rational>> {
    weights.iter().map(|s| rational::parse(s)).collect()
}

pub fn build_action(doc: &ActionDocument, cocycle: &AnyCocycle) -> ergolab::Result<GroupAction> {
    let group = cocycle.as_finite()?.group();
    match doc {
        ActionDocument::Translation => Ok(GroupAction::left_translation(group)),
        ActionDocument::Trivial { points } => Ok(GroupAction::trivial(group, *points)),
        ActionDocument::Explicit { weights, perms } => {
            let perms = perms.iter().map(|p| Perm::new(p.clone())).collect::<ergolab::Result<Vec<_>>>()?;
            GroupAction::new(group.clone(), parse_weights(weights)?, perms)
        }
    }
}

pub fn build_fibered(base: &SystemDocument, fiber: &[String], theta: &[Vec<usize>]) -> ergolab::Result<FiberedSystem> {
    let theta = theta.iter().map(|t| Perm::new(t.clone())).collect::<ergolab::Result<Vec<_>>>()?;
    FiberedSystem::new(base.to_system()?, parse_weights(fiber)?, theta)
}

impl InstanceDoc {
    pub fn build(&self) -> ergolab::Result<Instance> {
        Ok(match self {
            InstanceDoc::System(doc) => {
                let (sys, part) = doc.to_parts()?;
                Instance::System { sys, part }
            }
            InstanceDoc::Pair { left, right } => Instance::Pair { left: left.to_system()?, right: right.to_system()? },
            InstanceDoc::Extension { base, cocycle, action } => {
                let cocycle = cocycle.to_cocycle(base.to_system()?)?;
                let action = match action {
                    Some(doc) => Some(build_action(doc, &cocycle)?),
                    None => cocycle.as_finite().ok().map(|c| GroupAction::left_translation(c.group())),
                };
                Instance::Extension { cocycle, action }
            }
            InstanceDoc::Bundle { base, fiber, theta, bundle, other } => {
                let fs = build_fibered(base, fiber, theta)?;
                let bundle_m = bundle.to_bundle(&fs)?;
                let other = other.as_ref().map(|b| b.to_bundle(&fs)).transpose()?;
                Instance::Bundle { fs, bundle: bundle_m, other }
            }
            InstanceDoc::Appendix { w, seed, samples, cycle } => {
                let w = w.map(|m| mat2_from_json(&m)).unwrap_or_else(ergolab::fixtures::default_appendix_w);
                Instance::Appendix {
                    constr: AppendixConstruction::new(w)?,
                    seed: *seed,
                    samples: *samples,
                    cycle: *cycle,
                }
            }
            InstanceDoc::Rotation { alpha, x0, k } => Instance::Rotation { alpha: *alpha, x0: *x0, k: *k },
        })
    }
}

/// Parses with field-path and line/column diagnostics.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ConfigError(format!("at `{path}` (line {}, column {}): {inner}", inner.line(), inner.column()))
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

/// Builds every instance and checks that every check is registered, names a
/// defined instance, and applies to that instance's kind.
pub fn validate(config: &ExperimentConfig) -> Result<BTreeMap<String, Instance>, ConfigError> {
    let s = &config.settings;
    if !(s.tol.is_finite() && s.tol > 0.0) {
        return Err(ConfigError(format!("settings.tol must be positive, got {}", s.tol)));
    }
    if s.cap == 0 {
        return Err(ConfigError("settings.cap must be positive".into()));
    }
    let mut built = BTreeMap::new();
    for (name, doc) in &config.instances {
        let inst = doc.build().map_err(|e| ConfigError(format!("instances.{name}: {e}")))?;
        built.insert(name.clone(), inst);
    }
    for (i, spec) in config.checks.iter().enumerate() {
        let info = checks::lookup(&spec.check)
            .ok_or_else(|| ConfigError(format!("checks[{i}]: unknown check `{}` (see --list-checks)", spec.check)))?;
        let inst = built
            .get(&spec.instance)
            .ok_or_else(|| ConfigError(format!("checks[{i}]: instance `{}` is not defined", spec.instance)))?;
        if inst.kind() != info.kind {
            return Err(ConfigError(format!(
                "checks[{i}]: `{}` needs a {} instance but `{}` is a {}",
                spec.check,
                info.kind.as_str(),
                spec.instance,
                inst.kind().as_str()
            )));
        }
        if !(spec.params.is_null() || spec.params.is_object()) {
            return Err(ConfigError(format!("checks[{i}].params must be an object")));
        }
    }
    Ok(built)
}
