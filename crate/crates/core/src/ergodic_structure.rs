//! Ergodic components of skew products and the Mackey action on them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups_cocycles::{FiniteGroup, SkewProduct};
use crate::perm::{orbit_labels, orbits_of_generated, Perm};
use crate::rational::{self, Rational};

/// Orbits of `T_φ` on `X × G`, ordered by minimal product index, with their
/// masses under `μ ⊗ λ_G`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpace {
    components: Vec<Vec<usize>>,
    lambda: Vec<Rational>,
    labels: Vec<usize>,
}

impl ComponentSpace {
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn lambda(&self) -> &[Rational] {
        &self.lambda
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component_of(&self, state: usize) -> usize {
        self.labels[state]
    }

    pub fn weights_equal(&self) -> bool {
        self.lambda.windows(2).all(|w| w[0] == w[1])
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "components": self.components,
            "lambda": rational::vec_to_strings(&self.lambda),
        })
    }

    /// `component,weight` rows.
    pub fn weights_csv(&self) -> String {
        let mut out = String::from("component,weight\n");
        for (i, w) in self.lambda.iter().enumerate() {
            out.push_str(&format!("{i},{}\n", rational::to_string(w)));
        }
        out
    }
}

pub fn ergodic_components(skew: &SkewProduct) -> ComponentSpace {
    let sys = skew.system();
    let components = orbits_of_generated(sys.len(), &[sys.perm()]);
    let lambda = components.iter().map(|c| rational::sum(c.iter().map(|&i| sys.weight(i)))).collect();
    let labels = orbit_labels(sys.len(), &components);
    ComponentSpace { components, lambda, labels }
}

/// `g ↦` the permutation of component indices induced by `τ_g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MackeyAction {
    #[serde(skip)]
    group: FiniteGroup,
    perms: Vec<Perm>,
}

impl MackeyAction {
    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn perm(&self, g: usize) -> &Perm {
        &self.perms[g]
    }

    pub fn perms(&self) -> &[Perm] {
        &self.perms
    }

    pub fn is_transitive(&self) -> bool {
        let n = self.perms.first().map_or(0, Perm::len);
        let refs: Vec<&Perm> = self.perms.iter().collect();
        orbits_of_generated(n, &refs).len() <= 1
    }

    /// `τ_{gs} = τ_g ∘ τ_s` for all `g` and generators `s`.
    pub fn is_homomorphism(&self) -> bool {
        let g = &self.group;
        self.perms[g.identity_idx()].is_identity()
            && g.generators()
                .into_iter()
                .all(|s| (0..g.order()).all(|a| self.perms[g.mul_idx(a, s)] == self.perms[a].compose(&self.perms[s])))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self.perms)
    }
}

pub fn mackey_action(skew: &SkewProduct) -> Result<MackeyAction> {
    let space = ergodic_components(skew);
    let group = skew.group().clone();
    let mut perms = Vec::with_capacity(group.order());
    for g in 0..group.order() {
        let tau = skew.tau(g);
        let images: Vec<usize> = space.components().iter().map(|c| space.component_of(tau.apply(c[0]))).collect();
        // τ_g commutes with T_φ, so the whole component must land in one place.
        for (k, c) in space.components().iter().enumerate() {
            if let Some(&i) = c.iter().find(|&&i| space.component_of(tau.apply(i)) != images[k]) {
                return Err(Error::Precondition(format!("τ_{g} splits component {k} at state {i}")));
            }
        }
        perms.push(Perm::new(images)?);
    }
    let action = MackeyAction { group, perms };
    if !action.is_homomorphism() {
        return Err(Error::InvalidAction("induced component action is not a homomorphism".into()));
    }
    Ok(action)
}
