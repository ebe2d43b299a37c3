//! Exact finite models of non-singular dynamics.
//!
//! The crate is organised around a handful of finite objects:
//!
//! - [`base_systems`]: weighted permutations (non-singular automorphisms of a
//!   finite probability space), invariant partitions, disintegrations,
//!   ergodic decomposition and Rokhlin coordinates.
//! - [`groups_cocycles`]: groups, cocycles, skew products and Rokhlin cocycle
//!   extensions.
//! - [`ergodic_structure`]: ergodic components of skew products and the
//!   induced (Mackey) action on them.
//! - [`spectra`]: exact eigenvalue groups and their coset structure over a
//!   factor, plus a numeric Weyl-sum scanner.
//! - [`rank_modules`]: finite-rank invariant module bundles over fibered
//!   systems.
//! - [`joinings`]: exact vertex enumeration of joining polytopes and the
//!   checks built on it.
//! - [`appendix_lab`]: Haar sampling on U(2) and the non-orthogonal rank-2
//!   module pair.
//!
//! Everything measure-theoretic is exact (`BigRational`); only the module
//! bundles, the Weyl scan and the U(2) lab use floating point.

pub mod appendix_lab;
pub mod base_systems;
pub mod ergodic_structure;
pub mod error;
pub mod fixtures;
pub mod groups_cocycles;
pub mod joinings;
pub mod linalg;
pub mod perm;
pub mod rank_modules;
pub mod rational;
pub mod spectra;

pub use error::{Error, Result};
pub use perm::Perm;
pub use rational::Rational;
