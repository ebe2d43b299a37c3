use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid factor: {0}")]
    InvalidFactor(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("coordinatization impossible: {0}")]
    CoordinatizationImpossible(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("system is not ergodic ({components} components); decompose first")]
    NotErgodic { components: usize },

    #[error("rank collapse in fiber {fiber}")]
    RankCollapse { fiber: usize },

    #[error("subspace is not closed under the monodromy (residual {residual:e})")]
    NotClosed { residual: f64 },

    #[error("bundle is not invariant at fiber {fiber} (residual {residual:e})")]
    NotInvariant { fiber: usize, residual: f64 },

    #[error("ambiguous eigenvalue clusters: {0}")]
    ClusterAmbiguity(String),

    #[error("irreducibility violated at fiber {fiber}: {detail}")]
    IrreducibilityViolation { fiber: usize, detail: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("problem too large: {size} orbit variables exceed cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("invalid isomorphism at state {state}: {detail}")]
    InvalidIsomorphism { state: usize, detail: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}
