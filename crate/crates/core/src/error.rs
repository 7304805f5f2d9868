use thiserror::Error;

/// Errors raised by chaingeo operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("zero vector has no projective class")]
    ZeroVector,

    #[error("vector spans a positive line, which is not a point of the ball model")]
    PositiveLine,

    #[error("expected an interior point")]
    NotInterior,

    #[error("expected a boundary point")]
    NotBoundary,

    #[error("points coincide projectively")]
    CoincidentPoints,

    #[error("tangent vector is based at a different point")]
    BaseMismatch,

    #[error("span has rank {rank}, expected {expected}")]
    DegenerateSpan { rank: usize, expected: usize },

    #[error("span is not of signature ({positive},1)")]
    WrongSignature { positive: usize },

    #[error("matrix does not preserve the form (residual {residual:e})")]
    NotAnIsometry { residual: f64 },

    #[error("quadrilateral construction failed at step m{step}: {reason}")]
    Quadrilateral { step: u8, reason: &'static str },

    #[error("ill-conditioned input: {0}")]
    IllConditioned(String),

    #[error("fit residual plateau {residual:e} exceeds {threshold:e}: no rigid model")]
    NoRigidModel { residual: f64, threshold: f64 },

    #[error("map reverses chain orientation (antiholomorphic model fits)")]
    OrientationReversing,

    #[error("surface relator residual {residual:e} too large")]
    RelatorResidual { residual: f64 },

    #[error("entropy fit residual {residual:e} exceeds 2%")]
    EntropyFit { residual: f64 },

    #[error("group axiom violated: {0}")]
    GroupAxiom(String),

    #[error("kernel property ({property}) failed")]
    KernelProperty { property: u8 },

    #[error("function is not invariant under the subgroup")]
    NotInvariant,

    #[error("refused: {0}")]
    Refused(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
