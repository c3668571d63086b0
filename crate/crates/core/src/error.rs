use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Toeplitz model is not positive definite at order {order} (reflection coefficient {reflection})")]
    NotPositiveDefinite { order: usize, reflection: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("negative conditional variance {value} for {what}")]
    NegativeVariance { what: &'static str, value: f64 },

    #[error("unpredictable part of y(1) has zero variance; bilateral pivot is degenerate")]
    DegeneratePivot,

    #[error("path has no grid points")]
    EmptyPath,

    #[error("no non-atom data (atom mass {atom_mass})")]
    NoData { atom_mass: f64 },

    #[error("evaluation point {x} is below the smallest observed non-atom sample; atom mass {atom_mass} is a lower bound")]
    OutOfSupport { x: f64, atom_mass: f64 },

    #[error("too few samples: need at least {needed}, found {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("score equation has no sign change on the bracket; boundary estimate {boundary}")]
    NoRoot { boundary: f64 },

    #[error("too few points: need at least {needed}, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("operation requires a bilateral path")]
    NotBilateral,

    #[error("argument outside the domain: {0}")]
    DomainError(String),
}
