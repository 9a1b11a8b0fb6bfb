use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mode {mode} is not available (basis holds {available} modes)")]
    ModeOutOfRange { mode: usize, available: usize },

    #[error("eigenfunction {mode} does not decay at the grid boundary (|phi| = {value:e})")]
    BoundaryDecay { mode: usize, value: f64 },

    #[error("Pauli exclusion violated: both particles occupy the same spin-orbital")]
    PauliExclusion,

    #[error("superposition has no nonzero component")]
    ZeroSuperposition,

    #[error("coefficient matrix is not antisymmetric (max |w + w^T| = {0:e})")]
    NotAntisymmetric(f64),

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("reduced density eigenvalues do not pair (gap {0:e})")]
    PairingFailure(f64),

    #[error("reduced density matrix has negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("{measure} routes disagree by {difference:e}")]
    MeasureMismatch { measure: &'static str, difference: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("interaction table is not even (max |V(u) - V(-u)| = {0:e})")]
    NotEven(f64),

    #[error("level structure depends on U(x) spectrum: declare the degenerate pairs for level {0}")]
    UnknownLevelStructure(usize),

    #[error("closed form is singular (denominator {0:e})")]
    ClosedFormSingular(f64),

    #[error("lambda must be positive, got {0}")]
    InvalidLambda(f64),

    #[error("level is not spectrally isolated at lambda = {lambda} (gap {gap:e}, spread {spread:e})")]
    SpectralOverlap { lambda: f64, gap: f64, spread: f64 },

    #[error("adiabatic tracking is ambiguous at lambda = {0}")]
    TrackingAmbiguity(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
