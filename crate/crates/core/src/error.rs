use thiserror::Error;

/// Errors raised by the phase-space, graph and certification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("number of modes must be positive")]
    ZeroModes,

    #[error("expected an even-dimensional square matrix, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("symplectic eigenvalue pairing failed (gap {gap:e} at index {index})")]
    PairingFailure { index: usize, gap: f64 },

    #[error("matrix is not symplectic (residual {0:e})")]
    NotSymplectic(f64),

    #[error("state is not pure (max symplectic eigenvalue {0})")]
    NotPure(f64),

    #[error("state is not physical (min symplectic eigenvalue {0})")]
    Unphysical(f64),

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("mode subset is empty")]
    EmptySubset,

    #[error("duplicate mode index {0}")]
    DuplicateMode(usize),

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("squeezing parameter must be positive, got {0}")]
    InvalidSqueezing(f64),

    #[error("transmittivity must lie in (0, 1), got {0}")]
    InvalidTransmittivity(f64),

    #[error("invalid adjacency matrix: {0}")]
    InvalidAdjacency(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("degenerate squeezing samples: r values must differ")]
    DegenerateSamples,

    #[error("exhaustive scan refused for N = {n} (cap {cap}); use sampled mode")]
    ExhaustiveCapExceeded { n: usize, cap: usize },

    #[error("local reduction did not reach two-mode-squeezed normal form (residual {0:e})")]
    NormalFormMismatch(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
