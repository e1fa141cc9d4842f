use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("FCIDUMP line {line}: {msg}")]
    Fcidump { line: usize, msg: String },

    #[error("invalid integrals: {0}")]
    InvalidIntegrals(String),

    #[error("orbital index {index} out of range for {n} orbitals")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("unknown element '{0}'")]
    UnknownElement(String),

    #[error("invalid geometry scan: {0}")]
    InvalidScan(String),

    #[error(
        "degenerate pair denominator {value:.3e} Ha for occupied ({i},{j}) -> virtual ({a},{b})"
    )]
    DegenerateDenominator {
        i: usize,
        j: usize,
        a: usize,
        b: usize,
        value: f64,
    },

    #[error("active space selection: {0}")]
    Selection(String),

    #[error("determinant basis of size {size} exceeds limit {limit}")]
    BasisTooLarge { size: usize, limit: usize },

    #[error("residual imaginary coefficient {imag:.3e} on {term}")]
    ImaginaryCoefficient { term: String, imag: f64 },

    #[error("cannot taper: {0}")]
    Tapering(String),

    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitMismatch { expected: usize, found: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("parameter vector has length {found}, circuit expects {expected}")]
    ParameterCount { expected: usize, found: usize },

    #[error("ansatz: {0}")]
    Ansatz(String),

    #[error("dimension {dim} qubits exceeds the exact-diagonalization limit {limit}")]
    TooManyQubits { dim: usize, limit: usize },

    #[error("eigensolver did not converge (residual {residual:.3e})")]
    NoConvergence { residual: f64 },

    #[error("optimizer diverged in restart {restart}")]
    Diverged { restart: usize },

    #[error("fit: {0}")]
    Fit(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
