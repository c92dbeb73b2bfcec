use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Payload does not leave room for a vacuum amplitude.
    #[error("sender {sender} cannot be normalized: payload norm² = {payload:.6e}, residual {residual:.3e} (rescale the input or enable auto-scaling)")]
    Normalization {
        sender: usize,
        payload: f64,
        residual: f64,
    },

    #[error("sender {sender}: vacuum population {residual:.3e} is numerically degenerate")]
    DegenerateVacuum { sender: usize, residual: f64 },

    #[error("row {0} is already constrained")]
    DuplicateRow(String),

    #[error("constraint validation failed: {0}")]
    Validation(String),

    #[error("matrix is singular to working precision: {0}")]
    Singular(String),

    #[error("decode constant {0:.3e} is degenerate")]
    DegenerateDecode(f64),

    #[error("{qubits} qubits exceed the dense engine cap of {cap}; use the sector engine")]
    DenseCap { qubits: usize, cap: usize },

    #[error("missing extracted value for {0}")]
    MissingValue(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
