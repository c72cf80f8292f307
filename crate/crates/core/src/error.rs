use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The model configuration is invalid (field degeneracy, bad form factor, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A mathematical hypothesis required by the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Two second-order resonances collided, so the eigenbasis is not unique.
    #[error(
        "degenerate resonances at {energy}: branches {first} and {second} are separated by {gap:e}"
    )]
    Degeneracy {
        energy: String,
        first: usize,
        second: usize,
        gap: f64,
    },

    /// An iterative numerical procedure did not reach its tolerance.
    #[error("{what} did not converge (residual {residual:e})")]
    Numeric { what: String, residual: f64 },

    /// A computed quantity violates an invariant it must satisfy.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
