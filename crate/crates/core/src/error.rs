use thiserror::Error;

/// Errors surfaced by model construction, pulse shaping, integration, and design solves.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Pulse envelope carries more norm than the source cavity can emit.
    #[error("envelope norm {norm:.6} exceeds the allowed 1 - {headroom:.1e} headroom")]
    EnvelopeNorm { norm: f64, headroom: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    /// Linear solve hit a (numerically) singular matrix.
    #[error("singular matrix in {0}")]
    SingularMatrix(&'static str),

    #[error("design solve failed: {0}")]
    Solve(String),
}

pub type Result<T> = std::result::Result<T, Error>;
