use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input lies outside the region where the result is defined or proven.
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid configuration (trial counts, stop rules, ...).
    #[error("configuration error: {0}")]
    Config(String),
    /// A bracketed solve finished but its residual exceeds the tolerance.
    #[error("root solve did not reach tolerance: residual {residual:e} > {tol:e}")]
    Residual { residual: f64, tol: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
