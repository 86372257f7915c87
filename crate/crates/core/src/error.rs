use thiserror::Error;

/// Errors raised by the library.
///
/// Variants follow the failure classes the experiment runner maps onto exit
/// codes: configuration/parameter/validation/domain problems are caller
/// mistakes, `Scale` means the requested run is too large for the chosen
/// method, `Internal` should never surface in practice.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty domain: {0}")]
    EmptyDomain(String),

    #[error("scale error: {0}")]
    Scale(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

/// Checks `lo < x < hi`, naming the parameter on failure.
pub(crate) fn check_open(name: &str, x: f64, lo: f64, hi: f64) -> Result<()> {
    if x > lo && x < hi {
        Ok(())
    } else {
        Err(param(format!("{name} = {x} must lie in ({lo}, {hi})")))
    }
}
