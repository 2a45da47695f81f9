use thiserror::Error;

/// Errors raised by certificate construction, simulation and integration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("singular parameters: {0}")]
    SingularParameter(String),

    #[error("iteration diverged at step {step}")]
    Divergence { step: usize },

    #[error("oracle does not support this operation: {0}")]
    UnsupportedOracle(&'static str),

    #[error("certificate infeasible: max eigenvalue of T = {max_eig:e}, min eigenvalue of P~ = {ptilde_min_eig:e}")]
    CertificateInfeasible { max_eig: f64, ptilde_min_eig: f64 },

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
