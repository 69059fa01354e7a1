use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Each variant maps onto one CLI exit code and one C ABI status code, so the
/// grouping is by how a caller should react, not by which module raised it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameters outside the region where a series or formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A lattice index outside the truncation radius.
    #[error("index ({j1}, {j2}) outside cutoff {cutoff}")]
    Range { j1: i64, j2: i64, cutoff: u32 },

    /// Inputs that are individually valid but do not fit together.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A coordinate or normalization singularity.
    #[error("singularity: {0}")]
    Singular(String),

    /// A series that did not reach its tolerance within the iteration cap.
    #[error("series did not converge after {terms} terms")]
    NoConvergence { terms: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn singular(msg: impl Into<String>) -> Self {
        Error::Singular(msg.into())
    }

    /// Short machine-readable tag used in structured error output.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Range { .. } => "range",
            Error::Contract(_) => "contract",
            Error::Singular(_) => "singularity",
            Error::NoConvergence { .. } => "no-convergence",
        }
    }
}
