use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameters violate a geometry invariant (e.g. `0 < rho < r < 1`).
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// A point or argument lies outside the domain of a map or series.
    #[error("domain error: {0}")]
    Domain(String),

    /// Argument sits on the branch cut `[-1, 1]` of the inverse Joukowski map.
    #[error("branch point: {0}")]
    BranchPoint(String),

    /// A pole of a kernel or map was hit.
    #[error("pole: {0}")]
    Pole(String),

    /// Point within `1e-10` of the data curve or of the domain boundary.
    #[error("near-degenerate point: {0}")]
    NearDegenerate(String),

    /// An operation was requested for a configuration it does not support.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Invalid scalar input (tolerance, node count, epsilon range, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A series needed more terms than the hard cap allows.
    #[error("resolution error: series not converged after {terms} terms")]
    Resolution { terms: usize },

    /// Not enough eigenvalues above the noise floor for a rate fit.
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    /// The regularization parameter is below the linear-system conditioning floor.
    #[error("conditioning: {0}")]
    Conditioning(String),

    /// Generic numerical failure (bracketing, eigensolver, singular system).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Failure of an evaluator inside an epsilon sweep.
    #[error("at eps = {eps:e}: {source}")]
    AtEps {
        eps: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True when the error stems from user-supplied parameters rather than from the numerics.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::InvalidGeometry(_)
            | Error::Domain(_)
            | Error::BranchPoint(_)
            | Error::Pole(_)
            | Error::NearDegenerate(_)
            | Error::Configuration(_)
            | Error::InvalidInput(_) => true,
            Error::AtEps { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
