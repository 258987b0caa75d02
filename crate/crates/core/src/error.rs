use thiserror::Error;

/// Errors raised by problem construction, solving and the stability analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error("convexity probe failed: {0}")]
    NotConvex(String),

    #[error("objective is unbounded below (linear term not in the range of the Hessian)")]
    UnboundedBelow,

    #[error("trust-region boundary solution is not unique (hard case)")]
    HardCaseDegeneracy,

    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),

    #[error("selection ball does not intersect the solution set")]
    EmptyIntersection,

    #[error("start point is infeasible for the constraint set")]
    InfeasibleStart,

    #[error("radius must be positive")]
    RadiusNonpositive,

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("no gap certificate available for this problem")]
    CertificationUnavailable,

    #[error("improper problem: objective is +inf on the whole constraint set")]
    ImproperProblem,

    #[error("at index n={index}: {source}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(index: usize) -> impl FnOnce(Error) -> Error {
        move |e| Error::AtIndex {
            index,
            source: Box::new(e),
        }
    }

    /// Strips `AtIndex` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIndex { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
