use thiserror::Error;

/// Errors produced by mesh generation, assembly and the eigensolvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh level must be between 1 and 12, got {0}")]
    InvalidLevel(u32),
    #[error("cell {0} has zero volume")]
    DegenerateCell(usize),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("boundary facet {0} is not axis aligned")]
    NonAxisFacet(usize),
    #[error("unknown boundary label `{0}`")]
    UnknownLabel(String),
    #[error("facet {0} is not a boundary facet of the mesh")]
    NotBoundaryFacet(usize),
    #[error("boundary selection was built for a different mesh")]
    SelectionMismatch,
    #[error("matrix dimensions do not match: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(String),
    #[error("stiffness matrix is zero: no positive eigenvalue")]
    NoPositiveEigenvalue,
    #[error("factorization broke down at pivot {pivot} (shift {shift})")]
    FactorizationBreakdown { pivot: usize, shift: f64 },
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e}, {context})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        context: String,
    },
    #[error("dense eigendecomposition failed: {0}")]
    Dense(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("oracle table is incomplete: {0}")]
    OracleTable(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Whether the error originates in an eigensolver (as opposed to bad input or IO).
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::NotPositiveDefinite(_)
            | Error::NoPositiveEigenvalue
            | Error::FactorizationBreakdown { .. }
            | Error::NotConverged { .. }
            | Error::Dense(_) => true,
            Error::Context { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
