use thiserror::Error;

/// Errors produced by the exact engines and the CLI drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for finite continued fraction of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("operation not supported for this real-number variant: {0}")]
    UnsupportedVariant(&'static str),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("basis is not unimodular (|det| must be exactly 1)")]
    NotUnimodular,

    #[error("basis is singular")]
    SingularBasis,

    #[error("scale parameter must exceed 1")]
    ScaleDomain,

    #[error("the zero point has no box norm")]
    ZeroPoint,

    #[error("enumeration budget of {budget} exceeded; reduce the scale or raise the budget")]
    BudgetExceeded { budget: usize },

    #[error("rank {wanted} is not reachable within the enumeration budget")]
    RankUnreachable { wanted: usize },

    #[error("no lattice point can reach the front facet (every candidate has first coordinate 0)")]
    NoFrontFacet,

    #[error("the supplied parameter is not a front-facet event")]
    NotAnEvent,

    #[error("lemma hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("empty tail window: no samples with s >= {window_lo}")]
    EmptyTail { window_lo: f64 },

    #[error("minima witnesses changed under refined approximation; trace is not trustworthy")]
    UnstableApproximation,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
