use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("group closure exceeded cap of {cap} elements")]
    NonFiniteGroup { cap: usize },

    #[error("ambiguous normal sign: |<g.nu, nu>| = {0:.3e}")]
    AmbiguousSign(f64),

    #[error("sample set not closed under the group: image of point {0} missing")]
    MissingOrbitPoint(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("inapplicable: {0}")]
    Inapplicable(String),

    #[error("m = {m} too small: 1/(2 m tau_{i}) = {value:.6} is not above 1")]
    MTooSmall { m: usize, i: usize, value: f64 },

    #[error("singular coker map (construction bug): {0}")]
    SingularCokerMap(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("point inside perforation {0}")]
    InsidePerforation(String),

    #[error("refinement error: {0}")]
    Refinement(String),

    #[error("immersion failure: {0}")]
    Immersion(String),

    #[error("mesh integrity: {0}")]
    MeshIntegrity(String),

    #[error("eigensolver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
