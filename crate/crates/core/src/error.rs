use thiserror::Error;

/// Errors raised across the crate. Every variant names the module it comes from
/// so that command-line failures can be traced back to the originating step.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("curve: malformed spec: {0}")]
    MalformedSpec(String),
    #[error("curve: degree {0} is below 3")]
    DegreeTooLow(usize),
    #[error("curve: f is not squarefree ({0})")]
    NotSquarefree(String),
    #[error("curve: root refinement did not converge (residual {residual:e})")]
    RootRefinement { residual: f64 },
    #[error("curve: basis index {index} outside 1..={genus}")]
    BasisIndex { index: usize, genus: usize },
    #[error("curve: truncation order {requested} exceeds maximum {max}")]
    OrderTooLarge { requested: usize, max: usize },
    #[error("curve: {0}")]
    Chart(String),
    #[error("periods: {0}")]
    Homology(String),
    #[error("periods: quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("periods: certificate failed: {0}")]
    Certificate(String),
    #[error("abel-jacobi: path passes within clearance of branch point {index} (distance {distance:e})")]
    Clearance { index: usize, distance: f64 },
    #[error("abel-jacobi: {0}")]
    Path(String),
    #[error("jets: anchor mismatch: {0}")]
    AnchorMismatch(String),
    #[error("schiffer: {0}")]
    Schiffer(String),
    #[error("theta: {0}")]
    Theta(String),
    #[error("lattice: {0}")]
    Lattice(String),
    #[error("experiment: {0}")]
    Experiment(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::MalformedSpec(e.to_string())
    }
}
