use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building charts, splits or fibers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("state left the validity ball: |u - u_star| = {distance:.3e} > {radius:.3e}")]
    DomainViolation { distance: f64, radius: f64 },

    #[error("point is not an equilibrium: residual {residual:.3e} exceeds {tolerance:.1e}")]
    NotEquilibrium { residual: f64, tolerance: f64 },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("problem `{problem}` has no parameter `{name}`")]
    UnknownParameter { problem: String, name: String },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("eigenvalue {re:.3e}{im:+.3e}i lies in the ambiguous band around the imaginary axis")]
    AmbiguousClustering { re: f64, im: f64 },

    #[error("nonzero spectrum on the imaginary axis: {re:.3e}{im:+.3e}i")]
    ImaginarySpectrum { re: f64, im: f64 },

    #[error("normal hyperbolicity fails: {0}")]
    NotNormallyHyperbolic(String),

    #[error("{component} component is not in its spectral subspace (off by {deviation:.3e})")]
    NotInSubspace {
        component: &'static str,
        deviation: f64,
    },

    #[error("Newton iteration for {what} did not converge: residual {residual:.3e} after {iterations} iterations")]
    NewtonFailed {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("tail budget {budget:.3e} exceeds the allowance {allowance:.3e}; extend the grid")]
    TailBound { budget: f64, allowance: f64 },

    #[error("fixed-point iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("iterate left the ball of radius {radius:.3e} (norm {norm:.3e})")]
    LeftBall { norm: f64, radius: f64 },

    #[error("the unstable subspace is empty")]
    EmptyUnstable,

    #[error("no decay observed inside the fitting window")]
    EmptyWindow,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
