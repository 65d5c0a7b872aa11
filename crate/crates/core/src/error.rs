use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian: ||A - A^dag|| = {deviation:.3e} (||A|| = {norm:.3e})")]
    NotHermitian { deviation: f64, norm: f64 },

    #[error("density operator trace is {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("density operator has negative eigenvalue {min_eigenvalue:.3e} at t = {t}")]
    NotPositive { min_eigenvalue: f64, t: f64 },

    #[error("zero-dimensional model")]
    ZeroDimension,

    #[error("time grid is not strictly increasing at index {index}")]
    NonMonotoneGrid { index: usize },

    #[error("truncation leakage {population:.3e} in the top Fock levels at t = {t}")]
    Leakage { population: f64, t: f64 },

    #[error(
        "rho' has weight {magnitude:.3e} on the kernel of rho; (rho, rho') is not a consistent pair"
    )]
    InconsistentKernel { magnitude: f64 },

    #[error("derivative map for {what} disagrees with finite differences by {error:.3e} at (t = {t}, g = {g})")]
    InconsistentDerivative { what: String, error: f64, t: f64, g: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("nuisance precondition violated: ||dH/dh|| = {norm:.3e} at t = {t} (g = 0)")]
    NuisancePrecondition { t: f64, norm: f64 },

    #[error("bound curve branches disagree by {mismatch:.3e} at t_c = {t_c}")]
    CurveDiscontinuity { t_c: f64, mismatch: f64 },

    #[error("{0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
