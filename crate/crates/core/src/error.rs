use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot normalize the zero vector")]
    ZeroVector,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate slice: {0}")]
    DegenerateSlice(String),
    #[error("point is indeterminate for the renormalization map")]
    Indeterminate,
    #[error("numerical underflow: |R(X)| = {norm:e} away from the indeterminacy points")]
    NumericalUnderflow { norm: f64 },
    #[error("pole of the one-dimensional map at t = {0}")]
    Pole(num_complex::Complex64),
    #[error("target has an infinite fiber (the collapsing line maps onto it)")]
    InfiniteFiber,
    #[error("root finder did not converge after {iterations} iterations (worst residual {worst_residual:e})")]
    NoConvergence { iterations: usize, worst_residual: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("potential is singular: evaluation point within {0:e} of a support point")]
    Singular(f64),
    #[error("orbit reached the indeterminacy locus at step {step}")]
    IndeterminateOrbit { step: usize },
    #[error("least-squares fit unstable: R^2 = {r_squared}")]
    FitUnstable { slope: f64, r_squared: f64 },
    #[error("inconclusive numerics: {0}")]
    InconclusiveNumerics(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
