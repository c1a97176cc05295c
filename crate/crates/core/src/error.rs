use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate rates: r21 = {r21} and r' = {r_prime} coincide; the closed form is singular")]
    DegenerateRates { r21: f64, r_prime: f64 },

    #[error("rate matrix has complex eigenvalues (discriminant {discriminant:e})")]
    ComplexEigenvalues { discriminant: f64 },

    #[error("eigenvalues lambda1 = {lambda1} and lambda2 = {lambda2} are degenerate")]
    DegenerateEigenvalues { lambda1: f64, lambda2: f64 },

    #[error("degenerate steady state: {0}")]
    DegenerateSteadyState(String),

    #[error("no de-shelving path out of level 3 (r31 + r32 = 0)")]
    NoDeshelving,

    #[error("integration step size underflow at t = {t} ns (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parameters not identifiable; degenerate directions: {}", .directions.join(", "))]
    NonIdentifiable { directions: Vec<String> },

    #[error("fit did not converge after {iterations} iterations (chi-square {chi_square:e})")]
    NotConverged { iterations: usize, chi_square: f64 },

    #[error("fitted lambda1 = {lambda1} does not exceed lambda2 = {lambda2}")]
    LambdaOrdering { lambda1: f64, lambda2: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures caused by bad input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::InvalidGrid(_)
                | Error::InvalidConfig(_)
                | Error::Parse { .. }
                | Error::Io(_)
                | Error::InsufficientData(_)
                | Error::DegenerateRates { .. }
                | Error::NoDeshelving
                | Error::DegenerateSteadyState(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
