use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid hypergeometric parameters: {0}")]
    InvalidParams(String),

    #[error("series did not converge within {terms} terms (z = {z})")]
    NonConvergence { terms: usize, z: f64 },

    #[error("singular limit: {0}")]
    SingularLimit(String),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("closed-form coefficient has imaginary residue {residue:e} (relative) at t = {t}")]
    ImaginaryResidue { t: f64, residue: f64 },

    #[error("invalid bath parameters: {0}")]
    InvalidBath(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("negative population {value:e} in p{index}{index} at t = {t}")]
    NegativePopulation { t: f64, index: usize, value: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepFailure { t: f64, h: f64 },

    #[error("threshold is not monotone on the grid: death predicate flips between a = {lo} and a = {hi}")]
    InconclusiveThreshold { lo: f64, hi: f64 },

    #[error("invalid sweep parameters: {0}")]
    SpecError(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Short machine-readable code, used for null cells in sweep output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::NonConvergence { .. } => "non_convergence",
            Error::SingularLimit(_) => "singular_limit",
            Error::QuadratureFailure(_) => "quadrature_failure",
            Error::ImaginaryResidue { .. } => "imaginary_residue",
            Error::InvalidBath(_) => "invalid_bath",
            Error::InvalidState(_) => "invalid_state",
            Error::NegativePopulation { .. } => "negative_population",
            Error::StepFailure { .. } => "step_failure",
            Error::InconclusiveThreshold { .. } => "inconclusive_threshold",
            Error::SpecError(_) => "spec_error",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }
}
