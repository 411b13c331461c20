use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not unitary: |(U^H U - I)[{row}, {col}]| = {deviation:e}")]
    NotUnitary { row: usize, col: usize, deviation: f64 },

    #[error("matrix is not bistochastic: {0}")]
    NotBistochastic(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("amplitude vector is not normalised: |sum |A|^2 - 1| = {0:e}")]
    NotNormalized(f64),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid rate matrix: {0}")]
    InvalidRateMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "refusing to evolve to t = {0}: a stochastic map other than a permutation has no \
         stochastic inverse, so master-equation evolution only runs forward"
    )]
    BackwardTime(f64),

    #[error(
        "step size underflow at t = {t} (h = {h:e}); the phases are too stiff for the \
         requested accuracy, use a smaller coupling or a shorter horizon"
    )]
    StepUnderflow { t: f64, h: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("invalid process: {0}")]
    InvalidProcess(String),

    #[error("probability vector is not a product state: {0}")]
    NotProductState(String),
}

impl Error {
    /// Stable machine-readable code for reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotUnitary { .. } => "not_unitary",
            Error::NotBistochastic(_) => "not_bistochastic",
            Error::InvalidProbability(_) => "invalid_probability",
            Error::NotNormalized(_) => "not_normalized",
            Error::InvalidSystem(_) => "invalid_system",
            Error::InvalidRateMatrix(_) => "invalid_rate_matrix",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::BackwardTime(_) => "backward_time",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::NoConvergence(_) => "no_convergence",
            Error::InvalidProcess(_) => "invalid_process",
            Error::NotProductState(_) => "not_product_state",
        }
    }

    /// True for failures of a numerical method on valid input, as opposed to
    /// rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::StepUnderflow { .. } | Error::NoConvergence(_))
    }
}
