use thiserror::Error;

/// Errors raised by the numerical pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("ray from ({x:.6}, {y:.6}) found no wall intersection")]
    NoIntersection { x: f64, y: f64 },

    #[error("piston not reached within {steps} reflections")]
    StepBudget { steps: usize },

    #[error("divergent quantity: {0}")]
    Divergent(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("input is not sorted ascending at index {0}")]
    Unsorted(usize),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("configuration error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used in error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::Domain(_) => "domain",
            Error::Empty(_) => "empty",
            Error::NoIntersection { .. } => "no_intersection",
            Error::StepBudget { .. } => "step_budget",
            Error::Divergent(_) => "divergent",
            Error::Degenerate(_) => "degenerate",
            Error::Unsorted(_) => "unsorted",
            Error::Numeric(_) => "numeric",
            Error::Config(_) => "config",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidParams(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
