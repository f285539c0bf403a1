use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural hypothesis (e.g. `d < 2 alpha`) is violated.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error(
        "quadrature did not reach tolerance: value {value:e}, error estimate {error:e} \
         after {evaluations} evaluations"
    )]
    Quadrature {
        value: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("eigen-series truncation: {0}")]
    Truncation(String),

    #[error("blow-up estimates disagree under step refinement: {coarse} vs {fine}")]
    StepNonconvergence { coarse: f64, fine: f64 },

    #[error("no blow-up detected before horizon {horizon}")]
    HorizonExhausted { horizon: f64 },

    #[error("covariance factorization failed: {0}")]
    Covariance(String),

    #[error("need at least 2 paths for an error estimate, got {0}")]
    InsufficientPaths(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn hypothesis(msg: impl Into<String>) -> Self {
        Error::Hypothesis(msg.into())
    }

    /// True for failures caused by numerical tolerance rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::Truncation(_)
                | Error::StepNonconvergence { .. }
                | Error::HorizonExhausted { .. }
        )
    }
}
