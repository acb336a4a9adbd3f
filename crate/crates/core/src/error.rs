use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A special function or density was evaluated outside its domain.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular Jacobian after {iterations} iterations (damping exhausted)")]
    SingularJacobian { iterations: usize },

    #[error("non-finite residual at iteration {iteration}")]
    NonFiniteResidual { iteration: usize },

    #[error("M-step failed at EM iteration {iteration}: {source}")]
    MStep {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    /// Sample variance does not exceed the mean, so no mixed-Poisson model applies.
    #[error("sample is not overdispersed (mean {mean:.6}, variance {variance:.6}); mixed-Poisson model inapplicable")]
    Underdispersed { mean: f64, variance: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("goodness-of-fit test: {0}")]
    Gof(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("model file: {0}")]
    ModelFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
