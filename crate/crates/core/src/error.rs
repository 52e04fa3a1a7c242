use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value violates a type invariant (domain mismatch, bad counts, ...).
    #[error("structural error: {0}")]
    Structural(String),

    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown channel `{name}` at {pos}")]
    UnknownChannel { name: String, pos: usize },

    #[error("malformed interval [{lo}, {hi}] at {pos}")]
    Interval { lo: f64, hi: f64, pos: usize },

    #[error("formula horizon {needed}s exceeds trace end {available}s")]
    Horizon { needed: f64, available: f64 },

    #[error("singular regressor while fitting {structure}")]
    SingularFit { structure: String },

    #[error("simulation diverged at step {step} (t = {time}s)")]
    Divergence { step: usize, time: f64 },

    #[error("execution of `{model}` failed: {reason}; candidate: {candidate}")]
    Execution {
        model: String,
        reason: String,
        candidate: String,
    },

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    /// True for failures raised while running a model, as opposed to bad
    /// configuration or malformed input.
    pub fn is_runtime(&self) -> bool {
        match self {
            Error::Divergence { .. } | Error::Execution { .. } | Error::SingularFit { .. } => true,
            Error::Iteration { source, .. } => source.is_runtime(),
            _ => false,
        }
    }
}
