use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimensions of vectors, matrices or sequences disagree.
    #[error("instance shape error: {0}")]
    Shape(String),

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    /// Frame size does not divide the horizon.
    #[error("frame size {frame} does not divide horizon {horizon}")]
    FrameSize { frame: usize, horizon: usize },

    /// A parameter lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible set: {0}")]
    Infeasible(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    /// Overflow or underflow in a numeric update, with the offending coordinate.
    #[error("numeric error at coordinate {coordinate}: {message}")]
    Numeric { coordinate: usize, message: String },

    #[error("episode exhausted: round {round} requested but horizon is {horizon}")]
    EpisodeExhausted { round: usize, horizon: usize },

    /// An online policy emitted an action outside the action set during a game.
    #[error("policy violated the action set at round {round}: {detail}")]
    GameViolation { round: usize, detail: String },

    #[error("parse error in {file} at row {row}, column {column}: {message}")]
    Parse {
        file: String,
        row: usize,
        column: String,
        message: String,
    },

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFinite {
            context: context.into(),
        }
    }
}
