use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported order alpha = {0}")]
    UnsupportedOrder(f64),

    #[error("moment of order {order} diverges for {what}")]
    DivergentMoment { order: f64, what: String },

    #[error("moment generating function diverges for {0}")]
    MgfDiverges(String),

    #[error("lattice too large: {0}")]
    Overflow(String),

    #[error("parse error at position {pos} near `{token}`: {msg}")]
    Parse { pos: usize, token: String, msg: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error(transparent)]
    Optim(#[from] crate::optim::OptimError),

    #[error("input is empty")]
    EmptyInput,

    #[error("x = {0} is not a support point")]
    XNotInSupport(f64),

    #[error("tail function is not non-increasing and non-negative near t = {0}")]
    BadTail(f64),

    #[error("laws are not ordered by survival: margin {margin:e} at t = {t}")]
    NotStochOrdered { t: f64, margin: f64 },

    #[error("mean sign precondition violated: E[T] = {mean_t}, E[W] = {mean_w}")]
    MeanSignError { mean_t: f64, mean_w: f64 },

    #[error("lattice step {step} too coarse: variance {discretized} vs {exact}")]
    StepTooCoarse { step: f64, discretized: f64, exact: f64 },

    #[error("strategy tree has {0} paths, above the enumeration limit")]
    TreeTooLarge(u64),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
