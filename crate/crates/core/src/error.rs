use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty point set: cannot project a threshold class onto zero points")]
    EmptyProjection,

    #[error("class is not enumerable over this distribution: {0}")]
    NotEnumerable(String),

    #[error("point {0} does not belong to a finite support")]
    OffSupport(String),

    #[error("distributions are not jointly evaluable: {0}")]
    Incompatible(String),

    #[error("unlabeled target sample too small: have {have}, need at least {need}")]
    UnlabeledTooSmall { have: usize, need: usize },

    #[error("adaptive sampling hit the round cap of {cap} without stopping (|S_P| = {n_p}, |S_Q| = {n_q})")]
    RoundCap { cap: usize, n_p: usize, n_q: usize },

    #[error("not enough usable rows for a slope fit: {usable} usable, need at least 3")]
    TooFewRows { usable: usize },

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
