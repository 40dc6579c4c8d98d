use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] transfer_core::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 2 for anything caught before computing, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        use transfer_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::InvalidParameter(_) | E::Json(_) | E::UnlabeledTooSmall { .. }) => 2,
            _ => 3,
        }
    }
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
