use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Library(#[from] symwalk::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 3 for a tripped resource guard, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(symwalk::Error::ResourceGuard { .. }) => 3,
            _ => 2,
        }
    }
}
