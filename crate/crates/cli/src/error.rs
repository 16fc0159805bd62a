use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error {0}")]
    Config(String),

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("integration blew up after t = {t_last}")]
    BlowUp { t_last: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] liebundle::Error),
}

impl CliError {
    /// 2 config (and i/o), 3 degenerate classification, 4 blow-up. Property
    /// failures (1) are not errors and are reported by the commands.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Core(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::BlowUp { .. } => 4,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}
