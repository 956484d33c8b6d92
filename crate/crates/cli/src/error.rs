use thiserror::Error;

/// Stable exit codes.
pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DIVERGENCE: u8 = 3;
pub const EXIT_HYPOTHESIS: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    Failed(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Lib(#[from] firstorder::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use firstorder::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Failed(_) => EXIT_FAIL,
            CliError::Lib(E::Hypothesis(_)) => EXIT_HYPOTHESIS,
            CliError::Lib(E::Divergence { .. } | E::NoConvergence { .. }) => EXIT_DIVERGENCE,
            CliError::Lib(_) => EXIT_CONFIG,
        }
    }
}
