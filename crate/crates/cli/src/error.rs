use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] carvesim::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    /// Message without the category prefix.
    pub fn detail(&self) -> String {
        match self {
            CliError::Config(m) | CliError::Output(m) => m.clone(),
            other => other.to_string(),
        }
    }

    /// Process exit status: 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Sim(e) if is_input_error(e) => 2,
            _ => 1,
        }
    }
}

fn is_input_error(e: &carvesim::Error) -> bool {
    use carvesim::Error::*;
    matches!(
        e,
        InvalidParams(_) | UnknownDetector(..) | RegisterCap { .. } | TooFewNodes(_) | Sweep(_)
    )
}
