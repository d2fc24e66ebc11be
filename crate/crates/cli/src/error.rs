use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// missing or malformed input files
    #[error("input error: {0}")]
    Input(String),
    /// a parameter outside its range, or one the data cannot support
    #[error("parameter error: {0}")]
    Parameter(String),
    /// the solver stopped on its budget; the best feasible result was written
    #[error("solver budget exhausted: {0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Parameter(_) => 3,
            CliError::Budget(_) => 4,
        }
    }
}

pub fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

pub fn parameter(e: impl std::fmt::Display) -> CliError {
    CliError::Parameter(e.to_string())
}
