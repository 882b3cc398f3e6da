use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),
    #[error("equilibrium computation failed: {0}")]
    Equilibrium(String),
    #[error("sweep member(s) failed: {0}")]
    Sweep(String),
    #[error("cannot write outputs: {0}")]
    Output(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::ChecksFailed(_) => 4,
            CliError::Eigen(_) => 5,
            CliError::Equilibrium(_) => 6,
            CliError::Sweep(_) => 7,
            CliError::Output(_) => 1,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
