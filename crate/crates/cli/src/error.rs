//! CLI error taxonomy and the exit-code contract:
//! 0 success, 2 validation/config/usage failure, 3 infeasible game,
//! 4 numerical nonconvergence.

use covertd2d::analytics::AnalyticsError;
use covertd2d::game::GameError;
use covertd2d::quad::QuadError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// Analytic vs Monte Carlo consistency check failed.
    ValidationFailed { failures: usize, total: usize },
    Infeasible(String),
    NonConvergence(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::ValidationFailed { .. } => 2,
            CliError::Infeasible(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::ValidationFailed { failures, total } => {
                write!(f, "validation failed: {failures} of {total} points outside tolerance")
            }
            CliError::Infeasible(m) => write!(f, "{m}"),
            CliError::NonConvergence(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        match &e {
            GameError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            GameError::Bracketing { .. } => CliError::NonConvergence(e.to_string()),
            GameError::Analytics(AnalyticsError::Quadrature(QuadError::NonConvergence { .. })) => {
                CliError::NonConvergence(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        match &e {
            AnalyticsError::Quadrature(QuadError::NonConvergence { .. }) => {
                CliError::NonConvergence(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}
