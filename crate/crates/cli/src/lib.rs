//! Experiment runner behind the `zoo-opt` binary.
//!
//! Every command reads an optional JSON config, writes a CSV table and a JSON
//! record into the output directory, and maps its outcome to a stable exit
//! code: 0 pass, 1 check failure, 2 usage or config error, 3 budget error.

pub mod commands;
pub mod config;
pub mod record;
pub mod suites;

use thiserror::Error;

pub use commands::{execute, RunOptions};
pub use config::{CheckSpec, Command, ExperimentConfig, FamilySpec};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("budget: {0}")]
    Budget(zoo_opt::Error),
    #[error("{0}")]
    Failed(zoo_opt::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Config(_) | Self::Io(_) => EXIT_USAGE,
            Self::Budget(_) => EXIT_BUDGET,
            Self::Failed(_) => EXIT_CHECK_FAILED,
        }
    }
}

impl From<zoo_opt::Error> for CliError {
    fn from(e: zoo_opt::Error) -> Self {
        use zoo_opt::Error as E;
        match e {
            E::BudgetExhausted { .. } | E::TooSmallBudget(_) => Self::Budget(e),
            E::InvalidParameter(_) | E::NotInClass(_) | E::NotPositiveDefinite(_) => Self::Config(e.to_string()),
            E::NoBracket { .. } | E::NumericalFailure(_) | E::DegenerateFit(_) => Self::Failed(e),
        }
    }
}
