//! Command implementations behind the `surplus-id` binary. Each command
//! validates its input, calls the library, and renders a JSON report; the
//! binary only parses flags and maps [`Outcome`]s and [`CliError`]s to
//! stdout, stderr and exit codes.

use std::path::PathBuf;

pub mod commands;
pub mod format;
pub mod geometry;
pub mod report;

pub use commands::{cmd_check, cmd_geometry, cmd_identify, cmd_simulate, cmd_solve, EntropyChoice, Outcome};

/// Exit codes shared by all subcommands.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const NEGATIVE: i32 = 1;
    pub const INPUT_ERROR: i32 = 2;
    pub const NUMERICAL_FAILURE: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] surplus_id::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use surplus_id::Error as E;
        match self {
            CliError::Domain(E::NoConvergence { .. } | E::PivotLimit { .. } | E::Internal(_) | E::NormalizationDegenerate { .. }) => {
                exit::NUMERICAL_FAILURE
            }
            CliError::Domain(E::DegenerateSample { .. }) => exit::NEGATIVE,
            _ => exit::INPUT_ERROR,
        }
    }

    pub fn kind(&self) -> &'static str {
        use surplus_id::Error as E;
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Invalid { .. } => "invalid-input",
            CliError::Usage(_) => "usage",
            CliError::Domain(e) => match e {
                E::BoundaryPoint { .. } => "boundary-point",
                E::KinkPoint { .. } => "kink-point",
                E::RayUndefined => "barycenter",
                E::NoConvergence { .. } => "no-convergence",
                E::DegenerateSample { .. } => "degenerate-sample",
                E::PivotLimit { .. } | E::Internal(_) | E::NormalizationDegenerate { .. } => "numerical-failure",
                _ => "invalid-input",
            },
        }
    }

    /// Offending cell, when the error names one.
    pub fn cell(&self) -> Option<[usize; 2]> {
        use surplus_id::Error as E;
        match self {
            CliError::Domain(
                E::BoundaryPoint { x, y, .. } | E::KinkPoint { x, y, .. } | E::NegativeEntry { x, y, .. } | E::NonFinite { x, y },
            ) => Some([*x, *y]),
            _ => None,
        }
    }

    pub fn hint(&self) -> Option<&'static str> {
        use surplus_id::Error as E;
        match self {
            CliError::Domain(E::BoundaryPoint { .. } | E::DegenerateSample { .. }) => {
                Some("the matching has empty cells; draw more households or use --entropy gauge")
            }
            CliError::Domain(E::RayUndefined) => Some("the barycenter p⊗q is never rationalizable"),
            _ => None,
        }
    }
}
