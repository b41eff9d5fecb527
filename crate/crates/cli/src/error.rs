use std::path::PathBuf;

use launch_order::{ExploreError, ModelError, SimError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: parse error at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error in `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("kernel `{kernel}` has neither a ratio nor memory counters")]
    MissingRatio { kernel: String },

    #[error(transparent)]
    Infeasible(ModelError),

    #[error("{count} kernels exceed the exploration limit of {max}")]
    TooManyKernels { count: usize, max: usize },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. }
            | CliError::Validation { .. }
            | CliError::MissingRatio { .. } => 2,
            CliError::Infeasible(_) => 3,
            CliError::TooManyKernels { .. } => 4,
            CliError::Io { .. } | CliError::Other(_) => 1,
        }
    }

    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Validation { field, reason } => CliError::Validation { field, reason },
            ModelError::MissingRatio { kernel } => CliError::MissingRatio { kernel },
            ModelError::DivisionByZero => {
                CliError::validation("mem_events", "zero; supply an explicit ratio")
            }
            infeasible @ ModelError::InfeasibleKernel { .. } => CliError::Infeasible(infeasible),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Model(m) => m.into(),
            SimError::UnknownKernel(name) => {
                CliError::validation("order", format!("unknown kernel `{name}`"))
            }
            SimError::MismatchedKernelSet(why) => CliError::validation("order", why),
        }
    }
}

impl From<ExploreError> for CliError {
    fn from(e: ExploreError) -> Self {
        match e {
            ExploreError::Sim(s) => s.into(),
            ExploreError::TooManyKernels { count, max } => CliError::TooManyKernels { count, max },
            ExploreError::MismatchedKernelSet(why) => CliError::validation("order", why),
            ExploreError::EmptySweep => CliError::Other("nothing to explore".into()),
        }
    }
}
