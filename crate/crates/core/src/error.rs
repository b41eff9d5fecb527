use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("memory event count is zero; supply an explicit ratio instead")]
    DivisionByZero,

    #[error("kernel `{kernel}` has no ratio and no memory events to compute one from")]
    MissingRatio { kernel: String },

    #[error(
        "kernel `{kernel}` cannot run: one block needs {demand} {resource}, SM limit is {limit}"
    )]
    InfeasibleKernel {
        kernel: String,
        resource: &'static str,
        demand: u64,
        limit: u64,
    },

    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },
}

impl ModelError {
    pub(crate) fn invalid(field: &str, reason: &str) -> Self {
        ModelError::Validation {
            field: field.to_owned(),
            reason: reason.to_owned(),
        }
    }

    pub(crate) fn invalid_kernel(kernel: &str, field: &str, reason: &str) -> Self {
        ModelError::Validation {
            field: format!("{kernel}.{field}"),
            reason: reason.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("order names unknown kernel `{0}`")]
    UnknownKernel(String),

    #[error("order is not a permutation of the kernel set: {0}")]
    MismatchedKernelSet(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExploreError {
    #[error(transparent)]
    Sim(#[from] SimError),

    #[error("{count} kernels exceed the permutation cap of {max}")]
    TooManyKernels { count: usize, max: usize },

    #[error("candidate order does not match the swept kernel set: {0}")]
    MismatchedKernelSet(String),

    #[error("sweep result is empty")]
    EmptySweep,
}
