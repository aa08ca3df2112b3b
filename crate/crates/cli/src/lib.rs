//! Scenario runs, sweeps, figure presets and the validation suite behind
//! the `piston` binary.

pub mod checks;
pub mod presets;
pub mod report;
pub mod run;
pub mod svg;
pub mod sweep;
pub mod table;

/// Raised when the validation suite has failing checks.
#[derive(Debug)]
pub struct ValidationFailed(pub Vec<String>);

impl std::fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "validation failed: {}", self.0.join("; "))
    }
}

impl std::error::Error for ValidationFailed {}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Process exit code for an error chain.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<ValidationFailed>().is_some() {
            return EXIT_VALIDATION;
        }
        if let Some(piston_core::Error::DimensionCap { .. }) = cause.downcast_ref() {
            return EXIT_RESOURCE;
        }
    }
    EXIT_CONFIG
}
