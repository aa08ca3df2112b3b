use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// One entry per violated invariant.
    #[error("invalid scenario:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("left and right gases must share the same number distribution ({left} vs {right})")]
    DistributionMismatch { left: String, right: String },

    /// A quantity normalised by the mean photon number was requested for an
    /// empty gas.
    #[error("{0} is undefined for the vacuum")]
    Vacuum(&'static str),

    #[error(
        "basis dimension {dimension} exceeds the cap of {cap}; reduce the photon or phonon cutoff"
    )]
    DimensionCap { dimension: usize, cap: usize },

    #[error("cutoff {cutoff} too small for {what}: truncated tail mass {tail:.3e} exceeds {tolerance:.1e}")]
    InsufficientCutoff {
        what: String,
        cutoff: usize,
        tail: f64,
        tolerance: f64,
    },

    #[error("Krylov propagation did not converge at t = {time}: residual estimate {residual:.3e}")]
    NonConvergence { time: f64, residual: f64 },

    #[error("ODE integration failed: {0}")]
    Integration(String),

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("state dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
