use thiserror::Error;

/// Every failure the library can report.
///
/// Variants map one-to-one onto the failure classes the CLI turns into exit
/// codes (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("operator is not Hermitian (max |A - A^dag| = {deviation:e})")]
    Hermiticity { deviation: f64 },

    #[error("not a density matrix: {0}")]
    State(String),

    #[error("invalid spectrum: {0}")]
    Spectrum(String),

    #[error("{n_sites} sites cannot be split into blocks of {k}")]
    Divisibility { n_sites: usize, k: usize },

    #[error("terms in a group do not commute (max |[a, b]| = {deviation:e})")]
    Grouping { deviation: f64 },

    #[error("target state not reached within {tol:e} over [0, {duration}] (closest approach {closest:e})")]
    NoPassage { tol: f64, duration: f64, closest: f64 },

    #[error("both energy budgets are zero")]
    Budget,

    #[error("constraint saturation failed: {0}")]
    Saturation(String),

    #[error("unfair comparison: parallel work {parallel} vs collective work {collective}")]
    Fairness { parallel: f64, collective: f64 },

    #[error("numerical check failed: {0}")]
    Numerics(String),

    #[error("work fraction q = {0} outside (0, 1]")]
    Fraction(f64),

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status used by the `qbattery` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 2,
            Error::Fairness { .. } => 4,
            _ => 3,
        }
    }
}
