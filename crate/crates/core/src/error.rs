use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The adaptive integrator could not continue (step-size underflow or non-finite state).
    #[error("integration failed at t = {t}: {reason} (last state {state:?})")]
    Integration {
        t: f64,
        state: [f64; 2],
        reason: String,
    },

    #[error("no semi-wave for c = {c}: {reason}")]
    NoSemiWave { c: f64, reason: String },

    #[error("no compact-support wave for c = {c}, mu = {mu}: {reason}")]
    NoCompactWave { c: f64, mu: f64, reason: String },

    #[error("no positive elliptic profile for drift {drift}, half-length {half_length}: {reason}")]
    NoEllipticProfile {
        drift: f64,
        half_length: f64,
        reason: String,
    },

    /// A bracketed root search saw no sign change on the scanned interval.
    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),

    #[error("invalid initial data: {}", .0.join("; "))]
    InvalidData(Vec<String>),

    #[error("step failure at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("insufficient samples: need at least {needed}, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("trace ended with {found}, expected {expected}")]
    WrongTerminalEvent {
        expected: &'static str,
        found: String,
    },

    #[error("classification requires the logistic nonlinearity")]
    NotLogistic,

    #[error("sigma range error: {0}")]
    Range(String),

    /// Verdicts along sigma are out of order; contradicts the comparison principle.
    #[error("non-monotone verdicts: spreading at sigma = {spreading} below vanishing at sigma = {vanishing}")]
    NonMonotone { spreading: f64, vanishing: f64 },

    /// A run carried a spreading certificate and later collapsed.
    #[error("solver inconsistency: {0}")]
    Inconsistent(String),

    #[error("convergence study: {0}")]
    Convergence(String),
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite".into(),
        })
    }
}
