//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, integration, and the experiment
/// drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or loader rejected a parameter; `field` names it.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams {
        field: &'static str,
        reason: String,
    },

    /// A state or operator has the wrong dimension for the system it is used
    /// with.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// An operation that only exists under two-photon resonance was called
    /// with unequal detunings.
    #[error(
        "two-photon resonance required: delta1 = {delta1} 1/ns and delta2 = {delta2} 1/ns differ"
    )]
    ResonanceViolated { delta1: f64, delta2: f64 },

    /// The integrator could not proceed; `t` is the time of failure in ns.
    #[error("integration failed at t = {t} ns: {reason}")]
    Integration { t: f64, reason: String },

    /// The precondition of a scaling-invariance check does not hold.
    #[error("scaling precondition violated: {0}")]
    ScalingCondition(String),

    /// A dense linear-algebra primitive failed.
    #[error("linear algebra failure: {0}")]
    Linalg(String),

    /// A grid or search domain was empty.
    #[error("empty domain: {0}")]
    EmptyDomain(&'static str),

    /// Wraps a failure with the scenario it occurred in.
    #[error("scenario `{id}`: {source}")]
    Scenario {
        id: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach a scenario id to an error bubbling out of a scenario run.
    pub fn in_scenario(self, id: impl Into<String>) -> Self {
        Error::Scenario {
            id: id.into(),
            source: Box::new(self),
        }
    }

    /// True when the error (or the error it wraps) is a numerical failure
    /// rather than a configuration problem.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Integration { .. } | Error::Linalg(_) => true,
            Error::Scenario { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
