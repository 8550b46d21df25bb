use thiserror::Error;

/// Errors produced by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "intermediate state {state} is too close to resonance: |E - ħck| = {detuning:e} J is below the floor {floor:e} J"
    )]
    NearResonance { state: usize, detuning: f64, floor: f64 },

    #[error("invalid channel {0}: only channels 1 and 2 exist")]
    InvalidChannel(u8),

    #[error("energy conservation violated: relative mismatch {mismatch:e} exceeds {tolerance:e}")]
    Kinematics { mismatch: f64, tolerance: f64 },

    #[error(
        "quadrature did not converge for {what}: estimate {estimate:e}, error {error:e} after {evaluations} evaluations"
    )]
    NumericalFailure {
        what: String,
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("time step {dt:e} s violates the stability guard; use dt <= {max_dt:e} s")]
    StepSize { dt: f64, max_dt: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
