//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by sequence generation, composition, scanning, solving and
/// time-domain integration.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("pulse area must be finite, got {0}")]
    NonFiniteArea(f64),

    #[error("phase sequence must not be empty")]
    EmptySequence,

    #[error("pulse count must be an odd positive integer, got {0}")]
    InvalidPulseCount(i64),

    #[error("zero denominator in rational phase")]
    ZeroDenominator,

    #[error("invalid scan grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown sequence selector: {0:?}")]
    UnknownSelector(String),

    #[error("sequence file error: {0}")]
    SequenceFile(String),

    #[error("no closed-form profile for sequence kind {0}")]
    NoAnalyticProfile(String),

    #[error("series order {requested} exceeds cap {cap}")]
    SeriesOrderCap { requested: usize, cap: usize },

    #[error("half-maximum crossing not bracketed by the scan grid")]
    HalfMaximumNotBracketed,

    /// Composition produced a probability outside [0, 1] by more than the
    /// clamping tolerance; indicates a composition bug rather than roundoff.
    #[error("internal consistency failure: probability {0} outside [0, 1] beyond 1e-12")]
    ProbabilityOutOfRange(f64),

    #[error("solver did not converge: best residual {residual:.3e} after {iterations} iterations")]
    SolverNotConverged { residual: f64, iterations: usize },

    #[error("integrator did not converge: final-population change {delta:.3e} at {steps_per_pulse} steps per pulse")]
    IntegratorNotConverged { delta: f64, steps_per_pulse: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
