//! Composite-pulse toolkit for resonant two-state systems.
//!
//! What lives here:
//!
//! - [`sequence`]: closed-form broadband (B), narrowband (N) and nested
//!   passband N(B) / B(N) phase sequences as exact rational multiples of π,
//!   plus the sequence JSON interchange format.
//! - [`su2`]: SU(2) propagators of phased resonant pulses and their
//!   composition; |U₁₂|² is the population-inversion probability.
//! - [`profile`]: inversion profiles versus pulse area: brute-force
//!   matrix-product scans, closed forms, half-widths, steepness, and
//!   fidelity bands against an error threshold.
//! - [`series`] and [`solver`]: truncated power-series expansion of the
//!   composed propagator for exact derivative extraction at A = π and
//!   A = 0, verification of the flatness conditions, and a least-squares
//!   solver for the phases.
//! - [`timesim`]: time-domain Schrödinger integration of shaped, phased
//!   pulse trains with temporal overlap and amplitude error.
//!
//! All values are immutable and all operations are pure, so everything can
//! be driven from parallel scan workers; grid scans parallelize internally
//! via rayon with ordered collection (results do not depend on the worker
//! count, which can be pinned with `RAYON_NUM_THREADS`).

pub mod error;
pub mod phase;
pub mod profile;
pub mod sequence;
pub mod series;
pub mod solver;
pub mod su2;
pub mod timesim;

pub use error::{Error, Result};
pub use phase::Phase;
pub use profile::{
    analytic_bb, analytic_nb, analytic_pb, fidelity_bands, hwhm_asymptotic, hwhm_exact,
    scan_analytic, scan_matrix, steepness_asymptotic, steepness_exact, AreaGrid, PbKind,
    ProfileMetrics, ProfileScan, ScanSource,
};
pub use sequence::{
    broadband_phases, canonicalize, narrowband_phases, nest_bn, nest_nb, parse_selector,
    single_pulse, wimperis_pb2, PhaseList, SequenceKind,
};
pub use series::{series_propagator, series_propagator_rad, Series, SeriesPropagator};
pub use solver::{
    check_pb_conditions, check_pb_conditions_rad, solve_pb, solve_pb_multistart, ConditionReport,
    SolveConfig, SolveOutcome, SolveReport, SolveSeed,
};
pub use su2::{compose_sequence, compose_sequence_rad, PulseArea, Su2Propagator};
pub use timesim::{
    evolution_trace_pair, final_population, integrate, overlap_csv, overlap_scan, EvolutionTrace,
    PulseShape, PulseTrainSpec,
};
