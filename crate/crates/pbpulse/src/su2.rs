//! Resonant two-state propagators and their phased compositions.
//!
//! A resonant pulse of area A has the Cayley-Klein pair a = cos(A/2),
//! b = −i·sin(A/2); a constant drive phase φ multiplies the off-diagonal
//! entry by e^{iφ}. The full matrix is
//!
//! ```text
//!   [ a        b·e^{iφ} ]
//!   [ −b*e^{−iφ}   a*   ]
//! ```
//!
//! and a pulse train composes by matrix product with the first pulse as the
//! rightmost factor. The upper-right squared magnitude |U₁₂|² is the
//! population-inversion probability from the ground state.

use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase::Phase;

/// Tolerance inside which probabilities are clamped onto [0, 1]; anything
/// further out is treated as a composition bug, not roundoff.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

/// Pulse area in radians (time integral of the Rabi frequency).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseArea(f64);

impl PulseArea {
    pub fn new(radians: f64) -> Result<Self> {
        if radians.is_finite() {
            Ok(PulseArea(radians))
        } else {
            Err(Error::NonFiniteArea(radians))
        }
    }

    pub fn from_pi_units(x: f64) -> Result<Self> {
        Self::new(x * std::f64::consts::PI)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn over_pi(self) -> f64 {
        self.0 / std::f64::consts::PI
    }
}

/// SU(2) propagator in Cayley-Klein form [[a, b], [−b*, a*]].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2Propagator {
    a: Complex64,
    b: Complex64,
}

impl Su2Propagator {
    pub fn identity() -> Self {
        Su2Propagator {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// Propagator of a single resonant pulse: a = cos(A/2), b = −i·sin(A/2).
    pub fn resonant(area: PulseArea) -> Self {
        let half = area.radians() / 2.0;
        Su2Propagator {
            a: Complex64::new(half.cos(), 0.0),
            b: Complex64::new(0.0, -half.sin()),
        }
    }

    /// Construct directly from a Cayley-Klein pair (used by the integrator).
    pub fn from_cayley_klein(a: Complex64, b: Complex64) -> Self {
        Su2Propagator { a, b }
    }

    /// Apply a constant drive phase: b → b·e^{iφ}, diagonal unchanged.
    pub fn phased(self, phase: Phase) -> Self {
        self.phased_rad(phase.radians())
    }

    pub fn phased_rad(self, radians: f64) -> Self {
        Su2Propagator {
            a: self.a,
            b: self.b * Complex64::from_polar(1.0, radians),
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn u11(&self) -> Complex64 {
        self.a
    }

    pub fn u12(&self) -> Complex64 {
        self.b
    }

    pub fn u21(&self) -> Complex64 {
        -self.b.conj()
    }

    pub fn u22(&self) -> Complex64 {
        self.a.conj()
    }

    /// det = |a|² + |b|² for this matrix form; equals 1 for a unitary.
    pub fn determinant(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }

    /// |(|a|² + |b|²) − 1|.
    pub fn unitarity_defect(&self) -> f64 {
        (self.determinant() - 1.0).abs()
    }

    /// Population-inversion probability |U₁₂|², clamped onto [0, 1] only
    /// within [`PROBABILITY_CLAMP`]; larger excursions are an internal
    /// consistency error.
    pub fn transition_probability(&self) -> Result<f64> {
        let p = self.b.norm_sqr();
        if (0.0..=1.0).contains(&p) {
            Ok(p)
        } else if p > 1.0 && p - 1.0 <= PROBABILITY_CLAMP {
            Ok(1.0)
        } else if p < 0.0 && -p <= PROBABILITY_CLAMP {
            Ok(0.0)
        } else {
            Err(Error::ProbabilityOutOfRange(p))
        }
    }
}

impl Mul for Su2Propagator {
    type Output = Su2Propagator;

    /// Matrix product `self · rhs` (rhs acts first).
    fn mul(self, rhs: Su2Propagator) -> Su2Propagator {
        Su2Propagator {
            a: self.a * rhs.a - self.b * rhs.b.conj(),
            b: self.a * rhs.b + self.b * rhs.a.conj(),
        }
    }
}

/// Compose a train of identical-area pulses with the given phases, first
/// phase applied first (rightmost factor): U = U(φ_N)···U(φ₂)U(φ₁).
pub fn compose_sequence(area: PulseArea, phases: &[Phase]) -> Result<Su2Propagator> {
    let rad: Vec<f64> = phases.iter().map(|p| p.radians()).collect();
    compose_sequence_rad(area, &rad)
}

/// Same as [`compose_sequence`] with phases given in radians; this is the
/// path the numerical solver drives.
pub fn compose_sequence_rad(area: PulseArea, phases_rad: &[f64]) -> Result<Su2Propagator> {
    if phases_rad.is_empty() {
        return Err(Error::EmptySequence);
    }
    let base = Su2Propagator::resonant(area);
    let mut acc = base.phased_rad(phases_rad[0]);
    for &phi in &phases_rad[1..] {
        acc = base.phased_rad(phi) * acc;
    }
    Ok(acc)
}
