//! Pulse phases as exact rational multiples of π.
//!
//! Every phase in the analytic sequence families is a rational multiple of π,
//! so phases are stored as reduced `Ratio<i64>` in units of π with the radian
//! value cached at construction. Canonicalization folds a phase into [0, 2π)
//! by exact arithmetic (mod 2 in units of π).

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg};

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A phase φ = (num/den)·π, reduced to lowest terms with positive denominator.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(into = "PhaseRepr", try_from = "PhaseRepr")]
pub struct Phase {
    ratio: Rational64,
    radians: f64,
}

/// Wire form used by the sequence JSON schema: `{"num": i64, "den": i64}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct PhaseRepr {
    num: i64,
    den: i64,
}

impl From<Phase> for PhaseRepr {
    fn from(p: Phase) -> Self {
        PhaseRepr {
            num: *p.ratio.numer(),
            den: *p.ratio.denom(),
        }
    }
}

impl TryFrom<PhaseRepr> for Phase {
    type Error = Error;
    fn try_from(r: PhaseRepr) -> Result<Self> {
        Phase::new(r.num, r.den)
    }
}

impl Phase {
    /// Phase (num/den)·π. Errors on a zero denominator.
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::from_ratio(Rational64::new(num, den)))
    }

    pub fn from_ratio(ratio: Rational64) -> Self {
        let radians = ratio.to_f64().expect("i64 ratio converts to f64") * PI;
        Phase { ratio, radians }
    }

    pub fn zero() -> Self {
        Self::from_ratio(Rational64::zero())
    }

    /// The exact value in units of π.
    pub fn ratio(&self) -> Rational64 {
        self.ratio
    }

    /// Cached floating-point value in radians.
    pub fn radians(&self) -> f64 {
        self.radians
    }

    /// Folded into [0, 2π) by exact rational arithmetic.
    pub fn canonicalized(&self) -> Phase {
        let two = Rational64::from_integer(2);
        let mut r = self.ratio % two;
        if r.is_negative() {
            r += two;
        }
        Self::from_ratio(r)
    }

    pub fn is_canonical(&self) -> bool {
        let r = self.ratio;
        !r.is_negative() && r < Rational64::from_integer(2)
    }

    /// Best rational approximation of `rad`/π with denominator ≤ `max_den`,
    /// by continued-fraction convergents. Used to encode numerically solved
    /// phases in the exact-rational sequence schema.
    pub fn approx_from_radians(rad: f64, max_den: i64) -> Result<Self> {
        if !rad.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite phase {rad}")));
        }
        let x = rad / PI;
        let mut a = x.floor();
        let (mut h0, mut h1) = (1i64, a as i64);
        let (mut k0, mut k1) = (0i64, 1i64);
        let mut frac = x - a;
        while frac.abs() > 1e-15 {
            let inv = 1.0 / frac;
            a = inv.floor();
            frac = inv - a;
            let ai = a as i64;
            let h2 = ai.checked_mul(h1).and_then(|v| v.checked_add(h0));
            let k2 = ai.checked_mul(k1).and_then(|v| v.checked_add(k0));
            match (h2, k2) {
                (Some(h2), Some(k2)) if k2 <= max_den => {
                    h0 = h1;
                    h1 = h2;
                    k0 = k1;
                    k1 = k2;
                }
                _ => break,
            }
        }
        Phase::new(h1, k1)
    }
}

impl Add for Phase {
    type Output = Phase;
    fn add(self, rhs: Phase) -> Phase {
        Self::from_ratio(self.ratio + rhs.ratio)
    }
}

impl Neg for Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        Self::from_ratio(-self.ratio)
    }
}

impl PartialEq for Phase {
    fn eq(&self, other: &Self) -> bool {
        self.ratio == other.ratio
    }
}

impl Eq for Phase {}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (self.ratio.numer(), self.ratio.denom());
        if *n == 0 {
            write!(f, "0")
        } else if *d == 1 {
            write!(f, "{n}π")
        } else {
            write!(f, "{n}π/{d}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_to_lowest_terms() {
        let p = Phase::new(4, 6).unwrap();
        assert_eq!(p.ratio(), Rational64::new(2, 3));
        assert!((p.radians() - 2.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(Phase::new(1, 0), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn canonicalization() {
        // -2π/3 → 4π/3
        let p = Phase::new(-2, 3).unwrap().canonicalized();
        assert_eq!(p.ratio(), Rational64::new(4, 3));
        // 0 → 0
        assert_eq!(Phase::zero().canonicalized().ratio(), Rational64::zero());
        // 22π/15 already canonical
        let q = Phase::new(22, 15).unwrap();
        assert_eq!(q.canonicalized(), q);
        // 7π/2 → 3π/2
        let r = Phase::new(7, 2).unwrap().canonicalized();
        assert_eq!(r.ratio(), Rational64::new(3, 2));
        assert!(r.is_canonical());
    }

    #[test]
    fn float_matches_exact() {
        for (n, d) in [(1i64, 3i64), (-5, 7), (11, 8), (38, 21), (101, 2)] {
            let p = Phase::new(n, d).unwrap();
            let expect = n as f64 / d as f64 * PI;
            assert!((p.radians() - expect).abs() <= 2.0 * f64::EPSILON * expect.abs().max(1.0));
        }
    }

    #[test]
    fn rational_approximation_round_trips() {
        for rad in [0.0, 1.234567890123, -2.9876543210987, PI * 2.0 / 3.0, 0.05] {
            let p = Phase::approx_from_radians(rad, 1_000_000_000_000).unwrap();
            assert!(
                (p.radians() - rad).abs() < 1e-12,
                "rad={rad} got {}",
                p.radians()
            );
        }
    }

    #[test]
    fn serde_wire_form() {
        let p = Phase::new(22, 15).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"num":22,"den":15}"#);
        let q: Phase = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
