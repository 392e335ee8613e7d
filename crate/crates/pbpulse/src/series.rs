//! Truncated complex power series in the area offset ε around an expansion
//! point A₀, and the composed propagator carried through them.
//!
//! Multiplying the per-pulse series matrices gives every entry of the
//! composed propagator as a Taylor expansion in ε to the requested order,
//! so derivative conditions at A = π and A = 0 come out exact to machine
//! precision at any order, with no symbolic algebra and no finite
//! differences.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase::Phase;

/// Practical cap on the truncation order.
pub const MAX_SERIES_ORDER: usize = 64;

/// A power series Σ c_k ε^k truncated at a fixed order (len = order + 1).
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    c: Vec<Complex64>,
}

impl Series {
    pub fn zero(order: usize) -> Self {
        Series {
            c: vec![Complex64::ZERO; order + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.c.get(k).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    /// k-th derivative at the expansion point: k!·c_k.
    pub fn derivative(&self, k: usize) -> Complex64 {
        let mut factorial = 1.0f64;
        for i in 2..=k {
            factorial *= i as f64;
        }
        self.coeff(k) * factorial
    }

    pub fn conj(&self) -> Series {
        // conjugation of a function of the real variable ε conjugates the
        // coefficients
        Series {
            c: self.c.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, z: Complex64) -> Series {
        Series {
            c: self.c.iter().map(|w| w * z).collect(),
        }
    }

    pub fn add(&self, rhs: &Series) -> Series {
        debug_assert_eq!(self.c.len(), rhs.c.len());
        Series {
            c: self.c.iter().zip(&rhs.c).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, rhs: &Series) -> Series {
        debug_assert_eq!(self.c.len(), rhs.c.len());
        Series {
            c: self.c.iter().zip(&rhs.c).map(|(x, y)| x - y).collect(),
        }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, rhs: &Series) -> Series {
        debug_assert_eq!(self.c.len(), rhs.c.len());
        let n = self.c.len();
        let mut out = vec![Complex64::ZERO; n];
        for (i, x) in self.c.iter().enumerate() {
            if x.norm_sqr() == 0.0 {
                continue;
            }
            for (j, y) in rhs.c.iter().take(n - i).enumerate() {
                out[i + j] += x * y;
            }
        }
        Series { c: out }
    }

    /// Series of cos((A₀ + ε)/2): c_k = (1/2)^k/k!·cos(A₀/2 + kπ/2).
    pub fn half_angle_cos(a0: f64, order: usize) -> Series {
        Self::half_angle(a0, order, false)
    }

    /// Series of sin((A₀ + ε)/2): c_k = (1/2)^k/k!·sin(A₀/2 + kπ/2).
    pub fn half_angle_sin(a0: f64, order: usize) -> Series {
        Self::half_angle(a0, order, true)
    }

    fn half_angle(a0: f64, order: usize, sine: bool) -> Series {
        let half = a0 / 2.0;
        let (s, c) = half.sin_cos();
        // cos(x + kπ/2) cycles {c, −s, −c, s}; sin cycles {s, c, −s, −c}
        let cycle = if sine { [s, c, -s, -c] } else { [c, -s, -c, s] };
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut scale = 1.0f64; // (1/2)^k / k!
        for k in 0..=order {
            if k > 0 {
                scale /= 2.0 * k as f64;
            }
            coeffs.push(Complex64::new(cycle[k % 4] * scale, 0.0));
        }
        Series { c: coeffs }
    }
}

/// Composed propagator entries as truncated series: the Cayley-Klein pair
/// (a, b) of the matrix [[a, b], [−b*, a*]] with each entry a [`Series`].
#[derive(Clone, Debug)]
pub struct SeriesPropagator {
    a: Series,
    b: Series,
}

impl SeriesPropagator {
    /// One phased pulse expanded around area A₀:
    /// a = cos((A₀+ε)/2), b = −i·e^{iφ}·sin((A₀+ε)/2).
    pub fn factor(a0: f64, phase_rad: f64, order: usize) -> Self {
        let a = Series::half_angle_cos(a0, order);
        let b = Series::half_angle_sin(a0, order)
            .scale(Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, phase_rad));
        SeriesPropagator { a, b }
    }

    /// Matrix product `self · rhs` (rhs acts first).
    pub fn compose(&self, rhs: &SeriesPropagator) -> SeriesPropagator {
        SeriesPropagator {
            a: self.a.mul(&rhs.a).sub(&self.b.mul(&rhs.b.conj())),
            b: self.a.mul(&rhs.b).add(&self.b.mul(&rhs.a.conj())),
        }
    }

    /// U₁₁ entry.
    pub fn u11(&self) -> &Series {
        &self.a
    }

    /// U₁₂ entry.
    pub fn u12(&self) -> &Series {
        &self.b
    }
}

/// Expand the composed propagator of a pulse train around area A₀ to the
/// given truncation order (1 ..= [`MAX_SERIES_ORDER`]).
pub fn series_propagator(phases: &[Phase], a0: f64, order: usize) -> Result<SeriesPropagator> {
    let rad: Vec<f64> = phases.iter().map(|p| p.radians()).collect();
    series_propagator_rad(&rad, a0, order)
}

/// Same as [`series_propagator`] with phases in radians.
pub fn series_propagator_rad(
    phases_rad: &[f64],
    a0: f64,
    order: usize,
) -> Result<SeriesPropagator> {
    if phases_rad.is_empty() {
        return Err(Error::EmptySequence);
    }
    if order == 0 || order > MAX_SERIES_ORDER {
        return Err(Error::SeriesOrderCap {
            requested: order,
            cap: MAX_SERIES_ORDER,
        });
    }
    let mut acc = SeriesPropagator::factor(a0, phases_rad[0], order);
    for &phi in &phases_rad[1..] {
        acc = SeriesPropagator::factor(a0, phi, order).compose(&acc);
    }
    Ok(acc)
}
