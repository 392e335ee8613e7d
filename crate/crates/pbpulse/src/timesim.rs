//! Time-domain integration of the resonant two-state Schrödinger equation
//! for shaped, phased pulse trains, including temporal overlap between
//! neighboring pulses and a common amplitude error.
//!
//! The drive is Ω_tot(t) = Σ_k Ω_k(t)·e^{iφ_k} with per-pulse real envelopes
//! Ω_k. Pulse k occupies the slot [k·(T+gap), k·(T+gap)+T]. With overlap
//! fraction f > 0 the in-slot envelope is scaled by (1−f) and two raised-
//! cosine bumps of width T/2 sit immediately outside the slot edges, each
//! carrying area f·A/2, so exactly a fraction f of the pulse area lies
//! outside its nominal slot, split equally between both tails, reaching at
//! most the nearest neighbors. Envelopes add coherently with their own
//! phases.
//!
//! The propagator obeys dU/dt = −(i/2)·[[0, Ω_tot], [Ω_tot*, 0]]·U, which
//! preserves the Cayley-Klein pairing [[a, b], [−b*, a*]]; integration
//! carries just the (a, b) pair with classical RK4 on segments split at the
//! envelope breakpoints, refining the step until the final population moves
//! by less than 1e-10 between successive halvings.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::profile::{AreaGrid, ProfileScan, ScanSource};
use crate::sequence::PhaseList;
use crate::su2::Su2Propagator;

/// Per-pulse envelope shape inside the nominal slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulseShape {
    /// Constant over the slot.
    Rectangular,
    /// Flat top with cos² ramps of length `edge_fraction`·T at both ends
    /// (edge_fraction in (0, 0.5]).
    RaisedCosineEdges { edge_fraction: f64 },
    /// Gaussian centered on the slot, truncated at ±`truncation`·σ with
    /// σ = T/(2·truncation), area-normalized after truncation.
    Gaussian { truncation: f64 },
}

/// A shaped, phased pulse train.
#[derive(Clone, Debug)]
pub struct PulseTrainSpec {
    pub phases: PhaseList,
    pub pulse_duration: f64,
    pub area_per_pulse: f64,
    pub shape: PulseShape,
    pub overlap_fraction: f64,
    pub inter_pulse_gap: f64,
}

/// Maximum supported overlap fraction.
pub const MAX_OVERLAP: f64 = 0.05;

impl PulseTrainSpec {
    pub fn new(
        phases: PhaseList,
        pulse_duration: f64,
        area_per_pulse: f64,
        shape: PulseShape,
        overlap_fraction: f64,
        inter_pulse_gap: f64,
    ) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::EmptySequence);
        }
        if !(pulse_duration.is_finite() && pulse_duration > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pulse duration must be positive, got {pulse_duration}"
            )));
        }
        if !(area_per_pulse.is_finite() && area_per_pulse >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "per-pulse area must be finite and non-negative, got {area_per_pulse}"
            )));
        }
        if !(0.0..=MAX_OVERLAP).contains(&overlap_fraction) {
            return Err(Error::InvalidParameter(format!(
                "overlap fraction must lie in [0, {MAX_OVERLAP}], got {overlap_fraction}"
            )));
        }
        if !(inter_pulse_gap.is_finite() && inter_pulse_gap >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "inter-pulse gap must be non-negative, got {inter_pulse_gap}"
            )));
        }
        match shape {
            PulseShape::RaisedCosineEdges { edge_fraction } => {
                if !(edge_fraction > 0.0 && edge_fraction <= 0.5) {
                    return Err(Error::InvalidParameter(format!(
                        "edge fraction must lie in (0, 0.5], got {edge_fraction}"
                    )));
                }
            }
            PulseShape::Gaussian { truncation } => {
                if !(truncation.is_finite() && truncation > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Gaussian truncation must be positive, got {truncation}"
                    )));
                }
            }
            PulseShape::Rectangular => {}
        }
        Ok(PulseTrainSpec {
            phases,
            pulse_duration,
            area_per_pulse,
            shape,
            overlap_fraction,
            inter_pulse_gap,
        })
    }

    /// Plain rectangular train, unit pulse duration, no overlap or gap.
    pub fn rectangular(phases: PhaseList, area_per_pulse: f64) -> Result<Self> {
        Self::new(
            phases,
            1.0,
            area_per_pulse,
            PulseShape::Rectangular,
            0.0,
            0.0,
        )
    }

    /// Train whose per-pulse area is π·(1−ε) for amplitude error ε.
    pub fn with_amplitude_error(
        phases: PhaseList,
        epsilon: f64,
        shape: PulseShape,
    ) -> Result<Self> {
        Self::new(phases, 1.0, PI * (1.0 - epsilon), shape, 0.0, 0.0)
    }

    /// Fractional deviation of the per-pulse area from π.
    pub fn amplitude_error(&self) -> f64 {
        1.0 - self.area_per_pulse / PI
    }
}

/// Sampled populations along the train plus the final propagator.
#[derive(Clone, Debug)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub populations: Vec<f64>,
    pub final_propagator: Su2Propagator,
    /// Largest observed |(|c₁|² + |c₂|²) − 1| along the trace.
    pub max_norm_defect: f64,
}

impl EvolutionTrace {
    pub fn final_population(&self) -> Result<f64> {
        self.final_propagator.transition_probability()
    }

    /// CSV with header `time_over_T,population` (time in units of the pulse
    /// duration).
    pub fn to_csv(&self, pulse_duration: f64) -> String {
        let mut out = String::with_capacity(self.times.len() * 48 + 32);
        out.push_str("time_over_T,population\n");
        for (t, p) in self.times.iter().zip(&self.populations) {
            out.push_str(&format!("{:.16e},{:.16e}\n", t / pulse_duration, p));
        }
        out
    }
}

/// Precomputed envelope of a train.
struct Envelope {
    phase_factors: Vec<Complex64>,
    t: f64,
    period: f64, // T + gap
    f: f64,
    tail_w: f64,
    shape: PulseShape,
    core_area: f64, // (1−f)·A
    tail_area: f64, // f·A/2 per side
    gauss_sigma: f64,
    gauss_peak: f64,
}

impl Envelope {
    fn new(train: &PulseTrainSpec) -> Envelope {
        let t = train.pulse_duration;
        let f = train.overlap_fraction;
        let core_area = (1.0 - f) * train.area_per_pulse;
        let (gauss_sigma, gauss_peak) = if let PulseShape::Gaussian { truncation } = train.shape {
            let sigma = t / (2.0 * truncation);
            // area of the truncated unit-peak Gaussian over the slot, by
            // composite Simpson; the peak is then scaled to hit core_area
            let n = 1 << 14;
            let h = t / n as f64;
            let g = |x: f64| {
                let u = (x - t / 2.0) / sigma;
                (-0.5 * u * u).exp()
            };
            let mut s = g(0.0) + g(t);
            for i in 1..n {
                s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let integral = s * h / 3.0;
            (sigma, core_area / integral)
        } else {
            (1.0, 0.0)
        };
        Envelope {
            phase_factors: train
                .phases
                .radians()
                .iter()
                .map(|&p| Complex64::from_polar(1.0, p))
                .collect(),
            t,
            period: t + train.inter_pulse_gap,
            f,
            tail_w: t / 2.0,
            shape: train.shape,
            core_area,
            tail_area: f * train.area_per_pulse / 2.0,
            gauss_sigma,
            gauss_peak,
        }
    }

    fn pulse_count(&self) -> usize {
        self.phase_factors.len()
    }

    /// Envelope of pulse k at local slot time u ∈ [0, T].
    fn core_amp(&self, u: f64) -> f64 {
        match self.shape {
            PulseShape::Rectangular => self.core_area / self.t,
            PulseShape::RaisedCosineEdges { edge_fraction } => {
                let ramp = edge_fraction * self.t;
                let h = self.core_area / (self.t - ramp);
                if u < ramp {
                    let s = (PI * u / (2.0 * ramp)).sin();
                    h * s * s
                } else if u > self.t - ramp {
                    let s = (PI * (self.t - u) / (2.0 * ramp)).sin();
                    h * s * s
                } else {
                    h
                }
            }
            PulseShape::Gaussian { .. } => {
                let x = (u - self.t / 2.0) / self.gauss_sigma;
                self.gauss_peak * (-0.5 * x * x).exp()
            }
        }
    }

    /// Raised-cosine tail bump of unit area on [0, w].
    fn bump(&self, u: f64) -> f64 {
        let w = self.tail_w;
        let u = u.clamp(0.0, w);
        (1.0 - (2.0 * PI * u / w).cos()) / w
    }

    /// Total complex drive at time `t`, with piecewise-branch membership
    /// decided at `t_ref` (the RK4 step midpoint) so that a step never
    /// straddles an envelope discontinuity.
    fn drive(&self, t: f64, t_ref: f64) -> Complex64 {
        let w = self.tail_w;
        let k_lo = ((t_ref - self.t - w) / self.period).floor().max(0.0) as usize;
        let k_hi = (((t_ref + w) / self.period).floor() as isize)
            .clamp(0, self.pulse_count() as isize - 1) as usize;
        let mut tot = Complex64::ZERO;
        for k in k_lo..=k_hi {
            let s = k as f64 * self.period;
            let e = s + self.t;
            let mut amp = 0.0;
            if (s..e).contains(&t_ref) {
                amp += self.core_amp(t - s);
            }
            if self.f > 0.0 {
                if (s - w..s).contains(&t_ref) {
                    amp += self.tail_area * self.bump(t - (s - w));
                }
                if (e..e + w).contains(&t_ref) {
                    amp += self.tail_area * self.bump(t - e);
                }
            }
            if amp != 0.0 {
                tot += amp * self.phase_factors[k];
            }
        }
        tot
    }

    /// Times at which the envelope is only piecewise-smooth.
    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        let w = self.tail_w;
        for k in 0..self.pulse_count() {
            let s = k as f64 * self.period;
            let e = s + self.t;
            pts.push(s);
            pts.push(e);
            if self.f > 0.0 {
                pts.push(s - w);
                pts.push(e + w);
            }
            if let PulseShape::RaisedCosineEdges { edge_fraction } = self.shape {
                let ramp = edge_fraction * self.t;
                pts.push(s + ramp);
                pts.push(e - ramp);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * self.t);
        pts
    }

    /// Quadrature of pulse k's full envelope (slot plus tails), piecewise
    /// Simpson between the envelope breakpoints; used by the
    /// area-normalization invariant.
    #[cfg(test)]
    fn pulse_area_quadrature(&self, k: usize, intervals_per_piece: usize) -> f64 {
        let s = k as f64 * self.period;
        let e = s + self.t;
        let w = self.tail_w;
        let mut edges = vec![s, e];
        if self.f > 0.0 {
            edges.insert(0, s - w);
            edges.push(e + w);
        }
        if let PulseShape::RaisedCosineEdges { edge_fraction } = self.shape {
            let ramp = edge_fraction * self.t;
            edges.push(s + ramp);
            edges.push(e - ramp);
            edges.sort_by(f64::total_cmp);
        }
        let amp = |t: f64| {
            let mut a = 0.0;
            if (s..e).contains(&t) {
                a += self.core_amp(t - s);
            }
            if self.f > 0.0 {
                if (s - w..s).contains(&t) {
                    a += self.tail_area * self.bump(t - (s - w));
                }
                if (e..e + w).contains(&t) {
                    a += self.tail_area * self.bump(t - e);
                }
            }
            a
        };
        let n = (intervals_per_piece & !1).max(2);
        let mut total = 0.0;
        for pair in edges.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            if hi - lo <= 0.0 {
                continue;
            }
            let h = (hi - lo) / n as f64;
            // sample strictly inside the open piece at the endpoints so the
            // half-open membership tests pick the right branch
            let shrink = (hi - lo) * 1e-12;
            let mut acc = amp(lo + shrink) + amp(hi - shrink);
            for i in 1..n {
                acc += amp(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            total += acc * h / 3.0;
        }
        total
    }
}

struct RunResult {
    times: Vec<f64>,
    populations: Vec<f64>,
    a: Complex64,
    b: Complex64,
    max_norm_defect: f64,
}

fn run_fixed(env: &Envelope, dt_target: f64, record: bool) -> RunResult {
    let (t_begin, tail) = if env.f > 0.0 {
        (-env.tail_w, env.tail_w)
    } else {
        (0.0, 0.0)
    };
    let t_end = (env.pulse_count() - 1) as f64 * env.period + env.t + tail;
    let mut breaks = env.breakpoints();
    breaks.retain(|&x| x > t_begin && x < t_end);

    let mut a = Complex64::new(1.0, 0.0);
    let mut b = Complex64::ZERO;
    let mut times = Vec::new();
    let mut populations = Vec::new();
    let mut max_defect = 0.0f64;
    if record {
        times.push(t_begin);
        populations.push(b.norm_sqr());
    }

    // dU/dt = −(i/2)[[0, Ω], [Ω*, 0]]·U on the Cayley-Klein pair:
    // a' = (i/2)·Ω·b*, b' = −(i/2)·Ω·a*
    let rhs = |omega: Complex64, a: Complex64, b: Complex64| {
        let half_i = Complex64::new(0.0, 0.5);
        (half_i * omega * b.conj(), -half_i * omega * a.conj())
    };

    let mut edges = Vec::with_capacity(breaks.len() + 2);
    edges.push(t_begin);
    edges.extend_from_slice(&breaks);
    edges.push(t_end);
    for pair in edges.windows(2) {
        let (seg_lo, seg_hi) = (pair[0], pair[1]);
        let len = seg_hi - seg_lo;
        if len <= 1e-15 * env.t {
            continue;
        }
        let nsteps = (len / dt_target).ceil().max(1.0) as usize;
        let dt = len / nsteps as f64;
        for i in 0..nsteps {
            let t0 = seg_lo + i as f64 * dt;
            let tm = t0 + dt / 2.0;
            let t1 = t0 + dt;
            let o0 = env.drive(t0, tm);
            let om = env.drive(tm, tm);
            let o1 = env.drive(t1, tm);
            let (ka1, kb1) = rhs(o0, a, b);
            let (ka2, kb2) = rhs(om, a + ka1 * (dt / 2.0), b + kb1 * (dt / 2.0));
            let (ka3, kb3) = rhs(om, a + ka2 * (dt / 2.0), b + kb2 * (dt / 2.0));
            let (ka4, kb4) = rhs(o1, a + ka3 * dt, b + kb3 * dt);
            a += (ka1 + (ka2 + ka3) * 2.0 + ka4) * (dt / 6.0);
            b += (kb1 + (kb2 + kb3) * 2.0 + kb4) * (dt / 6.0);
            let norm = a.norm_sqr() + b.norm_sqr();
            max_defect = max_defect.max((norm - 1.0).abs());
            if record {
                times.push(t1);
                populations.push(b.norm_sqr().min(1.0));
            }
        }
    }

    RunResult {
        times,
        populations,
        a,
        b,
        max_norm_defect: max_defect,
    }
}

/// Double the resolution until the final population moves by less than
/// 1e-10 between refinements; returns the finest run.
fn converged_run(
    env: &Envelope,
    pulse_duration: f64,
    samples_per_pulse: usize,
    record: bool,
) -> Result<RunResult> {
    if samples_per_pulse < 16 {
        return Err(Error::InvalidParameter(format!(
            "samples_per_pulse must be at least 16, got {samples_per_pulse}"
        )));
    }
    let mut spp = samples_per_pulse;
    let mut prev = run_fixed(env, pulse_duration / spp as f64, record);
    let mut delta = f64::INFINITY;
    for _ in 0..10 {
        spp *= 2;
        let next = run_fixed(env, pulse_duration / spp as f64, record);
        delta = (next.b.norm_sqr() - prev.b.norm_sqr()).abs();
        prev = next;
        if delta < 1e-10 {
            return Ok(prev);
        }
    }
    Err(Error::IntegratorNotConverged {
        delta,
        steps_per_pulse: spp,
    })
}

/// Integrate the train, halving the step until the final population changes
/// by less than 1e-10 between refinements. `samples_per_pulse` sets the
/// initial resolution (at least 16).
pub fn integrate(train: &PulseTrainSpec, samples_per_pulse: usize) -> Result<EvolutionTrace> {
    let env = Envelope::new(train);
    let full = converged_run(&env, train.pulse_duration, samples_per_pulse, true)?;
    Ok(EvolutionTrace {
        times: full.times,
        populations: full.populations,
        final_propagator: Su2Propagator::from_cayley_klein(full.a, full.b),
        max_norm_defect: full.max_norm_defect,
    })
}

/// Final population only (skips trace recording).
pub fn final_population(train: &PulseTrainSpec, samples_per_pulse: usize) -> Result<f64> {
    let env = Envelope::new(train);
    let run = converged_run(&env, train.pulse_duration, samples_per_pulse, false)?;
    Su2Propagator::from_cayley_klein(run.a, run.b).transition_probability()
}

/// One time-domain profile per overlap fraction, on the given area grid.
/// Overlap 0 reproduces strictly non-overlapping pulses.
pub fn overlap_scan(
    ph: &PhaseList,
    overlap_fractions: &[f64],
    grid: &AreaGrid,
    shape: PulseShape,
    samples_per_pulse: usize,
) -> Result<Vec<ProfileScan>> {
    for &f in overlap_fractions {
        if !(0.0..=MAX_OVERLAP).contains(&f) {
            return Err(Error::InvalidParameter(format!(
                "overlap fraction {f} outside [0, {MAX_OVERLAP}]"
            )));
        }
    }
    let areas = grid.areas();
    let mut scans = Vec::with_capacity(overlap_fractions.len());
    for &f in overlap_fractions {
        let probabilities = areas
            .par_iter()
            .map(|&a| {
                let train = PulseTrainSpec::new(ph.clone(), 1.0, a, shape, f, 0.0)?;
                final_population(&train, samples_per_pulse)
            })
            .collect::<Result<Vec<f64>>>()?;
        scans.push(ProfileScan {
            areas: areas.clone(),
            probabilities,
            source: ScanSource::TimeIntegration,
            sequence_label: format!("{} overlap {f}", ph.label),
        });
    }
    Ok(scans)
}

/// CSV for a set of overlap scans: `area_over_pi,probability,overlap_fraction`.
pub fn overlap_csv(overlap_fractions: &[f64], scans: &[ProfileScan]) -> String {
    let mut out = String::from("area_over_pi,probability,overlap_fraction\n");
    for (f, scan) in overlap_fractions.iter().zip(scans) {
        for (a, p) in scan.areas.iter().zip(&scan.probabilities) {
            let p = if *p < 1e-300 { 0.0 } else { *p };
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", a / PI, p, f));
        }
    }
    out
}

/// Traces for per-pulse areas (1−ε)π and επ, the two sides of a common
/// amplitude error ε.
pub fn evolution_trace_pair(
    ph: &PhaseList,
    epsilon: f64,
    shape: PulseShape,
    samples_per_pulse: usize,
) -> Result<(EvolutionTrace, EvolutionTrace)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "amplitude error must lie in (0, 1), got {epsilon}"
        )));
    }
    let high = PulseTrainSpec::new(ph.clone(), 1.0, PI * (1.0 - epsilon), shape, 0.0, 0.0)?;
    let low = PulseTrainSpec::new(ph.clone(), 1.0, PI * epsilon, shape, 0.0, 0.0)?;
    Ok((
        integrate(&high, samples_per_pulse)?,
        integrate(&low, samples_per_pulse)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{nest_nb, single_pulse};
    use crate::su2::{compose_sequence, PulseArea};

    #[test]
    fn single_rectangular_pi_pulse_inverts() {
        let train = PulseTrainSpec::rectangular(single_pulse(), PI).unwrap();
        let trace = integrate(&train, 16).unwrap();
        let p = trace.final_population().unwrap();
        assert!((p - 1.0).abs() < 1e-8, "got {p}");
        assert!(trace.max_norm_defect < 1e-10);
        assert_eq!(trace.times[0], 0.0);
        assert!((trace.times.last().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_amplitude_train_stays_down() {
        let train = PulseTrainSpec::rectangular(nest_nb(3, 3).unwrap(), 0.0).unwrap();
        let trace = integrate(&train, 16).unwrap();
        assert!(trace.populations.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn rectangular_train_matches_matrix_product() {
        let ph = nest_nb(3, 3).unwrap();
        let train = PulseTrainSpec::rectangular(ph.clone(), 0.8 * PI).unwrap();
        let p = integrate(&train, 32).unwrap().final_population().unwrap();
        let exact = compose_sequence(PulseArea::from_pi_units(0.8).unwrap(), ph.phases())
            .unwrap()
            .transition_probability()
            .unwrap();
        assert!((p - exact).abs() < 1e-7, "{p} vs {exact}");
        // frozen oracle: (1 − cos⁶(0.4π))³
        assert!((p - 0.997_390_019_745_034_4).abs() < 1e-7);
    }

    #[test]
    fn area_normalization_holds_for_all_shapes() {
        let ph = nest_nb(3, 3).unwrap();
        for shape in [
            PulseShape::Rectangular,
            PulseShape::RaisedCosineEdges {
                edge_fraction: 0.25,
            },
            PulseShape::Gaussian { truncation: 3.0 },
        ] {
            for f in [0.0, 0.013, 0.05] {
                let train = PulseTrainSpec::new(ph.clone(), 1.0, 0.8 * PI, shape, f, 0.0).unwrap();
                let env = Envelope::new(&train);
                for k in [0usize, 4, 8] {
                    let area = env.pulse_area_quadrature(k, 1 << 15);
                    assert!(
                        (area - 0.8 * PI).abs() < 1e-10,
                        "shape {shape:?} f {f} pulse {k}: {area}"
                    );
                }
            }
        }
    }

    #[test]
    fn gap_does_not_change_resonant_dynamics() {
        let ph = nest_nb(3, 3).unwrap();
        let no_gap = PulseTrainSpec::rectangular(ph.clone(), 0.8 * PI).unwrap();
        let with_gap =
            PulseTrainSpec::new(ph, 1.0, 0.8 * PI, PulseShape::Rectangular, 0.0, 0.4).unwrap();
        let p0 = final_population(&no_gap, 32).unwrap();
        let p1 = final_population(&with_gap, 32).unwrap();
        assert!((p0 - p1).abs() < 1e-9);
    }

    #[test]
    fn trace_pair_endpoints() {
        let ph = nest_nb(3, 3).unwrap();
        let (high, low) = evolution_trace_pair(&ph, 0.2, PulseShape::Rectangular, 32).unwrap();
        // frozen closed-form endpoints at per-pulse areas 0.8π and 0.2π
        assert!((high.final_population().unwrap() - 0.997_390_019_745_034_4).abs() < 1e-7);
        assert!((low.final_population().unwrap() - 0.017_573_846_050_970_646).abs() < 1e-7);
        // single pulse at the same error: sin²(0.4π) and sin²(0.1π)
        let (high, low) =
            evolution_trace_pair(&single_pulse(), 0.2, PulseShape::Rectangular, 32).unwrap();
        assert!((high.final_population().unwrap() - 0.904_508_497_187_473_7).abs() < 1e-7);
        assert!((low.final_population().unwrap() - 0.095_491_502_812_526_3).abs() < 1e-7);
    }

    #[test]
    fn validation_errors() {
        let ph = single_pulse();
        assert!(
            PulseTrainSpec::new(ph.clone(), 0.0, PI, PulseShape::Rectangular, 0.0, 0.0).is_err()
        );
        assert!(
            PulseTrainSpec::new(ph.clone(), 1.0, f64::NAN, PulseShape::Rectangular, 0.0, 0.0)
                .is_err()
        );
        assert!(
            PulseTrainSpec::new(ph.clone(), 1.0, PI, PulseShape::Rectangular, 0.06, 0.0).is_err()
        );
        assert!(
            PulseTrainSpec::new(ph.clone(), 1.0, PI, PulseShape::Rectangular, -0.01, 0.0).is_err()
        );
        assert!(PulseTrainSpec::new(
            ph.clone(),
            1.0,
            PI,
            PulseShape::RaisedCosineEdges { edge_fraction: 0.6 },
            0.0,
            0.0
        )
        .is_err());
        assert!(PulseTrainSpec::new(
            ph.clone(),
            1.0,
            PI,
            PulseShape::Gaussian { truncation: 0.0 },
            0.0,
            0.0
        )
        .is_err());
        let train = PulseTrainSpec::rectangular(ph, PI).unwrap();
        assert!(integrate(&train, 8).is_err());
    }

    #[test]
    fn trace_csv_header() {
        let train = PulseTrainSpec::rectangular(single_pulse(), PI).unwrap();
        let trace = integrate(&train, 16).unwrap();
        let csv = trace.to_csv(1.0);
        assert!(csv.starts_with("time_over_T,population\n0.0000000000000000e0,"));
    }
}
