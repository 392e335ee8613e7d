//! Verification of the passband derivative conditions and a numerical solver
//! for composite phases.
//!
//! A sequence of N identical resonant pulses with odd N automatically has
//! U₁₁(π) = 0, vanishing even-order derivatives of U₁₁ at A = π, and
//! vanishing even-order derivatives of U₁₂ at A = 0 (parity of the
//! Cayley-Klein entries in the area). What the phases control are the
//! remaining odd-order derivatives: a flat top of order N_b means U₁₁ has a
//! zero of order N_b at π (derivatives 1..N_b−1 vanish), and a flat bottom
//! of order N_n means U₁₂ has a zero of order N_n at 0. The solver drives
//! exactly those non-identically-zero Taylor coefficients to zero over the
//! free phases, with φ₁ ≡ 0 fixing the global-phase gauge.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::sequence::{nest_nb, PhaseList, SequenceKind};
use crate::series::series_propagator_rad;

/// Default tolerance on vanishing Taylor coefficients.
pub const DEFAULT_CONDITION_TOL: f64 = 1e-10;

/// Residuals and detected orders of zero of the composed propagator at the
/// two expansion points. The order search applies `tolerance` to Taylor
/// coefficient magnitudes; the derivative lists carry the k!-scaled values.
/// An order equal to K+1 (resp. J+1) means "zero to at least that order".
#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    /// |U₁₁| at A = π.
    pub residual_at_pi: f64,
    /// |∂_A^k U₁₁| at A = π for k = 1..=K.
    pub top_derivatives: Vec<f64>,
    /// |∂_A^j U₁₁| at A = 0 for j = 1..=J.
    pub bottom_derivatives: Vec<f64>,
    /// |∂_A^j U₁₂| at A = 0 for j = 1..=J; the bottom order of zero is
    /// detected on this entry (the excitation amplitude).
    pub bottom_derivatives_u12: Vec<f64>,
    /// Smallest index (function value = 0) with |coefficient| above
    /// tolerance for U₁₁ at π.
    pub order_of_zero_top: usize,
    /// Same for U₁₂ at 0.
    pub order_of_zero_bottom: usize,
    pub tolerance: f64,
}

fn order_of_zero(series: &crate::series::Series, search: usize, tol: f64) -> usize {
    (0..=search)
        .find(|&k| series.coeff(k).norm() > tol)
        .unwrap_or(search + 1)
}

/// Evaluate the condition system for a phase list: derivatives of U₁₁ at
/// A = π (k = 1..=K) and of U₁₁/U₁₂ at A = 0 (j = 1..=J), plus detected
/// orders of zero.
pub fn check_pb_conditions(
    phases: &[Phase],
    k_top: usize,
    j_bottom: usize,
    tol: f64,
) -> Result<ConditionReport> {
    let rad: Vec<f64> = phases.iter().map(|p| p.radians()).collect();
    check_pb_conditions_rad(&rad, k_top, j_bottom, tol)
}

/// Same as [`check_pb_conditions`] with phases in radians.
pub fn check_pb_conditions_rad(
    phases_rad: &[f64],
    k_top: usize,
    j_bottom: usize,
    tol: f64,
) -> Result<ConditionReport> {
    let top = series_propagator_rad(phases_rad, PI, k_top.max(1))?;
    let bottom = series_propagator_rad(phases_rad, 0.0, j_bottom.max(1))?;
    Ok(ConditionReport {
        residual_at_pi: top.u11().coeff(0).norm(),
        top_derivatives: (1..=k_top)
            .map(|k| top.u11().derivative(k).norm())
            .collect(),
        bottom_derivatives: (1..=j_bottom)
            .map(|j| bottom.u11().derivative(j).norm())
            .collect(),
        bottom_derivatives_u12: (1..=j_bottom)
            .map(|j| bottom.u12().derivative(j).norm())
            .collect(),
        order_of_zero_top: order_of_zero(top.u11(), k_top, tol),
        order_of_zero_bottom: order_of_zero(bottom.u12(), j_bottom, tol),
        tolerance: tol,
    })
}

/// Residual vector for target orders (N_b, N_n): Re/Im of the U₁₁ value at
/// π, the odd-k U₁₁ coefficients at π for k ≤ N_b−2, and the odd-j U₁₂
/// coefficients at 0 for j ≤ N_n−2 (the conditions that are not fulfilled
/// identically).
pub fn pb_residual(phases_rad: &[f64], n_b: u32, n_n: u32) -> Result<Vec<f64>> {
    let top_order = ((n_b as usize).saturating_sub(2)).max(1);
    let bottom_order = ((n_n as usize).saturating_sub(2)).max(1);
    let top = series_propagator_rad(phases_rad, PI, top_order)?;
    let bottom = series_propagator_rad(phases_rad, 0.0, bottom_order)?;
    let mut r = Vec::new();
    let push = |r: &mut Vec<f64>, z: num_complex::Complex64| {
        r.push(z.re);
        r.push(z.im);
    };
    push(&mut r, top.u11().coeff(0));
    let mut k = 1;
    while k + 2 <= n_b as usize {
        push(&mut r, top.u11().coeff(k));
        k += 2;
    }
    let mut j = 1;
    while j + 2 <= n_n as usize {
        push(&mut r, bottom.u12().coeff(j));
        j += 2;
    }
    Ok(r)
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn norm2_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Solve the dense symmetric system A·x = b by Gaussian elimination with
/// partial pivoting. A is modified in place. Returns None on a vanishing
/// pivot.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pivot <= 0.0 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            let (upper, lower) = a.split_at_mut(r);
            let pivot_row = &upper[col];
            for (cell, p) in lower[0].iter_mut().zip(pivot_row).skip(col) {
                *cell -= factor * p;
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for c in row + 1..n {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Solver configuration.
#[derive(Clone, Copy, Debug)]
pub struct SolveConfig {
    /// Convergence: max-abs residual below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Number of random starts when seeding randomly.
    pub multistart: usize,
    /// RNG seed for the random starts (deterministic given this value).
    pub rng_seed: u64,
    /// Forward-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol: 1e-10,
            max_iter: 500,
            multistart: 16,
            rng_seed: 0x5eed,
            fd_step: 1e-6,
        }
    }
}

/// Starting point for the phase solver.
#[derive(Clone, Debug)]
pub enum SolveSeed {
    /// Nested N(B) phases (requires N = N_b·N_n).
    Nested,
    /// Multistart from uniformly random phase sets.
    Random,
    /// Explicit phases in radians (length N).
    Phases(Vec<f64>),
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub conditions: ConditionReport,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    /// Solved phases in radians, folded into [0, 2π), φ₁ = 0.
    pub phases_rad: Vec<f64>,
    /// The same phases in the rational sequence encoding, kind `Numerical`.
    pub sequence: PhaseList,
    pub report: SolveReport,
}

struct LmResult {
    x: Vec<f64>,
    residual_inf: f64,
    iterations: usize,
    converged: bool,
}

/// Levenberg-Marquardt over the free phases (trust-region style damping),
/// Jacobian by forward perturbation of each phase through the series
/// pipeline.
fn lm_minimize<F: Fn(&[f64]) -> Result<Vec<f64>>>(
    x0: Vec<f64>,
    f: &F,
    cfg: &SolveConfig,
) -> Result<LmResult> {
    let mut x = x0;
    let n = x.len();
    let mut r = f(&x)?;
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        if norm_inf(&r) < cfg.tol {
            return Ok(LmResult {
                x,
                residual_inf: norm_inf(&r),
                iterations,
                converged: true,
            });
        }
        if n == 0 {
            break; // nothing to optimize
        }
        iterations += 1;
        let m = r.len();
        // forward-difference Jacobian, column per phase
        let mut jac = vec![vec![0.0; n]; m];
        for col in 0..n {
            let mut xp = x.clone();
            xp[col] += cfg.fd_step;
            let rp = f(&xp)?;
            for ((row, rp_k), r_k) in jac.iter_mut().zip(&rp).zip(&r) {
                row[col] = (rp_k - r_k) / cfg.fd_step;
            }
        }
        // normal equations
        let mut jtj = vec![vec![0.0; n]; n];
        let mut jtr = vec![0.0; n];
        for i in 0..n {
            for j in i..n {
                let s: f64 = jac.iter().map(|row| row[i] * row[j]).sum();
                jtj[i][j] = s;
                jtj[j][i] = s;
            }
            jtr[i] = jac.iter().zip(&r).map(|(row, rk)| row[i] * rk).sum();
        }
        let base = norm2_sq(&r);
        let mut accepted = false;
        while lambda < 1e10 {
            let mut a: Vec<Vec<f64>> = jtj.clone();
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += lambda;
            }
            let mut b: Vec<f64> = jtr.iter().map(|v| -v).collect();
            if let Some(step) = solve_dense(&mut a, &mut b) {
                let trial: Vec<f64> = x.iter().zip(&step).map(|(xi, s)| xi + s).collect();
                let rt = f(&trial)?;
                if norm2_sq(&rt) < base {
                    x = trial;
                    r = rt;
                    lambda = (lambda / 3.0).max(1e-14);
                    accepted = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted {
            break; // damping exhausted: stalled
        }
    }
    let converged = norm_inf(&r) < cfg.tol;
    Ok(LmResult {
        residual_inf: norm_inf(&r),
        x,
        iterations,
        converged,
    })
}

fn fold_tau(x: f64) -> f64 {
    let mut y = x % TAU;
    if y < 0.0 {
        y += TAU;
    }
    y
}

fn outcome_from(
    phases_rad: Vec<f64>,
    n_b: u32,
    n_n: u32,
    lm: &LmResult,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    let folded: Vec<f64> = phases_rad.iter().map(|&p| fold_tau(p)).collect();
    let conditions = check_pb_conditions_rad(&folded, n_b as usize, n_n as usize, cfg.tol)?;
    let phases: Vec<Phase> = folded
        .iter()
        .map(|&p| Phase::approx_from_radians(p, 1_000_000_000_000).map(|q| q.canonicalized()))
        .collect::<Result<_>>()?;
    let n = folded.len();
    let sequence = PhaseList {
        label: format!("PB({n_b},{n_n}) N={n} numerical"),
        kind: SequenceKind::Numerical,
        n_b: Some(n_b),
        n_n: Some(n_n),
        phases,
    };
    Ok(SolveOutcome {
        phases_rad: folded,
        sequence,
        report: SolveReport {
            residual_norm: lm.residual_inf,
            iterations: lm.iterations,
            converged: lm.converged,
            conditions,
        },
    })
}

fn solve_from_start(
    start: &[f64],
    n_b: u32,
    n_n: u32,
    cfg: &SolveConfig,
) -> Result<(LmResult, Vec<f64>)> {
    // gauge: shift so the first phase is exactly 0, then optimize the rest
    let shift = start[0];
    let x0: Vec<f64> = start[1..].iter().map(|p| p - shift).collect();
    let f = |x: &[f64]| -> Result<Vec<f64>> {
        let mut phases = Vec::with_capacity(x.len() + 1);
        phases.push(0.0);
        phases.extend_from_slice(x);
        pb_residual(&phases, n_b, n_n)
    };
    let lm = lm_minimize(x0, &f, cfg)?;
    let mut phases = Vec::with_capacity(lm.x.len() + 1);
    phases.push(0.0);
    phases.extend_from_slice(&lm.x);
    Ok((lm, phases))
}

fn validate_counts(n: u32, n_b: u32, n_n: u32) -> Result<()> {
    for v in [n, n_b, n_n] {
        if v == 0 || v % 2 == 0 {
            return Err(Error::InvalidPulseCount(v as i64));
        }
    }
    Ok(())
}

/// Solve the passband condition system of target orders (N_b, N_n) over the
/// phases of an N-pulse train. Non-convergence is an explicit error carrying
/// the best residual found.
pub fn solve_pb(
    n: u32,
    n_b: u32,
    n_n: u32,
    seed: SolveSeed,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    validate_counts(n, n_b, n_n)?;
    let start: Vec<f64> = match seed {
        SolveSeed::Nested => {
            if n != n_b * n_n {
                return Err(Error::InvalidParameter(format!(
                    "nested seed needs N = N_b*N_n, got {n} != {}",
                    n_b * n_n
                )));
            }
            nest_nb(n_n, n_b)?.radians()
        }
        SolveSeed::Phases(v) => {
            if v.len() != n as usize {
                return Err(Error::InvalidParameter(format!(
                    "seed has {} phases, expected {n}",
                    v.len()
                )));
            }
            if v.iter().any(|p| !p.is_finite()) {
                return Err(Error::InvalidParameter("non-finite seed phase".into()));
            }
            v
        }
        SolveSeed::Random => {
            let all = solve_pb_multistart(n, n_b, n_n, cfg)?;
            return match all.into_iter().next() {
                Some(best) => Ok(best),
                None => Err(Error::SolverNotConverged {
                    residual: f64::NAN,
                    iterations: cfg.max_iter,
                }),
            };
        }
    };
    let (lm, phases) = solve_from_start(&start, n_b, n_n, cfg)?;
    if !lm.converged {
        return Err(Error::SolverNotConverged {
            residual: lm.residual_inf,
            iterations: lm.iterations,
        });
    }
    outcome_from(phases, n_b, n_n, &lm, cfg)
}

/// Multistart variant: runs `cfg.multistart` random starts (deterministic
/// given `cfg.rng_seed`) and returns the distinct converged solutions,
/// best residual first, deduplicated modulo 2π per phase.
pub fn solve_pb_multistart(
    n: u32,
    n_b: u32,
    n_n: u32,
    cfg: &SolveConfig,
) -> Result<Vec<SolveOutcome>> {
    validate_counts(n, n_b, n_n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let starts: Vec<Vec<f64>> = (0..cfg.multistart)
        .map(|_| {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
            v[0] = 0.0;
            v
        })
        .collect();
    let solved: Vec<Option<SolveOutcome>> = starts
        .par_iter()
        .map(|start| {
            let (lm, phases) = solve_from_start(start, n_b, n_n, cfg).ok()?;
            if lm.converged {
                outcome_from(phases, n_b, n_n, &lm, cfg).ok()
            } else {
                None
            }
        })
        .collect();
    let mut outcomes: Vec<SolveOutcome> = solved.into_iter().flatten().collect();
    outcomes.sort_by(|a, b| a.report.residual_norm.total_cmp(&b.report.residual_norm));
    let mut distinct: Vec<SolveOutcome> = Vec::new();
    for o in outcomes {
        let dup = distinct.iter().any(|d| {
            d.phases_rad.iter().zip(&o.phases_rad).all(|(a, b)| {
                let delta = (a - b).abs() % TAU;
                delta.min(TAU - delta) < 1e-6
            })
        });
        if !dup {
            distinct.push(o);
        }
    }
    Ok(distinct)
}
