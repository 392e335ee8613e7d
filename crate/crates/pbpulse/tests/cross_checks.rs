//! Cross-oracle checks: series derivatives against finite differences and a
//! contour-sum oracle, and the time-domain integrator against matrix
//! products.

use std::f64::consts::PI;

use num_complex::Complex64;

use pbpulse::timesim::final_population;
use pbpulse::{
    broadband_phases, compose_sequence, narrowband_phases, nest_bn, nest_nb, series_propagator,
    single_pulse, PhaseList, PulseArea, PulseShape, PulseTrainSpec,
};

fn u11_at(ph: &PhaseList, a: f64) -> Complex64 {
    compose_sequence(PulseArea::new(a).unwrap(), ph.phases())
        .unwrap()
        .u11()
}

fn u12_at(ph: &PhaseList, a: f64) -> Complex64 {
    compose_sequence(PulseArea::new(a).unwrap(), ph.phases())
        .unwrap()
        .u12()
}

/// First and second derivatives by Richardson-extrapolated central
/// differences. Higher orders are left to the contour oracle: a real-step
/// stencil for order k amplifies roundoff by 1/h^k, which already swamps
/// 1e-6 at k = 3 for any workable step.
fn fd_low_order(f: &dyn Fn(f64) -> Complex64, x: f64, k: usize) -> Complex64 {
    let h = 1e-3;
    let stencil = |h: f64| -> Complex64 {
        match k {
            1 => (f(x + h) - f(x - h)) / (2.0 * h),
            2 => (f(x + h) - f(x) * 2.0 + f(x - h)) / (h * h),
            _ => unreachable!(),
        }
    };
    let d_h = stencil(h);
    let d_h2 = stencil(h / 2.0);
    (d_h2 * 4.0 - d_h) / 3.0
}

/// Composed propagator at a complex area. For real A every factor entry is
/// an entire function (cos(A/2) on the diagonal, −i·sin(A/2)e^{±iφ} off
/// it), so the continuation is the plain 2×2 product of those functions
/// at z.
fn compose_complex(phases_rad: &[f64], z: Complex64) -> [[Complex64; 2]; 2] {
    let half = z / 2.0;
    let (c, s) = (half.cos(), half.sin());
    let mut u = [
        [Complex64::new(1.0, 0.0), Complex64::ZERO],
        [Complex64::ZERO, Complex64::new(1.0, 0.0)],
    ];
    for &phi in phases_rad {
        let e = Complex64::from_polar(1.0, phi);
        let m = [[c, -Complex64::i() * s * e], [-Complex64::i() * s / e, c]];
        let mut next = [[Complex64::ZERO; 2]; 2];
        for (row, next_row) in next.iter_mut().enumerate() {
            for (col, cell) in next_row.iter_mut().enumerate() {
                *cell = m[row][0] * u[0][col] + m[row][1] * u[1][col];
            }
        }
        u = next;
    }
    u
}

/// Contour-sum derivative oracle: the entries are entire in the area, so
/// f^(k)(x) = k!/(M·r^k)·Σ_m f(x + r·e^{iθ_m})·e^{−ikθ_m} over trapezoid
/// nodes; roundoff-limited near 1e-13 and independent of the series path.
fn contour_derivative(phases_rad: &[f64], x: f64, k: usize, entry: (usize, usize)) -> Complex64 {
    let m = 64usize;
    let r = 0.7f64;
    let mut acc = Complex64::ZERO;
    for node in 0..m {
        let theta = 2.0 * PI * node as f64 / m as f64;
        let z = Complex64::new(x, 0.0) + Complex64::from_polar(r, theta);
        let u = compose_complex(phases_rad, z);
        acc += u[entry.0][entry.1] * Complex64::from_polar(1.0, -(k as f64) * theta);
    }
    let mut factorial = 1.0;
    for i in 2..=k {
        factorial *= i as f64;
    }
    acc * factorial / (m as f64 * r.powi(k as i32))
}

#[test]
fn complex_composition_agrees_on_real_axis() {
    let ph = nest_nb(3, 3).unwrap();
    for a in [0.0, 0.4, PI, 4.9] {
        let u = compose_complex(&ph.radians(), Complex64::new(a, 0.0));
        assert!((u[0][0] - u11_at(&ph, a)).norm() < 1e-13);
        assert!((u[0][1] - u12_at(&ph, a)).norm() < 1e-13);
    }
}

#[test]
fn series_derivatives_match_finite_differences_low_orders() {
    for ph in [
        broadband_phases(3).unwrap(),
        narrowband_phases(5).unwrap(),
        nest_nb(3, 3).unwrap(),
        nest_bn(3, 5).unwrap(),
    ] {
        for a0 in [0.0, PI, 1.3] {
            let sp = series_propagator(ph.phases(), a0, 4).unwrap();
            for k in 1..=2usize {
                let f11 = |a: f64| u11_at(&ph, a);
                let fd = fd_low_order(&f11, a0, k);
                let ex = sp.u11().derivative(k);
                assert!(
                    (fd - ex).norm() <= 1e-6 * ex.norm().max(1.0),
                    "{} U11 d{k} at {a0}: fd {fd} vs series {ex}",
                    ph.label
                );
                let f12 = |a: f64| u12_at(&ph, a);
                let fd = fd_low_order(&f12, a0, k);
                let ex = sp.u12().derivative(k);
                assert!(
                    (fd - ex).norm() <= 1e-6 * ex.norm().max(1.0),
                    "{} U12 d{k} at {a0}: fd {fd} vs series {ex}",
                    ph.label
                );
            }
        }
    }
}

#[test]
fn series_derivatives_match_contour_oracle_to_order_five() {
    for ph in [
        single_pulse(),
        broadband_phases(5).unwrap(),
        nest_nb(3, 3).unwrap(),
        nest_bn(3, 5).unwrap(),
    ] {
        let rad = ph.radians();
        for a0 in [0.0, PI, 2.2] {
            let sp = series_propagator(ph.phases(), a0, 5).unwrap();
            for k in 0..=5usize {
                let oracle = contour_derivative(&rad, a0, k, (0, 0));
                let ex = sp.u11().derivative(k);
                assert!(
                    (oracle - ex).norm() <= 1e-9 * ex.norm().max(1.0),
                    "{} U11 d{k} at {a0}: contour {oracle} vs series {ex}",
                    ph.label
                );
                let oracle = contour_derivative(&rad, a0, k, (0, 1));
                let ex = sp.u12().derivative(k);
                assert!(
                    (oracle - ex).norm() <= 1e-9 * ex.norm().max(1.0),
                    "{} U12 d{k} at {a0}: contour {oracle} vs series {ex}",
                    ph.label
                );
            }
        }
    }
}

#[test]
fn integrator_matches_matrix_product_up_to_25_pulses() {
    let sequences = [
        single_pulse(),
        broadband_phases(3).unwrap(),
        narrowband_phases(5).unwrap(),
        nest_nb(3, 3).unwrap(),
        nest_bn(3, 5).unwrap(),
        nest_bn(5, 5).unwrap(),
    ];
    for ph in &sequences {
        for x in [0.3, 0.8, 1.5] {
            let want = compose_sequence(PulseArea::from_pi_units(x).unwrap(), ph.phases())
                .unwrap()
                .transition_probability()
                .unwrap();
            let train = PulseTrainSpec::rectangular(ph.clone(), x * PI).unwrap();
            let got = final_population(&train, 32).unwrap();
            assert!(
                (got - want).abs() < 1e-7,
                "{} at {x}π: {got} vs {want}",
                ph.label
            );
        }
    }
}

#[test]
fn final_population_is_shape_independent_without_overlap() {
    // resonant driving: only the per-pulse area matters when pulses do not
    // overlap
    let ph = broadband_phases(3).unwrap();
    let mut results = Vec::new();
    for shape in [
        PulseShape::Rectangular,
        PulseShape::RaisedCosineEdges {
            edge_fraction: 0.25,
        },
        PulseShape::Gaussian { truncation: 3.0 },
    ] {
        let train = PulseTrainSpec::new(ph.clone(), 1.0, 0.7 * PI, shape, 0.0, 0.0).unwrap();
        results.push(final_population(&train, 32).unwrap());
    }
    for pair in results.windows(2) {
        assert!((pair[0] - pair[1]).abs() < 1e-7, "{results:?}");
    }
}

#[test]
fn norm_is_conserved_along_overlapped_trains() {
    let ph = nest_bn(3, 5).unwrap();
    for f in [0.0, 0.01, 0.05] {
        let train = PulseTrainSpec::new(ph.clone(), 1.0, 1.1 * PI, PulseShape::Rectangular, f, 0.0)
            .unwrap();
        let trace = pbpulse::integrate(&train, 32).unwrap();
        assert!(
            trace.max_norm_defect < 1e-8,
            "overlap {f}: norm defect {:.3e}",
            trace.max_norm_defect
        );
    }
}

#[test]
fn overlap_deviation_vanishes_continuously() {
    let ph = nest_bn(3, 3).unwrap();
    let base = final_population(
        &PulseTrainSpec::new(ph.clone(), 1.0, 0.8 * PI, PulseShape::Rectangular, 0.0, 0.0).unwrap(),
        32,
    )
    .unwrap();
    let mut prev = f64::INFINITY;
    for f in [0.02, 0.002, 0.0002] {
        let p = final_population(
            &PulseTrainSpec::new(ph.clone(), 1.0, 0.8 * PI, PulseShape::Rectangular, f, 0.0)
                .unwrap(),
            32,
        )
        .unwrap();
        let dev = (p - base).abs();
        assert!(
            dev < prev,
            "deviation should fall with overlap: {dev} at {f}"
        );
        prev = dev;
    }
    assert!(prev < 1e-3, "smallest-overlap deviation {prev}");
}
