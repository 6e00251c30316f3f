use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ionfluor::atom::{Term, Transition};
use ionfluor::bloch::*;
use ionfluor::units::{angular, GAUSS, MHZ, MW_PER_CM2};
use ionfluor::Error;

mod common;
use common::{ground_state, integrate_to_equilibrium, max_entry_difference, random_config};

#[test]
fn steady_state_matches_long_time_integration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut configs = vec![BlochConfig::default()];
    configs.extend((0..5).map(|_| random_config(&mut rng)));
    for config in configs {
        let sys = BlochSystem::new(config).unwrap();
        let l = sys.liouvillian().unwrap();
        let ss = steady_state(&l).unwrap();
        let v = ss.validity();
        assert!(v.ok(), "{v:?}");
        assert!(l.residual(ss.matrix()) <= 1e-10 * l.norm());
        let h = 0.01 / config.scheme.gamma_total();
        let (rho_t, t) = integrate_to_equilibrium(&l, h, &ground_state());
        let diff = max_entry_difference(&rho_t, ss.matrix());
        assert!(diff <= 1e-6, "integration to t = {t:e} s differs by {diff:e}");
        let pp = ss.p_population();
        assert!(pp > 0.0 && pp < 0.5, "{pp}");
    }
}

#[test]
fn single_cooling_laser_pumps_into_d() {
    let mut config = BlochConfig::default();
    config.repump.intensity = 0.0;
    let sys = BlochSystem::new(config).unwrap();
    let l = sys.liouvillian().unwrap();
    let (rho, _) = integrate_to_equilibrium(&l, 0.01 / config.scheme.gamma_total(), &ground_state());
    let d = DensityMatrix(rho).term_population(Term::D32);
    assert!(d > 1.0 - 1e-6, "{d}");
    assert!(matches!(sys.steady_state(), Err(Error::NonUniqueSteadyState { .. })));
}

#[test]
fn no_cooling_light_is_degenerate() {
    let mut config = BlochConfig::default();
    config.cooling.intensity = 0.0;
    let err = BlochSystem::new(config).unwrap().p_population().unwrap_err();
    match err {
        Error::NonUniqueSteadyState { dimension } => assert!(dimension > 1),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn dark_lower_manifold_is_stationary_without_light() {
    let mut config = BlochConfig::default();
    config.cooling.intensity = 0.0;
    config.repump.intensity = 0.0;
    let l = BlochSystem::new(config).unwrap().liouvillian().unwrap();
    let pops = [0.1, 0.2, 0.0, 0.0, 0.3, 0.05, 0.25, 0.1];
    let rho = DensityMatrix::from_populations(&pops);
    assert!(l.residual(rho.matrix()) <= 1e-12 * l.norm());
    assert!(null_space_dimension(&l) >= 6);
}

#[test]
fn field_reversal_leaves_fluorescence_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..3 {
        let config = random_config(&mut rng);
        let mut flipped = config;
        flipped.geometry = config.geometry.flipped_field();
        let a = BlochSystem::new(config).unwrap().p_population().unwrap();
        let b = BlochSystem::new(flipped).unwrap().p_population().unwrap();
        assert!((a - b).abs() <= 1e-10 * a, "{a} vs {b}");
    }
}

#[test]
fn p_population_bounded_at_or_below_saturation() {
    let sys = BlochSystem::reference();
    let scheme = sys.config().scheme;
    let consts = sys.config().constants;
    let isat_c = ionfluor::atom::saturation_intensity(&consts, scheme.gamma_sp, scheme.wavelength_cooling);
    let isat_r = ionfluor::atom::saturation_intensity(&consts, scheme.gamma_pd, scheme.wavelength_repump);
    for fc in [0.1, 0.5, 1.0] {
        for fr in [0.1, 1.0] {
            for d493 in [-40.0, -19.0, -5.0, 0.0, 10.0] {
                for d650 in [-20.0, 0.0, 5.0, 20.0] {
                    let mut c = *sys.config();
                    c.cooling.intensity = fc * isat_c;
                    c.repump.intensity = fr * isat_r;
                    c.cooling.detuning = angular(d493 * MHZ);
                    c.repump.detuning = angular(d650 * MHZ);
                    let p = sys.with_config(c).unwrap().p_population().unwrap();
                    assert!((0.0..=0.5).contains(&p), "{p} at {fc} {fr} {d493} {d650}");
                }
            }
        }
    }
}

fn repump_scan(sys: &BlochSystem, lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let grid = detuning_grid_hz(lo, hi, n);
    let pts = sys.excitation_spectrum(Transition::Repump, &grid).unwrap();
    (grid, pts.into_iter().map(|p| p.p_population.unwrap()).collect())
}

#[test]
fn repump_scan_peaks_near_five_megahertz() {
    let (grid, p) = repump_scan(&BlochSystem::reference(), -60e6, 60e6, 481);
    let (imax, _) = p.iter().enumerate().fold((0, 0.0), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let f = grid[imax] / angular(1.0);
    assert!((f - 5e6).abs() <= 5e6, "maximum at {f} Hz");
}

#[test]
fn repump_scan_shows_dark_resonance() {
    let (grid, p) = repump_scan(&BlochSystem::reference(), -30e6, 30e6, 601);
    let minima: Vec<f64> = (1..p.len() - 1)
        .filter(|&i| p[i] < p[i - 1] && p[i] < p[i + 1])
        .map(|i| grid[i] / angular(1.0))
        .collect();
    assert!(!minima.is_empty());
}

#[test]
fn weak_excitation_limit() {
    let sys = BlochSystem::reference();
    let mut c = *sys.config();
    c.cooling.intensity *= 1e-6;
    c.repump.intensity *= 1e-6;
    let (_, p) = repump_scan(&sys.with_config(c).unwrap(), -40e6, 40e6, 81);
    assert!(p.iter().cloned().fold(0.0, f64::max) < 1e-3);
}

#[test]
fn scan_points_are_independent() {
    let sys = BlochSystem::reference();
    let grid = detuning_grid_hz(-20e6, 20e6, 21);
    let full = sys.excitation_spectrum(Transition::Repump, &grid).unwrap();
    let every_other: Vec<f64> = grid.iter().step_by(2).cloned().collect();
    let sub = sys.excitation_spectrum(Transition::Repump, &every_other).unwrap();
    for (a, b) in full.iter().step_by(2).zip(&sub) {
        assert_eq!(a.p_population.as_ref().ok(), b.p_population.as_ref().ok());
    }
    let single = sys.excitation_spectrum(Transition::Repump, &grid[3..4]).unwrap();
    assert_eq!(
        *single[0].p_population.as_ref().unwrap(),
        sys.p_population_at(Transition::Repump, grid[3]).unwrap()
    );
    let mut reversed = grid.clone();
    reversed.reverse();
    assert!(sys.excitation_spectrum(Transition::Repump, &reversed).is_err());
}

#[test]
fn derivative_matches_local_quadratic_fit() {
    let sys = BlochSystem::reference();
    for axis in [Transition::Cooling, Transition::Repump] {
        let d0 = sys.detuning(axis);
        let d = sys.p_derivative(axis, DEFAULT_DERIVATIVE_STEP).unwrap();
        // Least-squares parabola through a dense scan of ±2π×200 kHz.
        let n = 41;
        let half = angular(200e3);
        let xs: Vec<f64> = (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect();
        let a = DMatrix::from_fn(n, 3, |i, j| (xs[i] / half).powi(j as i32));
        let y = DVector::from_iterator(n, xs.iter().map(|x| sys.p_population_at(axis, d0 + x).unwrap()));
        let coef = a.clone().svd(true, true).solve(&y, 1e-14).unwrap();
        let slope = coef[1] / half;
        let rel = (d.value - slope).abs() / slope.abs();
        assert!(rel <= 0.01, "{axis:?}: {} vs {slope} ({rel})", d.value);
    }
}

#[test]
fn red_detuned_slope_is_positive() {
    let d = BlochSystem::reference()
        .p_derivative(Transition::Cooling, DEFAULT_DERIVATIVE_STEP)
        .unwrap();
    assert!(d.value > 0.0 && d.error < 1e-3 * d.value);
}

#[test]
fn derivative_vanishes_at_fluorescence_maximum() {
    let sys = BlochSystem::reference();
    let f = |x: f64| sys.p_population_at(Transition::Cooling, x).unwrap();
    // Golden-section search for the maximum over Δ493.
    let (mut a, mut b) = (angular(-30e6), angular(-5e6));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let tol = angular(10.0);
    while b - a > tol {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let peak = 0.5 * (a + b);
    let at_peak = sys.with_detuning(Transition::Cooling, peak);
    let d = at_peak.p_derivative(Transition::Cooling, DEFAULT_DERIVATIVE_STEP).unwrap();
    let h = DEFAULT_DERIVATIVE_STEP;
    let curvature = ((f(peak + h) - 2.0 * f(peak) + f(peak - h)) / (h * h)).abs();
    // The maximum is located to ±tol/2, which bounds the slope there.
    let bound = d.error + curvature * tol;
    assert!(d.value.abs() <= bound, "{} vs {bound}", d.value);
    let red = sys.p_derivative(Transition::Cooling, DEFAULT_DERIVATIVE_STEP).unwrap();
    assert!(d.value.abs() < 1e-3 * red.value);
}

#[test]
fn repump_slope_small_at_fluorescence_setpoint() {
    let sys = BlochSystem::reference();
    let at = sys.p_derivative(Transition::Repump, DEFAULT_DERIVATIVE_STEP).unwrap().value;
    let (grid, p) = repump_scan(&sys, -40e6, 40e6, 161);
    let max_slope = p
        .windows(2)
        .zip(grid.windows(2))
        .map(|(v, x)| ((v[1] - v[0]) / (x[1] - x[0])).abs())
        .fold(0.0, f64::max);
    assert!(at.abs() <= 0.2 * max_slope, "{at} vs {max_slope}");
}

#[test]
fn same_transition_twice_is_unsupported() {
    let c = BlochConfig::default();
    let err = build_liouvillian(
        &c.scheme,
        &c.constants,
        &[c.cooling, c.cooling],
        c.b_field,
        &c.geometry,
    )
    .unwrap_err();
    assert!(matches!(err, Error::UnsupportedConfiguration(_)));
}

#[test]
fn scan_csv_round_trip() {
    let sys = BlochSystem::reference();
    let grid = detuning_grid_hz(-5e6, 5e6, 5);
    let pts = sys.excitation_spectrum(Transition::Repump, &grid).unwrap();
    let mut buf = Vec::new();
    write_scan_csv(&pts, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("detuning_hz,p_population"));
    let back = read_scan_csv(buf.as_slice()).unwrap();
    for (a, b) in back.iter().zip(&pts) {
        assert!((a.0 - b.detuning).abs() <= 1e-12 * b.detuning.abs().max(1.0));
        assert_eq!(a.1, *b.p_population.as_ref().unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn liouvillian_preserves_trace(
        entries in prop::collection::vec(-1.0f64..1.0, 128),
        d493 in -40.0f64..10.0,
        b in 0.5f64..5.0,
    ) {
        let mut c = BlochConfig::default();
        c.cooling.detuning = angular(d493 * MHZ);
        c.b_field = b * GAUSS;
        let l = BlochSystem::new(c).unwrap().liouvillian().unwrap();
        let rho = Matrix8::from_fn(|i, j| Complex64::new(entries[i * 8 + j], entries[64 + i * 8 + j]));
        let tr = l.apply(&rho).trace().norm();
        prop_assert!(tr <= 1e-10 * l.norm());
    }

    #[test]
    fn steady_states_are_valid(
        d493 in -40.0f64..-2.0,
        d650 in -30.0f64..30.0,
        i493 in 5.0f64..500.0,
        i650 in 5.0f64..500.0,
        b in 0.5f64..8.0,
    ) {
        let mut c = BlochConfig::default();
        c.cooling.detuning = angular(d493 * MHZ);
        c.repump.detuning = angular(d650 * MHZ);
        c.cooling.intensity = i493 * MW_PER_CM2;
        c.repump.intensity = i650 * MW_PER_CM2;
        c.b_field = b * GAUSS;
        let sys = BlochSystem::new(c).unwrap();
        let l = sys.liouvillian().unwrap();
        let ss = steady_state(&l).unwrap();
        prop_assert!(ss.validity().ok(), "{:?}", ss.validity());
        prop_assert!(l.residual(ss.matrix()) <= 1e-10 * l.norm());
        let p = ss.p_population();
        prop_assert!((0.0..=1.0).contains(&p));
    }
}
