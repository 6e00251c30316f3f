//! Independent oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use ionfluor::bloch::{unvec, vectorize, BlochConfig, Liouvillian, Matrix8};
use ionfluor::units::{angular, GAUSS, MHZ, MW_PER_CM2};

/// Propagates `rho0` with N fourth-order Runge-Kutta steps of dρ/dt = Lρ,
/// step `h`, N = 2^k, squaring the one-step propagator until the state stops
/// changing. Returns the trace-normalized state and the elapsed time.
pub fn integrate_to_equilibrium(l: &Liouvillian, h: f64, rho0: &Matrix8) -> (Matrix8, f64) {
    let n = l.matrix.nrows();
    let hl = &l.matrix * Complex64::new(h, 0.0);
    let id = DMatrix::<Complex64>::identity(n, n);
    let hl2 = &hl * &hl;
    let hl3 = &hl2 * &hl;
    let hl4 = &hl3 * &hl;
    let mut p = &id
        + &hl
        + hl2 * Complex64::new(0.5, 0.0)
        + hl3 * Complex64::new(1.0 / 6.0, 0.0)
        + hl4 * Complex64::new(1.0 / 24.0, 0.0);
    let v0 = vectorize(rho0);
    let normalize = |v: DVector<Complex64>| {
        let m = unvec(&v);
        m / m.trace()
    };
    let mut last = normalize(&p * &v0);
    let mut t = h;
    for _ in 0..70 {
        p = &p * &p;
        t *= 2.0;
        let next = normalize(&p * &v0);
        let change = max_entry_difference(&next, &last);
        last = next;
        if change < 1e-13 && t > 1e-3 {
            break;
        }
    }
    (last, t)
}

pub fn max_entry_difference(a: &Matrix8, b: &Matrix8) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Equal mixture of the two ground sublevels.
pub fn ground_state() -> Matrix8 {
    let mut rho = Matrix8::zeros();
    rho[(0, 0)] = Complex64::new(0.5, 0.0);
    rho[(1, 1)] = Complex64::new(0.5, 0.0);
    rho
}

/// Two-laser configuration with random detunings, intensities, field and a
/// polarization anywhere in the plane perpendicular to the beam.
pub fn random_config(rng: &mut ChaCha8Rng) -> BlochConfig {
    let mut c = BlochConfig::default();
    c.cooling.detuning = angular(rng.random_range(-40.0..-5.0) * MHZ);
    c.repump.detuning = angular(rng.random_range(-20.0..20.0) * MHZ);
    c.cooling.intensity = rng.random_range(20.0..300.0) * MW_PER_CM2;
    c.repump.intensity = rng.random_range(20.0..300.0) * MW_PER_CM2;
    c.b_field = rng.random_range(1.0..6.0) * GAUSS;
    let angle: f64 = rng.random_range(0.0..PI);
    c.geometry.laser_polarization = Vector3::new(0.0, angle.cos(), angle.sin());
    c
}

/// J_n(x) = (1/π)∫₀^π cos(nτ − x sin τ) dτ by the trapezoid rule, which is
/// spectrally accurate for this periodic integrand.
pub fn bessel_integral(n: i32, x: f64) -> f64 {
    let steps = 400;
    let h = PI / steps as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let inner: f64 = (1..steps).map(|i| f(i as f64 * h)).sum();
    (inner + 0.5 * (f(0.0) + f(PI))) * h / PI
}

/// Full width at half maximum of a single-peaked `f` sampled on `grid`, with
/// both crossings refined by bisection.
pub fn fwhm(f: impl Fn(f64) -> f64, grid: &[f64]) -> f64 {
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let half = vals.iter().cloned().fold(f64::MIN, f64::max) / 2.0;
    let crossing = |i: usize| {
        let (mut a, mut b) = (grid[i], grid[i + 1]);
        let above_at_a = f(a) > half;
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if (f(m) > half) == above_at_a {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let n = grid.len();
    let rising = (0..n - 1).find(|&i| vals[i] <= half && vals[i + 1] > half).expect("rising edge");
    let falling = (0..n - 1).find(|&i| vals[i] > half && vals[i + 1] <= half).expect("falling edge");
    crossing(falling) - crossing(rising)
}
