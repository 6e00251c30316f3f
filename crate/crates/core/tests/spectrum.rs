use nalgebra::Vector3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use ionfluor::bloch::ExperimentGeometry;
use ionfluor::motion::wave_vectors;
use ionfluor::spectrum::recipes::*;
use ionfluor::spectrum::*;
use ionfluor::units::NM;
use ionfluor::Error;

mod common;
use common::bessel_integral;

const F_PAUL_HZ: f64 = 18.53e6;

fn k_pair() -> (Vector3<f64>, Vector3<f64>) {
    wave_vectors(&ExperimentGeometry::default(), 493.4 * NM)
}

#[test]
fn line_list_matches_independent_bessel_values() {
    for m in [0.1, 0.47, 1.5, 3.0] {
        let list = compose_lines(32.5e6, &Modulation::micro(m, 20)).unwrap();
        assert!((list.total_power() - 1.0).abs() <= 1e-9);
        list.validate().unwrap();
        for n in -5..=5 {
            let f = 32.5e6 + n as f64 * F_PAUL_HZ;
            let p = list.power_at(f, 1.0).unwrap();
            let expect = bessel_integral(n, m).powi(2);
            assert!((p - expect).abs() <= 1e-12, "m={m} n={n}: {p} vs {expect}");
        }
    }
    let list = compose_lines(32.5e6, &Modulation::micro(0.47, 3)).unwrap();
    let ratio = list.power_at(32.5e6 + F_PAUL_HZ, 1.0).unwrap() / list.power_at(32.5e6, 1.0).unwrap();
    assert!((10.0 * ratio.log10() + 12.3).abs() < 0.05);
}

#[test]
fn unmodulated_signal_is_one_line() {
    let list = compose_lines(32.5e6, &Modulation::micro(0.0, 20)).unwrap();
    let nonzero: Vec<_> = list.lines.iter().filter(|l| l.relative_power > 0.0).collect();
    assert_eq!(nonzero.len(), 1);
    assert_eq!(nonzero[0].frequency_hz, 32.5e6);
    assert_eq!(nonzero[0].relative_power, 1.0);

    let fs = 400e6;
    let x = synthesize_timeseries(&HeterodyneConfig::default(), &Modulation::micro(0.0, 0), 200e-6, fs, false, 0)
        .unwrap();
    let s = real_periodogram(&x, fs, Window::Rectangular);
    let peak = s.bin_of(32.5e6);
    let total = s.total_power();
    assert!(s.power[peak] / total > 1.0 - 1e-9);
}

#[test]
fn macromotion_lines_multiply_into_bessel_product() {
    let mut modulation = Modulation::micro(0.47, 20);
    modulation.macro_motion = Some(MacroMotion {
        f_drive: 620.5e3,
        m_macro: 0.3,
        order_max: 20,
    });
    let list = compose_lines(32.5e6, &modulation).unwrap();
    assert!((list.total_power() - 1.0).abs() <= 1e-9);
    let p = list.power_at(32.5e6 + F_PAUL_HZ + 620.5e3, 1.0).unwrap();
    let expect = (bessel_integral(1, 0.47) * bessel_integral(1, 0.3)).powi(2);
    assert!((p - expect).abs() <= 1e-12);
}

/// Noiseless real record whose lines all fall on exact bins: 5 kHz bins.
fn on_bin_spectrum(m: f64) -> RealSpectrum {
    let fs = 400e6;
    let x = synthesize_timeseries(&HeterodyneConfig::default(), &Modulation::micro(m, 3), 200e-6, fs, false, 0)
        .unwrap();
    real_periodogram(&x, fs, Window::Rectangular)
}

#[test]
fn sideband_ratios_match_bessel_and_are_symmetric() {
    for m in [0.1, 0.47, 1.5] {
        let s = on_bin_spectrum(m);
        let carrier = s.power[s.bin_of(32.5e6)];
        for n in 1..=3 {
            let off = n as f64 * F_PAUL_HZ;
            let up = s.power[s.bin_of(32.5e6 + off)];
            let down = s.power[s.bin_of((32.5e6 - off).abs())];
            let expect = (bessel_integral(n, m) / bessel_integral(0, m)).powi(2);
            assert!((up / carrier / expect - 1.0).abs() <= 0.01, "m={m} n={n} upper");
            assert!((down / carrier / expect - 1.0).abs() <= 0.01, "m={m} n={n} lower");
            assert!((up / down - 1.0).abs() <= 0.01);
        }
    }
}

#[test]
fn parseval_against_line_list() {
    let fs = 1e9;
    for m in [0.0, 0.5, 1.5, 3.0] {
        let modulation = Modulation::micro(m, 20);
        let x = synthesize_timeseries(&HeterodyneConfig::default(), &modulation, 100e-6, fs, false, 0).unwrap();
        let total = real_periodogram(&x, fs, Window::Rectangular).total_power();
        let lines = compose_lines(32.5e6, &modulation).unwrap().total_power();
        let expect = 0.5 * SIGNAL_AMPLITUDE * SIGNAL_AMPLITUDE * lines;
        assert!((total / expect - 1.0).abs() <= 0.01, "m={m}: {total} vs {expect}");
    }
}

#[test]
fn aliasing_sample_rate_is_rejected() {
    let err = synthesize_timeseries(&HeterodyneConfig::default(), &Modulation::micro(0.47, 20), 1e-5, 100e6, false, 0)
        .unwrap_err();
    match err {
        Error::Config { key, .. } => assert_eq!(key, "sample_rate"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn short_record_cannot_resolve_rbw() {
    let cfg = HeterodyneConfig {
        resolution_bandwidth: 10.0,
        ..HeterodyneConfig::default()
    };
    let fs = 80e6;
    let x = synthesize_timeseries(&cfg, &Modulation::micro(0.0, 0), 2e-3, fs, false, 0).unwrap();
    let err = analyzer(&x, fs, &cfg, &AnalyzerOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Resolution { .. }));
}

fn real_path_snr(duration: f64, seed: u64) -> (f64, f64) {
    let cfg = HeterodyneConfig {
        resolution_bandwidth: 1000.0,
        photon_rate: 1e6,
        quantum_efficiency: 1.0,
        ..HeterodyneConfig::default()
    };
    let fs = 80e6;
    let x = synthesize_timeseries(&cfg, &Modulation::micro(0.0, 0), duration, fs, true, seed).unwrap();
    let trace = analyzer(&x, fs, &cfg, &AnalyzerOptions::default()).unwrap();
    let peak = trace.peak();
    assert!((trace.bin_centers[peak] - 50e3).abs() <= trace.bin_spacing().unwrap());
    (trace.measured_snr_db(3), snr_budget(&cfg).unwrap())
}

#[test]
fn real_path_snr_matches_budget() {
    let mut short = Vec::new();
    let mut long = Vec::new();
    for seed in 0..10 {
        let (s, budget) = real_path_snr(16e-3, seed);
        assert!((s - budget).abs() <= 1.0, "seed {seed}: {s} vs {budget}");
        short.push(s);
        let (l, _) = real_path_snr(32e-3, seed + 100);
        assert!((l - budget).abs() <= 1.0, "seed {seed}: {l} vs {budget}");
        long.push(l);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!((mean(&short) - mean(&long)).abs() <= 1.0);
}

#[test]
fn zoomed_snr_matches_budget() {
    let cfg = HeterodyneConfig {
        photon_rate: 4e4,
        quantum_efficiency: 1.0,
        ..HeterodyneConfig::default()
    };
    let budget = snr_budget(&cfg).unwrap();
    assert!((budget - 46.02).abs() < 0.01);
    for seed in 0..12 {
        let trace = zoom_trace(
            &cfg,
            &Modulation::micro(0.0, 0),
            &ZoomTraceOptions {
                averages: 4,
                seed,
                ..ZoomTraceOptions::default()
            },
        )
        .unwrap();
        let snr = trace.measured_snr_db(3);
        assert!((snr - budget).abs() <= 1.0, "seed {seed}: {snr}");
        assert!((trace.bin_centers[trace.peak()] - 50e3).abs() < 1e-3);
    }
}

#[test]
fn white_noise_trace_is_flat() {
    let fs = 1e6;
    let cfg = HeterodyneConfig {
        f_mix: 200e3,
        resolution_bandwidth: 100.0,
        ..HeterodyneConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x: Vec<f64> = (0..1_000_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let opts = AnalyzerOptions {
        window: Window::Rectangular,
        ..AnalyzerOptions::default()
    };
    let trace = analyzer(&x, fs, &cfg, &opts).unwrap();
    let k = trace.averages as f64;
    assert!(k >= 50.0);
    // Group means against the overall mean: χ² with G − 1 degrees of freedom.
    let groups = 8;
    let size = trace.len() / groups;
    let mean: f64 = trace.power[..groups * size].iter().sum::<f64>() / (groups * size) as f64;
    let chi2: f64 = (0..groups)
        .map(|g| {
            let gm = trace.power[g * size..(g + 1) * size].iter().sum::<f64>() / size as f64;
            (gm - mean).powi(2) / (mean * mean / (k * size as f64))
        })
        .sum();
    // 99th percentile of χ² with 7 degrees of freedom.
    assert!(chi2 < 18.475, "{chi2}");
    // Each bin averages k exponential variates.
    let var = trace.power.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / trace.len() as f64;
    assert!((var * k / (mean * mean) - 1.0).abs() < 0.15);
}

#[test]
fn analyzer_peak_is_reproducible() {
    let a = elastic_peak_trace(7).unwrap();
    let b = elastic_peak_trace(7).unwrap();
    assert_eq!(a.peak(), b.peak());
    assert_eq!(a.power, b.power);
    let c = elastic_peak_trace(8).unwrap();
    assert_ne!(a.power, c.power);
}

#[test]
fn micromotion_sideband_is_resolution_limited() {
    let carrier = micromotion_trace(0, 0.47, 30.0, 1).unwrap();
    let sideband = micromotion_trace(1, 0.47, 30.0, 2).unwrap();
    for t in [&carrier, &sideband] {
        assert!((t.bin_centers[t.peak()] - 50e3).abs() < 1e-3);
        let p = t.peak();
        // Hann main lobe: neighbours at −6 dB, everything else at the floor.
        let floor = t.mean_excluding(p, 3);
        assert!(t.power[p + 3] < 10.0 * floor && t.power[p - 3] < 10.0 * floor);
    }
    let ratio = sideband.power[sideband.peak()] / carrier.power[carrier.peak()];
    let expect = (bessel_integral(1, 0.47) / bessel_integral(0, 0.47)).powi(2);
    assert!((10.0 * (ratio / expect).log10()).abs() < 0.3);
}

#[test]
fn budget_examples() {
    let cfg = HeterodyneConfig::default();
    assert!((snr_budget(&cfg).unwrap() - 43.01).abs() < 0.01);
    let wide = HeterodyneConfig {
        resolution_bandwidth: 100.0,
        ..cfg
    };
    assert!((snr_budget(&wide).unwrap() - snr_budget(&cfg).unwrap() + 20.0).abs() < 1e-9);
    let tuned = HeterodyneConfig {
        mode_matching: mode_matching_for_snr(&cfg, 17.0).unwrap(),
        ..cfg
    };
    assert!((snr_budget(&tuned).unwrap() - 17.0).abs() < 1e-9);
    let dark = HeterodyneConfig {
        photon_rate: 0.0,
        ..cfg
    };
    assert!(snr_budget(&dark).is_err());
}

#[test]
fn detectability_examples() {
    let (k_l, k_d) = k_pair();
    let dir = k_d - k_l;
    let a40 = min_detectable_for_snr(40.0, &k_l, &k_d, &dir).unwrap().amplitude();
    assert!((a40 - 1.11e-9).abs() < 0.02e-9, "{a40}");
    let a20 = min_detectable_for_snr(20.0, &k_l, &k_d, &dir).unwrap().amplitude();
    assert!((a20 / a40 - 10.0).abs() < 1e-9);
    let perp = dir.cross(&Vector3::new(0.0, 0.0, 1.0));
    let r = min_detectable_for_snr(40.0, &k_l, &k_d, &perp).unwrap();
    assert_eq!(r, Detectability::Undetectable);
    assert!(r.amplitude().is_infinite());
    assert!(min_detectable_for_snr(-3.0, &k_l, &k_d, &dir).is_err());
}

#[test]
fn trace_csv_has_documented_header() {
    let trace = micromotion_trace(0, 0.47, 30.0, 3).unwrap();
    let mut buf = Vec::new();
    trace.write_csv(&mut buf, false).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    for key in ["# rbw_hz=", "# noise_floor_db=", "# seed=3"] {
        assert!(text.contains(key), "{key}");
    }
    assert!(text.lines().any(|l| l == "freq_hz,power_db"));
    let back = SpectrumTrace::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), trace.len());
    assert!((back.resolution_bandwidth - trace.resolution_bandwidth).abs() < 1e-12);
    for (a, b) in back.power.iter().zip(&trace.power) {
        assert!((a / b - 1.0).abs() < 1e-9);
    }
}

#[test]
fn line_list_json_round_trip() {
    let list = compose_lines(32.5e6, &Modulation::micro(0.47, 4)).unwrap();
    let back = LineList::from_json(&list.to_json().unwrap()).unwrap();
    assert_eq!(back, list);
    let bad = LineList {
        lines: vec![
            Line { frequency_hz: 1.0, relative_power: 0.7, width_hz: 0.0 },
            Line { frequency_hz: 2.0, relative_power: 0.7, width_hz: 0.0 },
        ],
    };
    assert!(bad.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn line_powers_conserve_and_mirror(m in 0.0f64..3.0) {
        let list = compose_lines(32.5e6, &Modulation::micro(m, 20)).unwrap();
        prop_assert!((list.total_power() - 1.0).abs() <= 1e-9);
        for n in 1..=5 {
            let up = list.power_at(32.5e6 + n as f64 * F_PAUL_HZ, 1.0).unwrap();
            let down = list.power_at(32.5e6 - n as f64 * F_PAUL_HZ, 1.0).unwrap();
            prop_assert!((up - down).abs() <= 1e-15);
        }
    }

    #[test]
    fn budget_scales_inversely_with_rbw(rbw in 0.01f64..1e4, factor in 1.0f64..1e3) {
        let a = HeterodyneConfig { resolution_bandwidth: rbw, ..HeterodyneConfig::default() };
        let b = HeterodyneConfig { resolution_bandwidth: rbw * factor, ..a };
        let d = snr_budget(&a).unwrap() - snr_budget(&b).unwrap();
        prop_assert!((d - 10.0 * factor.log10()).abs() < 1e-9);
    }
}
