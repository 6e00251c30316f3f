use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::{HeterodyneConfig, Modulation, ANALYZER_CUTOFF_HZ, SIGNAL_AMPLITUDE};
use crate::error::{Error, Result};

/// Upper bound on samples held in memory by one synthesis call.
pub const MAX_SAMPLES: usize = 1 << 25;

/// cos/sin of 2π·frac(f·t) for sample `n`; keeping only the fractional cycle
/// count avoids losing phase precision on long records.
#[inline]
fn cycles(f: f64, n: usize, fs: f64) -> f64 {
    let c = f * (n as f64) / fs;
    TAU * (c - c.floor())
}

fn noise_sigma(config: &HeterodyneConfig, sample_rate: f64) -> Result<f64> {
    let rate = config.detected_rate();
    if !(rate > 0.0) {
        return Err(Error::config("photon_rate", "must be positive when shot noise is enabled"));
    }
    // Carrier power C²/2 over the one-sided noise density 2σ²/fs equals the
    // detected rate.
    Ok((SIGNAL_AMPLITUDE * SIGNAL_AMPLITUDE * sample_rate / (4.0 * rate)).sqrt())
}

/// Photodiode difference signal
/// S(t) = C·cos(2π f_beat t + m_micro sin(2π f_paul t) + m_macro sin(2π f_drive t))
/// plus white Gaussian shot noise, sampled at `sample_rate`.
pub fn synthesize_timeseries(
    config: &HeterodyneConfig,
    modulation: &Modulation,
    duration: f64,
    sample_rate: f64,
    noise: bool,
    seed: u64,
) -> Result<Vec<f64>> {
    config.validate()?;
    modulation.validate()?;
    let top = config.f_beat() + modulation.max_offset();
    if !(sample_rate > 2.0 * top) {
        return Err(Error::config(
            "sample_rate",
            format!("{sample_rate} Hz aliases lines up to {top} Hz"),
        ));
    }
    if !(duration > 0.0) {
        return Err(Error::config("duration", "must be positive"));
    }
    let n = (duration * sample_rate).round();
    if n > MAX_SAMPLES as f64 {
        return Err(Error::config(
            "duration",
            format!("{n} samples exceed the {MAX_SAMPLES} sample budget"),
        ));
    }
    let n = n as usize;
    let f_beat = config.f_beat();
    let mac = modulation.macro_motion;
    let mut out: Vec<f64> = (0..n)
        .map(|i| {
            let mut phase = cycles(f_beat, i, sample_rate)
                + modulation.m_micro * cycles(modulation.f_paul, i, sample_rate).sin();
            if let Some(mm) = &mac {
                phase += mm.m_macro * cycles(mm.f_drive, i, sample_rate).sin();
            }
            SIGNAL_AMPLITUDE * phase.cos()
        })
        .collect();
    if noise {
        let sigma = noise_sigma(config, sample_rate)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for x in &mut out {
            let g: f64 = StandardNormal.sample(&mut rng);
            *x += sigma * g;
        }
    }
    Ok(out)
}

/// Complex analyzer input after I/Q mixing and low-pass filtering, shifted to
/// `center_hz` on the analyzer axis and decimated to `sample_rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSeries {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    /// Analyzer frequency that sits at 0 in `samples`, Hz.
    pub center_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoomOptions {
    /// Analyzer frequency at the zoom center, Hz.
    pub center_hz: f64,
    /// Complex sample rate, equal to the analyzed span, Hz.
    pub sample_rate: f64,
    pub duration: f64,
    pub noise: bool,
    pub seed: u64,
}

/// Zoomed complex envelope of the analyzer input, generated directly from the
/// line amplitudes rather than by mixing a full-rate record.
///
/// Every line at f maps to f − f_mix on the analyzer axis; lines outside the
/// analyzer's low-pass band or outside the zoom span are removed as an ideal
/// filter would. The shot noise is complex white with the same density the
/// full-rate path produces after mixing, so both paths give the same SNR.
/// This makes sub-Hz resolution bandwidths feasible.
pub fn synthesize_baseband(
    config: &HeterodyneConfig,
    modulation: &Modulation,
    zoom: &ZoomOptions,
) -> Result<BasebandSeries> {
    config.validate()?;
    modulation.validate()?;
    if !(zoom.sample_rate > 0.0) {
        return Err(Error::config("sample_rate", "must be positive"));
    }
    if !(zoom.duration > 0.0) {
        return Err(Error::config("duration", "must be positive"));
    }
    if zoom.center_hz.abs() + 0.5 * zoom.sample_rate > ANALYZER_CUTOFF_HZ {
        return Err(Error::config(
            "center_hz",
            format!("zoom span exceeds the {ANALYZER_CUTOFF_HZ} Hz analyzer band"),
        ));
    }
    let n = (zoom.duration * zoom.sample_rate).round();
    if n > MAX_SAMPLES as f64 {
        return Err(Error::config(
            "duration",
            format!("{n} samples exceed the {MAX_SAMPLES} sample budget"),
        ));
    }
    let n = n as usize;
    let half = 0.5 * zoom.sample_rate;
    let offset = config.f_beat() - config.f_mix - zoom.center_hz;
    let tones: Vec<(f64, f64)> = modulation
        .envelope_lines()
        .into_iter()
        .map(|(f, a)| (f + offset, 0.5 * SIGNAL_AMPLITUDE * a))
        .filter(|&(f, a)| a != 0.0 && f >= -half && f < half)
        .collect();
    let mut samples: Vec<Complex64> = (0..n)
        .map(|i| {
            tones
                .iter()
                .map(|&(f, a)| Complex64::from_polar(a, cycles(f, i, zoom.sample_rate)))
                .sum()
        })
        .collect();
    if zoom.noise {
        let full = noise_sigma(config, zoom.sample_rate)?;
        // Mixing splits the real noise variance evenly between I and Q.
        let sigma = full / std::f64::consts::SQRT_2;
        let mut rng = ChaCha8Rng::seed_from_u64(zoom.seed);
        for z in &mut samples {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *z += Complex64::new(sigma * re, sigma * im);
        }
    }
    Ok(BasebandSeries {
        samples,
        sample_rate: zoom.sample_rate,
        center_hz: zoom.center_hz,
    })
}
