use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::synth::BasebandSeries;
use super::{HeterodyneConfig, SpectrumTrace};
use crate::error::{Error, Result};

/// −6 dB point of the analyzer's low-pass filter.
pub const ANALYZER_CUTOFF_HZ: f64 = 100e3;
const TRANSITION_HZ: f64 = 60e3;
/// Bins beyond this offset lie in the filter's transition band and are not
/// reported.
const PASSBAND_EDGE_HZ: f64 = ANALYZER_CUTOFF_HZ - 0.5 * TRANSITION_HZ;
/// Lowest decimated rate; aliases of the stopband edge then stay outside the
/// reported passband.
const MIN_DECIMATED_RATE: f64 = 250e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
}

impl Window {
    /// Periodic (DFT-even) coefficients.
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Self::Rectangular => vec![1.0; len],
            Self::Hann => (0..len)
                .map(|k| 0.5 - 0.5 * (TAU * k as f64 / len as f64).cos())
                .collect(),
        }
    }

    /// Equivalent noise bandwidth in bins.
    pub fn enbw_bins(self) -> f64 {
        match self {
            Self::Rectangular => 1.0,
            Self::Hann => 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzerOptions {
    pub window: Window,
    /// Maximum number of averaged segments; all complete segments when unset.
    pub averages: Option<usize>,
    /// Reported frequency range on the analyzer axis, Hz.
    pub span: Option<(f64, f64)>,
}

impl Default for AnalyzerOptions {
    fn default() -> Self {
        Self {
            window: Window::Hann,
            averages: None,
            span: None,
        }
    }
}

/// Linear-phase windowed-sinc low-pass (Blackman window), unit DC gain.
/// `cutoff` is the −6 dB point; the tap count is chosen for the given
/// transition width.
pub fn fir_lowpass(cutoff: f64, transition: f64, sample_rate: f64) -> Vec<f64> {
    let mut len = (5.5 * sample_rate / transition).ceil() as usize;
    if len % 2 == 0 {
        len += 1;
    }
    let mid = (len / 2) as f64;
    let fc = cutoff / sample_rate;
    let mut h: Vec<f64> = (0..len)
        .map(|k| {
            let x = k as f64 - mid;
            let sinc = if x == 0.0 {
                2.0 * fc
            } else {
                (TAU * fc * x).sin() / (std::f64::consts::PI * x)
            };
            let t = TAU * k as f64 / (len - 1) as f64;
            sinc * (0.42 - 0.5 * t.cos() + 0.08 * (2.0 * t).cos())
        })
        .collect();
    let sum: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= sum);
    h
}

/// Emulated analyzer chain on a real photodiode record: I/Q mixing with
/// e^{−i 2π f_mix t}, FIR low-pass at 100 kHz, decimation, then a windowed,
/// averaged periodogram whose equivalent noise bandwidth is the configured RBW.
///
/// Power is normalized so that a mixed-down tone of unit amplitude reads 1
/// when it falls on a bin.
pub fn analyzer(
    samples: &[f64],
    sample_rate: f64,
    config: &HeterodyneConfig,
    options: &AnalyzerOptions,
) -> Result<SpectrumTrace> {
    config.validate()?;
    if !(config.f_mix < 0.5 * sample_rate) {
        return Err(Error::config("f_mix", "must lie below the Nyquist frequency"));
    }
    let taps = fir_lowpass(ANALYZER_CUTOFF_HZ, TRANSITION_HZ, sample_rate);
    let decimation = ((sample_rate / MIN_DECIMATED_RATE).floor() as usize).max(1);
    if samples.len() < taps.len() + decimation {
        return Err(Error::config(
            "duration",
            format!(
                "record of {} samples is shorter than the {}-tap low-pass filter",
                samples.len(),
                taps.len()
            ),
        ));
    }
    let (re, im): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = config.f_mix * i as f64 / sample_rate;
            let (s, co) = (TAU * (c - c.floor())).sin_cos();
            (x * co, -x * s)
        })
        .unzip();
    let outputs = (samples.len() - taps.len()) / decimation + 1;
    let filtered: Vec<Complex64> = (0..outputs)
        .map(|j| {
            let start = j * decimation;
            let r = &re[start..start + taps.len()];
            let q = &im[start..start + taps.len()];
            let mut acc_r = 0.0;
            let mut acc_i = 0.0;
            for k in 0..taps.len() {
                acc_r += taps[k] * r[k];
                acc_i += taps[k] * q[k];
            }
            Complex64::new(acc_r, acc_i)
        })
        .collect();
    let series = BasebandSeries {
        samples: filtered,
        sample_rate: sample_rate / decimation as f64,
        center_hz: 0.0,
    };
    let mut trace = analyze_baseband(&series, config.resolution_bandwidth, options)?;
    trace.retain(|f| f.abs() <= PASSBAND_EDGE_HZ);
    Ok(trace)
}

/// Averaged periodogram of a complex analyzer input. The segment length is
/// set so that the window's equivalent noise bandwidth equals `rbw`; the RBW
/// actually achieved is recorded in the trace.
pub fn analyze_baseband(
    series: &BasebandSeries,
    rbw: f64,
    options: &AnalyzerOptions,
) -> Result<SpectrumTrace> {
    let fs = series.sample_rate;
    let n = series.samples.len();
    let enbw = options.window.enbw_bins();
    let min_hz = enbw * fs / n as f64;
    if !(rbw > 0.0) || rbw < min_hz * (1.0 - 1e-9) {
        return Err(Error::Resolution { rbw_hz: rbw, min_hz });
    }
    let len = ((enbw * fs / rbw).round() as usize).max(2).min(n);
    let mut segments = n / len;
    if let Some(a) = options.averages {
        if a == 0 {
            return Err(Error::config("averages", "must be at least 1"));
        }
        segments = segments.min(a);
    }
    let w = options.window.coefficients(len);
    let coherent: f64 = w.iter().sum();
    let incoherent: f64 = w.iter().map(|v| v * v).sum();
    let norm = 1.0 / (coherent * coherent);
    let fft = FftPlanner::new().plan_fft_forward(len);
    let mut acc = vec![0.0; len];
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for s in 0..segments {
        let seg = &series.samples[s * len..(s + 1) * len];
        for ((b, z), wk) in buf.iter_mut().zip(seg).zip(&w) {
            *b = z * wk;
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr() * norm;
        }
    }
    let kmin = -((len / 2) as i64);
    let spacing = fs / len as f64;
    let mut bin_centers = Vec::with_capacity(len);
    let mut power = Vec::with_capacity(len);
    for j in 0..len as i64 {
        let k = kmin + j;
        let idx = k.rem_euclid(len as i64) as usize;
        bin_centers.push(series.center_hz + k as f64 * spacing);
        power.push(acc[idx] / segments as f64);
    }
    let achieved = len as f64 * incoherent / (coherent * coherent) * spacing;
    let mut trace = SpectrumTrace::new(bin_centers, power, achieved);
    trace.averages = segments;
    if let Some((lo, hi)) = options.span {
        if !(hi > lo) {
            return Err(Error::config("span", "upper edge must exceed lower edge"));
        }
        trace.retain(|f| f >= lo && f <= hi);
    }
    if trace.bin_centers.is_empty() {
        return Err(Error::config("span", "no bins inside the requested span"));
    }
    trace.estimate_noise_floor();
    Ok(trace)
}

/// One-sided power spectrum of a real record.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSpectrum {
    pub frequencies: Vec<f64>,
    /// Mean-square power per bin; an on-bin tone A·cos(2πft) reads A²/2.
    pub power: Vec<f64>,
}

impl RealSpectrum {
    pub fn bin_of(&self, f: f64) -> usize {
        let df = self.frequencies[1] - self.frequencies[0];
        ((f / df).round() as usize).min(self.frequencies.len() - 1)
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }
}

/// Single-segment periodogram of a real record.
pub fn real_periodogram(samples: &[f64], sample_rate: f64, window: Window) -> RealSpectrum {
    let len = samples.len();
    let w = window.coefficients(len);
    let coherent: f64 = w.iter().sum();
    let mut buf: Vec<Complex64> = samples
        .iter()
        .zip(&w)
        .map(|(x, wk)| Complex64::new(x * wk, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let norm = 1.0 / (coherent * coherent);
    let half = len / 2;
    let frequencies = (0..=half).map(|k| k as f64 * sample_rate / len as f64).collect();
    let power = (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr() * norm;
            if k == 0 || (len % 2 == 0 && k == half) {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    RealSpectrum { frequencies, power }
}
