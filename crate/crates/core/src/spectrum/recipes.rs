//! Reproducible synthetic datasets: the RBW-limited elastic peak, the
//! micromotion sidebands and the driven-response carrier/sideband pair.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{
    analyze_baseband, mode_matching_for_snr, synthesize_baseband, AnalyzerOptions,
    HeterodyneConfig, Modulation, SpectrumTrace, Window, ZoomOptions,
};
use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::motion::lorentzian_mod_index;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZoomTraceOptions {
    /// Number of analyzer bins across the zoom span.
    pub bins: usize,
    pub averages: usize,
    pub window: Window,
    /// Zoom center on the analyzer axis; defaults to where the carrier lands,
    /// f_beat − f_mix.
    pub center_hz: Option<f64>,
    pub noise: bool,
    pub seed: u64,
}

impl Default for ZoomTraceOptions {
    fn default() -> Self {
        Self {
            bins: 256,
            averages: 1,
            window: Window::Hann,
            center_hz: None,
            noise: true,
            seed: 0,
        }
    }
}

/// Analyzer trace of `bins` bins at the configured RBW around `center_hz`,
/// from the zoomed complex envelope. The span is bins × bin spacing, with
/// the bin spacing RBW / ENBW.
pub fn zoom_trace(
    config: &HeterodyneConfig,
    modulation: &Modulation,
    options: &ZoomTraceOptions,
) -> Result<SpectrumTrace> {
    if options.bins < 2 {
        return Err(Error::config("bins", "need at least 2 bins"));
    }
    if options.averages == 0 {
        return Err(Error::config("averages", "must be at least 1"));
    }
    let rbw = config.resolution_bandwidth;
    let sample_rate = options.bins as f64 * rbw / options.window.enbw_bins();
    let center_hz = options.center_hz.unwrap_or(config.f_beat() - config.f_mix);
    let zoom = ZoomOptions {
        center_hz,
        sample_rate,
        duration: (options.averages * options.bins) as f64 / sample_rate,
        noise: options.noise,
        seed: options.seed,
    };
    let series = synthesize_baseband(config, modulation, &zoom)?;
    let analyzer = AnalyzerOptions {
        window: options.window,
        averages: Some(options.averages),
        span: None,
    };
    let mut trace = analyze_baseband(&series, rbw, &analyzer)?;
    trace.seed = options.noise.then_some(options.seed);
    Ok(trace)
}

/// Detection settings of the elastic-peak measurement: 17 dB SNR at unit
/// bandwidth (set through the mode matching), RBW 61 mHz, carrier mixed
/// down to 50 kHz.
pub fn elastic_peak_config() -> Result<HeterodyneConfig> {
    let mut config = HeterodyneConfig {
        resolution_bandwidth: 1.0,
        ..HeterodyneConfig::default()
    };
    config.mode_matching = mode_matching_for_snr(&config, 17.0)?;
    config.resolution_bandwidth = 0.061;
    Ok(config)
}

/// The elastic peak at 61 mHz RBW. The rectangular window keeps an on-bin
/// line in a single bin; ten averages keep the noise bins well below 6 dB
/// above their mean.
pub fn elastic_peak_trace(seed: u64) -> Result<SpectrumTrace> {
    let config = elastic_peak_config()?;
    zoom_trace(
        &config,
        &Modulation::micro(0.0, 0),
        &ZoomTraceOptions {
            bins: 1024,
            averages: 10,
            window: Window::Rectangular,
            center_hz: None,
            noise: true,
            seed,
        },
    )
}

/// Micromotion line of order `n` (0 = carrier) mixed down to 50 kHz by
/// setting f_mix = f₀ + n·f_paul, at 1 Hz RBW.
pub fn micromotion_trace(n: i32, m_micro: f64, snr_unit_db: f64, seed: u64) -> Result<SpectrumTrace> {
    let modulation = Modulation::micro(m_micro, n.unsigned_abs().max(20));
    let mut config = HeterodyneConfig::default();
    config.mode_matching = mode_matching_for_snr(&config, snr_unit_db)?;
    config.f_mix += n as f64 * modulation.f_paul;
    let offset = n as f64 * modulation.f_paul;
    zoom_trace(
        &config,
        &modulation,
        &ZoomTraceOptions {
            bins: 128,
            averages: 4,
            center_hz: Some(config.f_beat() + offset - config.f_mix),
            seed,
            ..ZoomTraceOptions::default()
        },
    )
}

/// Parameters of the drive-frequency response |A_n J_n(m(f))|² with a
/// Lorentzian m(f).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SidebandResponse {
    /// Carrier height far from resonance.
    pub carrier_scale: f64,
    /// Sideband height scale.
    pub sideband_scale: f64,
    pub m_max: f64,
    /// Hz.
    pub delta_f: f64,
    /// Hz.
    pub f_macro: f64,
}

impl Default for SidebandResponse {
    fn default() -> Self {
        Self {
            carrier_scale: 1.0,
            sideband_scale: 1.0,
            m_max: 1.5,
            delta_f: 750.0,
            f_macro: 620.5e3,
        }
    }
}

impl SidebandResponse {
    pub fn carrier(&self, f: f64) -> f64 {
        let m = lorentzian_mod_index(f, self.m_max, self.f_macro, self.delta_f);
        self.carrier_scale * bessel_j(0, m).powi(2)
    }

    pub fn sideband(&self, f: f64) -> f64 {
        let m = lorentzian_mod_index(f, self.m_max, self.f_macro, self.delta_f);
        self.sideband_scale * bessel_j(1, m).powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveScan {
    /// Hz.
    pub start: f64,
    /// Hz.
    pub stop: f64,
    pub points: usize,
    /// Gaussian noise σ as a fraction of each trace's scale.
    pub relative_noise: f64,
    pub seed: u64,
}

impl Default for DriveScan {
    fn default() -> Self {
        Self {
            start: 617.5e3,
            stop: 623.5e3,
            points: 241,
            relative_noise: 0.01,
            seed: 0,
        }
    }
}

impl DriveScan {
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Carrier and first-sideband heights versus drive frequency. The traces
/// store linear power; with noise some entries may be negative, so write
/// them with the linear CSV column.
pub fn driven_response_traces(
    response: &SidebandResponse,
    scan: &DriveScan,
) -> Result<(SpectrumTrace, SpectrumTrace)> {
    if scan.points < 2 || !(scan.stop > scan.start) {
        return Err(Error::config("points", "scan needs ≥ 2 points and stop > start"));
    }
    if !(scan.relative_noise >= 0.0) {
        return Err(Error::config("relative_noise", "must be non-negative"));
    }
    let grid = scan.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(scan.seed);
    let mut noisy = |scale: f64, v: f64| {
        let g: f64 = StandardNormal.sample(&mut rng);
        v + scan.relative_noise * scale * g
    };
    let carrier: Vec<f64> = grid
        .iter()
        .map(|&f| noisy(response.carrier_scale, response.carrier(f)))
        .collect();
    let sideband: Vec<f64> = grid
        .iter()
        .map(|&f| noisy(response.sideband_scale, response.sideband(f)))
        .collect();
    let make = |power: Vec<f64>| {
        let mut t = SpectrumTrace::new(grid.clone(), power, 1.0);
        t.seed = Some(scan.seed);
        t
    };
    Ok((make(carrier), make(sideband)))
}
