//! Heterodyne detection of the scattered light: the analytic line list of a
//! phase-modulated carrier, shot-noise-limited signal synthesis, an emulated
//! mixer plus FFT analyzer, and the SNR budget.

mod dsp;
pub mod recipes;
mod synth;
mod trace;

pub use dsp::{
    analyze_baseband, analyzer, fir_lowpass, real_periodogram, AnalyzerOptions, RealSpectrum,
    Window, ANALYZER_CUTOFF_HZ,
};
pub use synth::{synthesize_baseband, synthesize_timeseries, BasebandSeries, ZoomOptions};
pub use trace::SpectrumTrace;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::motion::F_PAUL;
use crate::units::MHZ;

/// Amplitude C of the photocurrent interference term. With C = 2 the
/// mixed-down carrier has unit amplitude, so an unmodulated carrier reads 0 dB
/// on the analyzer.
pub const SIGNAL_AMPLITUDE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeterodyneConfig {
    /// Frequency shift of the local-oscillator beam, Hz.
    pub f_aom1: f64,
    /// Frequency shift of the excitation beam, Hz.
    pub f_aom2: f64,
    /// Analyzer reference frequency, Hz.
    pub f_mix: f64,
    /// Hz.
    pub resolution_bandwidth: f64,
    /// Detected fluorescence photon rate N (1/s).
    pub photon_rate: f64,
    pub quantum_efficiency: f64,
    pub mode_matching: f64,
    /// Unexplained additional loss (dB ≥ 0) applied on top of η·μ.
    pub extra_loss_db: f64,
}

impl Default for HeterodyneConfig {
    fn default() -> Self {
        Self {
            f_aom1: 112.5 * MHZ,
            f_aom2: 80.0 * MHZ,
            f_mix: 32.45 * MHZ,
            resolution_bandwidth: 1.0,
            photon_rate: 2.5e4,
            quantum_efficiency: 0.8,
            mode_matching: 1.0,
            extra_loss_db: 0.0,
        }
    }
}

impl HeterodyneConfig {
    pub fn f_beat(&self) -> f64 {
        self.f_aom1 - self.f_aom2
    }

    /// Carrier power over noise power per Hz: μ·η·N, reduced by the extra loss.
    pub fn detected_rate(&self) -> f64 {
        self.mode_matching * self.quantum_efficiency * self.photon_rate
            * 10f64.powf(-self.extra_loss_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_aom1 > 0.0 && self.f_aom2 > 0.0) || !(self.f_beat() > 0.0) {
            return Err(Error::config("f_aom1", "AOM frequencies must be positive with f_aom1 > f_aom2"));
        }
        if !(self.f_mix > 0.0) {
            return Err(Error::config("f_mix", "must be positive"));
        }
        if !(self.resolution_bandwidth > 0.0) || !self.resolution_bandwidth.is_finite() {
            return Err(Error::config("resolution_bandwidth", "must be positive"));
        }
        if !(self.photon_rate >= 0.0) || !self.photon_rate.is_finite() {
            return Err(Error::config("photon_rate", "must be non-negative"));
        }
        if !(self.quantum_efficiency > 0.0 && self.quantum_efficiency <= 1.0) {
            return Err(Error::config("quantum_efficiency", "must lie in (0, 1]"));
        }
        if !(self.mode_matching > 0.0 && self.mode_matching <= 1.0) {
            return Err(Error::config("mode_matching", "must lie in (0, 1]"));
        }
        if !(self.extra_loss_db >= 0.0) || !self.extra_loss_db.is_finite() {
            return Err(Error::config("extra_loss_db", "must be non-negative"));
        }
        Ok(())
    }
}

/// Driven secular motion that adds a second phase modulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacroMotion {
    /// Hz.
    pub f_drive: f64,
    pub m_macro: f64,
    #[serde(default = "default_order")]
    pub order_max: u32,
}

fn default_order() -> u32 {
    20
}

/// Phase modulation of the scattered light:
/// φ(t) = m_micro·sin(2π f_paul t) + m_macro·sin(2π f_drive t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Modulation {
    pub m_micro: f64,
    /// Hz.
    pub f_paul: f64,
    pub micro_order_max: u32,
    pub macro_motion: Option<MacroMotion>,
}

impl Default for Modulation {
    fn default() -> Self {
        Self {
            m_micro: 0.0,
            f_paul: F_PAUL,
            micro_order_max: default_order(),
            macro_motion: None,
        }
    }
}

impl Modulation {
    pub fn micro(m_micro: f64, micro_order_max: u32) -> Self {
        Self {
            m_micro,
            micro_order_max,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m_micro >= 0.0) || !self.m_micro.is_finite() {
            return Err(Error::config("m_micro", "must be non-negative"));
        }
        if !(self.f_paul > 0.0) {
            return Err(Error::config("f_paul", "must be positive"));
        }
        if let Some(mm) = &self.macro_motion {
            if !(mm.m_macro >= 0.0) || !mm.m_macro.is_finite() {
                return Err(Error::config("m_macro", "must be non-negative"));
            }
            if !(mm.f_drive > 0.0) {
                return Err(Error::config("f_drive", "must be positive"));
            }
        }
        Ok(())
    }

    /// Highest frequency offset from the beat note among the listed lines.
    pub fn max_offset(&self) -> f64 {
        let micro = self.micro_order_max as f64 * self.f_paul;
        let mac = self
            .macro_motion
            .map_or(0.0, |mm| mm.order_max as f64 * mm.f_drive);
        micro + mac
    }

    /// (offset Hz, complex-envelope amplitude) of every line, from
    /// e^{i m sin θ} = Σ J_n(m) e^{i n θ}.
    pub(crate) fn envelope_lines(&self) -> Vec<(f64, f64)> {
        let nm = self.micro_order_max as i32;
        let micro: Vec<(f64, f64)> = (-nm..=nm)
            .map(|n| (n as f64 * self.f_paul, bessel_j(n, self.m_micro)))
            .collect();
        match &self.macro_motion {
            None => micro,
            Some(mm) => {
                let nl = mm.order_max as i32;
                let mut out = Vec::with_capacity(micro.len() * (2 * nl as usize + 1));
                for &(f, a) in &micro {
                    for l in -nl..=nl {
                        out.push((f + l as f64 * mm.f_drive, a * bessel_j(l, mm.m_macro)));
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub frequency_hz: f64,
    /// Fraction of the unmodulated carrier power.
    pub relative_power: f64,
    /// 0 for a delta line.
    #[serde(default)]
    pub width_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineList {
    pub lines: Vec<Line>,
}

impl LineList {
    pub fn total_power(&self) -> f64 {
        self.lines.iter().map(|l| l.relative_power).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for l in &self.lines {
            if !(l.relative_power >= 0.0) || !(l.width_hz >= 0.0) || !l.frequency_hz.is_finite() {
                return Err(Error::domain(format!("invalid line {l:?}")));
            }
        }
        let total = self.total_power();
        if total > 1.0 + 1e-9 {
            return Err(Error::domain(format!("line powers sum to {total} > 1")));
        }
        Ok(())
    }

    /// Power of the line nearest to `frequency_hz` within `tolerance_hz`.
    pub fn power_at(&self, frequency_hz: f64, tolerance_hz: f64) -> Option<f64> {
        self.lines
            .iter()
            .filter(|l| (l.frequency_hz - frequency_hz).abs() <= tolerance_hz)
            .map(|l| l.relative_power)
            .reduce(|a, b| a + b)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let list: Self = serde_json::from_str(s)?;
        list.validate()?;
        Ok(list)
    }
}

/// Carrier at `f_beat` with weight J₀(m)², micromotion sidebands at
/// f_beat ± n·f_paul with weight J_n(m)², and, with driven motion, the product
/// lines at f_beat + n·f_paul + l·f_drive weighted J_n(m)²·J_l(m_macro)².
pub fn compose_lines(f_beat: f64, modulation: &Modulation) -> Result<LineList> {
    modulation.validate()?;
    let lines = modulation
        .envelope_lines()
        .into_iter()
        .map(|(offset, a)| Line {
            frequency_hz: f_beat + offset,
            relative_power: a * a,
            width_hz: 0.0,
        })
        .collect();
    Ok(LineList { lines })
}

/// 10·log₁₀(μ·η·N / RBW).
pub fn snr_budget(config: &HeterodyneConfig) -> Result<f64> {
    if !(config.photon_rate > 0.0) {
        return Err(Error::config("photon_rate", "must be positive for an SNR budget"));
    }
    Ok(10.0 * (config.detected_rate() / config.resolution_bandwidth).log10())
}

/// Mode-matching factor that makes `snr_budget` equal `target_db`.
pub fn mode_matching_for_snr(config: &HeterodyneConfig, target_db: f64) -> Result<f64> {
    let unmatched = HeterodyneConfig {
        mode_matching: 1.0,
        ..*config
    };
    let headroom = snr_budget(&unmatched)? - target_db;
    if headroom < 0.0 {
        return Err(Error::domain(format!(
            "target SNR {target_db} dB exceeds the {:.2} dB budget at perfect mode matching",
            target_db + headroom
        )));
    }
    Ok(10f64.powf(-headroom / 10.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Detectability {
    Detectable {
        /// m.
        amplitude: f64,
        mod_index: f64,
    },
    /// The motion has no component along k_d − k_l.
    Undetectable,
}

impl Detectability {
    pub fn amplitude(&self) -> f64 {
        match self {
            Self::Detectable { amplitude, .. } => *amplitude,
            Self::Undetectable => f64::INFINITY,
        }
    }
}

/// Smallest micromotion amplitude along `direction` whose first sideband,
/// (m/2)² of the carrier, equals the noise in one RBW at `snr_db`.
pub fn min_detectable_for_snr(
    snr_db: f64,
    k_laser: &Vector3<f64>,
    k_detect: &Vector3<f64>,
    direction: &Vector3<f64>,
) -> Result<Detectability> {
    if !(snr_db >= 0.0) {
        return Err(Error::domain(format!("SNR {snr_db} dB is below 0 dB")));
    }
    let n = direction.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::config("direction", "must be a non-zero vector"));
    }
    let m_min = 2.0 * 10f64.powf(-snr_db / 20.0);
    let dk = k_detect - k_laser;
    let projection = (dk.dot(direction) / n).abs();
    if projection <= 1e-12 * dk.norm() {
        return Ok(Detectability::Undetectable);
    }
    Ok(Detectability::Detectable {
        amplitude: m_min / projection,
        mod_index: m_min,
    })
}

/// `min_detectable_for_snr` at the SNR budget of `config`.
pub fn min_detectable_micromotion(
    config: &HeterodyneConfig,
    k_laser: &Vector3<f64>,
    k_detect: &Vector3<f64>,
    direction: &Vector3<f64>,
) -> Result<Detectability> {
    min_detectable_for_snr(snr_budget(config)?, k_laser, k_detect, direction)
}
