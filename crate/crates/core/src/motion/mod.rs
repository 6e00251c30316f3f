//! Classical ion motion: radiation-pressure friction and the cooling rate,
//! driven secular oscillation, and the phase-modulation indices that motion
//! imprints on the scattered light.

mod trajectory;

pub use trajectory::{
    damped_trajectory, write_trajectory_csv, ForceProfile, Friction, PhaseSpacePoint,
    TrajectoryOptions, TrajectorySample,
};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::f64::consts::{SQRT_2, TAU};

use crate::atom::Transition;
use crate::bloch::{BlochSystem, ExperimentGeometry};
use crate::error::{Error, Result};
use crate::units::{angular, to_hz, KHZ, MHZ};

/// Secular mode frequencies of the reference trap (Hz).
pub const SECULAR_FREQUENCIES: [f64; 3] = [620.5 * KHZ, 670.0 * KHZ, 1301.0 * KHZ];
pub const F_PAUL: f64 = 18.53 * MHZ;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecularMode {
    /// Hz.
    pub frequency: f64,
    pub axis: Vector3<f64>,
}

impl SecularMode {
    pub fn omega(&self) -> f64 {
        angular(self.frequency)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrapConfig {
    /// rf drive frequency, Hz.
    pub f_paul: f64,
    pub secular_modes: [SecularMode; 3],
    /// Micromotion amplitude vector a (m); the ion moves as a·sin(2π f_paul t).
    pub micromotion_amplitude: Vector3<f64>,
}

impl Default for TrapConfig {
    /// The 620.5 kHz mode lies along (k̂_d − k̂_l)/√2 of the default geometry,
    /// i.e. at 45° to both the laser and the observation direction. The
    /// micromotion amplitude gives m = 0.47.
    fn default() -> Self {
        let g = ExperimentGeometry::default();
        let diff = (g.detection_k - g.laser_k).normalize();
        let sum = (g.detection_k + g.laser_k).normalize();
        let third = diff.cross(&sum);
        let (k_l, k_d) = wave_vectors(&g, crate::atom::LevelScheme::default().wavelength_cooling);
        Self {
            f_paul: F_PAUL,
            secular_modes: [
                SecularMode { frequency: SECULAR_FREQUENCIES[0], axis: diff },
                SecularMode { frequency: SECULAR_FREQUENCIES[1], axis: sum },
                SecularMode { frequency: SECULAR_FREQUENCIES[2], axis: third },
            ],
            micromotion_amplitude: diff * amplitude_for_mod_index(0.47, &k_l, &k_d),
        }
    }
}

impl TrapConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_paul > 0.0) {
            return Err(Error::config("f_paul", "must be positive"));
        }
        for (i, m) in self.secular_modes.iter().enumerate() {
            if !(m.frequency > 0.0) {
                return Err(Error::config(format!("secular_modes[{i}].frequency"), "must be positive"));
            }
            if (m.axis.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::config(format!("secular_modes[{i}].axis"), "must be a unit vector"));
            }
        }
        for i in 0..3 {
            for j in i + 1..3 {
                let d = self.secular_modes[i].axis.dot(&self.secular_modes[j].axis);
                if d.abs() > 1e-9 {
                    return Err(Error::config(
                        "secular_modes",
                        format!("axes {i} and {j} are not orthogonal (dot = {d:e})"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A force drive applied to one secular mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    /// Hz.
    pub f_drive: f64,
    /// Peak force (N) along the mode axis.
    pub force_amplitude: f64,
    pub target_mode: usize,
}

impl DriveConfig {
    /// Force amplitude that, at resonance with α = 2π×750 Hz, gives the
    /// 620.5 kHz mode a modulation index of 1.5 in the default geometry.
    pub fn reference() -> Self {
        let trap = TrapConfig::default();
        let mode = trap.secular_modes[0];
        let g = ExperimentGeometry::default();
        let (k_l, k_d) = wave_vectors(&g, crate::atom::LevelScheme::default().wavelength_cooling);
        let amplitude = 1.5 / mode.axis.dot(&(k_d - k_l)).abs();
        let mass = crate::atom::PhysicalConstants::default().ion_mass;
        Self {
            f_drive: mode.frequency,
            force_amplitude: amplitude * mass * angular(750.0) * mode.omega(),
            target_mode: 0,
        }
    }

    /// Force amplitude from an rf drive power via F = calibration·sqrt(P).
    /// The coupling of a distant electrode is not known a priori, so the
    /// calibration (N/√W) is a free parameter.
    pub fn force_from_dbm(dbm: f64, calibration: f64) -> f64 {
        calibration * (1e-3 * 10f64.powf(dbm / 10.0)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_drive > 0.0) {
            return Err(Error::config("f_drive", "must be positive"));
        }
        if !(self.force_amplitude >= 0.0) {
            return Err(Error::config("force_amplitude", "must be non-negative"));
        }
        if self.target_mode > 2 {
            return Err(Error::config("target_mode", "must be 0, 1 or 2"));
        }
        Ok(())
    }
}

/// Laser-cooling friction coefficient and the slope it derives from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoolingResult {
    /// α in rad/s; positive values damp the motion.
    #[serde(rename = "alpha_rad_per_s")]
    pub alpha: f64,
    /// dP_P/dΔ₄₉₃ in s/rad.
    #[serde(rename = "dp_ddelta_s_per_rad")]
    pub dp_ddelta: f64,
    #[serde(rename = "dp_ddelta_error_s_per_rad")]
    pub dp_ddelta_error: f64,
    /// α/2π.
    pub linewidth_hz: f64,
}

impl CoolingResult {
    fn new(alpha: f64, dp_ddelta: f64, dp_ddelta_error: f64) -> Self {
        Self {
            alpha,
            dp_ddelta,
            dp_ddelta_error,
            linewidth_hz: to_hz(alpha),
        }
    }
}

/// Laser and detection wave vectors (1/m) at wavelength `wavelength`.
pub fn wave_vectors(geometry: &ExperimentGeometry, wavelength: f64) -> (Vector3<f64>, Vector3<f64>) {
    let k = TAU / wavelength;
    (geometry.laser_k * k, geometry.detection_k * k)
}

/// Radiation-pressure force along the 493 nm beam,
/// F(v) = ħkΓ·P_P(Δ − kv), with P_P the steady-state P1/2 population.
pub fn radiation_pressure_force(v: f64, system: &BlochSystem) -> Result<f64> {
    let c = system.config();
    let k = c.cooling.wavenumber();
    let gamma = c.scheme.gamma_sp;
    let detuning = system.detuning(Transition::Cooling) - k * v;
    let pp = system.p_population_at(Transition::Cooling, detuning)?;
    Ok(c.constants.planck_reduced * k * gamma * pp)
}

/// Friction coefficient α = 2·(ħk²/2M)·Γ·dP_P/dΔ for the 493 nm laser,
/// with dP_P/dΔ from Richardson-extrapolated central differences of step `h`.
pub fn cooling_coefficient(system: &BlochSystem, h: f64) -> Result<CoolingResult> {
    let d = system.p_derivative(Transition::Cooling, h)?;
    let c = system.config();
    Ok(alpha_from_slope(system, d.value, d.error, c.constants.ion_mass))
}

/// α for a given slope and ion mass.
pub fn alpha_from_slope(system: &BlochSystem, slope: f64, slope_error: f64, mass: f64) -> CoolingResult {
    let c = system.config();
    let k = c.cooling.wavenumber();
    let recoil = c.constants.planck_reduced * k * k / (2.0 * mass);
    CoolingResult::new(2.0 * recoil * c.scheme.gamma_sp * slope, slope, slope_error)
}

/// Phase-modulation index m = a·(k_d − k_l) of light scattered by an ion
/// oscillating as a·sin Ωt.
pub fn micromotion_mod_index(a: &Vector3<f64>, k_laser: &Vector3<f64>, k_detect: &Vector3<f64>) -> f64 {
    a.dot(&(k_detect - k_laser))
}

/// |a| along (k_d − k_l) that produces modulation index `m`.
pub fn amplitude_for_mod_index(m: f64, k_laser: &Vector3<f64>, k_detect: &Vector3<f64>) -> f64 {
    m / (k_detect - k_laser).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DrivenResponse {
    /// Steady-state displacement amplitude (m).
    pub amplitude: f64,
    pub mod_index: f64,
}

/// Steady state of x'' + αx' + ω₀²x = (F₀/M)cos ωt for the drive's target
/// mode, and the modulation index of that motion along the mode axis.
pub fn driven_response(
    drive: &DriveConfig,
    alpha: f64,
    mode: &SecularMode,
    mass: f64,
    k_laser: &Vector3<f64>,
    k_detect: &Vector3<f64>,
) -> Result<DrivenResponse> {
    if !(alpha > 0.0) {
        return Err(Error::UndampedOscillator { alpha });
    }
    drive.validate()?;
    let w0 = mode.omega();
    let w = angular(drive.f_drive);
    let amplitude = drive.force_amplitude / mass
        / ((w0 * w0 - w * w).powi(2) + (alpha * w).powi(2)).sqrt();
    Ok(DrivenResponse {
        amplitude,
        mod_index: micromotion_mod_index(&(mode.axis * amplitude), k_laser, k_detect),
    })
}

/// Lorentzian modulation-index profile
/// m(f) = m_max / (1 + ((f − f_macro)/(Δf/2))²).
pub fn lorentzian_mod_index(f_drive: f64, m_max: f64, f_macro: f64, delta_f: f64) -> f64 {
    let u = (f_drive - f_macro) / (0.5 * delta_f);
    m_max / (1.0 + u * u)
}

/// The two ways a Lorentzian width Δf fitted to m(f) can be turned into a
/// friction coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthInterpretations {
    /// Δf read as the FWHM of the energy response A²(f): α/2π = Δf.
    pub energy_alpha_hz: f64,
    /// Δf read as the FWHM of the amplitude A(f) (a square-root Lorentzian
    /// near resonance): α/2π = Δf/√3.
    pub amplitude_alpha_hz: f64,
}

pub fn alpha_from_fitted_width(delta_f: f64) -> WidthInterpretations {
    WidthInterpretations {
        energy_alpha_hz: delta_f,
        amplitude_alpha_hz: delta_f / 3f64.sqrt(),
    }
}

/// Bound C in |A(ω₀+δ) − A(ω₀−δ)|/A(ω₀) ≤ (δ/ω₀)·C for δ ≤ α. To leading
/// order in δ/ω₀ the closed form gives C(x) = 2(1 + 2x²)/(1 + 4x²)^{3/2} with
/// x = δ/α, which never exceeds 2.
pub const RESPONSE_ASYMMETRY_CONSTANT: f64 = 2.0;

/// Modulation index of the default micromotion for a right-angle geometry.
pub fn default_micromotion_index() -> f64 {
    let trap = TrapConfig::default();
    let g = ExperimentGeometry::default();
    let (k_l, k_d) = wave_vectors(&g, crate::atom::LevelScheme::default().wavelength_cooling);
    micromotion_mod_index(&trap.micromotion_amplitude, &k_l, &k_d)
}

/// |k_d − k_l| for the default right-angle geometry: k√2.
pub fn right_angle_k_difference(wavelength: f64) -> f64 {
    SQRT_2 * TAU / wavelength
}
