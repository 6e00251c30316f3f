//! Ba⁺ level structure, physical constants, Zeeman shifts and laser couplings.

mod coupling;

pub use coupling::{clebsch_gordan, coupling_coefficient};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::units::{angular, angular_as_hz, MHZ, MW_PER_CM2, NM};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// ¹³⁸Ba⁺ mass in atomic mass units.
pub const BARIUM_MASS_U: f64 = 137.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalConstants {
    pub planck_reduced: f64,
    pub bohr_magneton: f64,
    pub speed_of_light: f64,
    pub atomic_mass_unit: f64,
    pub ion_mass: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            planck_reduced: HBAR,
            bohr_magneton: BOHR_MAGNETON,
            speed_of_light: SPEED_OF_LIGHT,
            atomic_mass_unit: ATOMIC_MASS_UNIT,
            ion_mass: BARIUM_MASS_U * ATOMIC_MASS_UNIT,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("planck_reduced", self.planck_reduced),
            ("bohr_magneton", self.bohr_magneton),
            ("speed_of_light", self.speed_of_light),
            ("atomic_mass_unit", self.atomic_mass_unit),
            ("ion_mass", self.ion_mass),
        ];
        for (key, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, "must be finite and positive"));
            }
        }
        Ok(())
    }

    pub fn planck(&self) -> f64 {
        TAU * self.planck_reduced
    }
}

/// Fine-structure terms of Ba⁺ taking part in Doppler cooling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    #[serde(rename = "S1/2")]
    S12,
    #[serde(rename = "P1/2")]
    P12,
    #[serde(rename = "D3/2")]
    D32,
}

impl Term {
    /// 2J.
    pub fn twice_j(self) -> i32 {
        match self {
            Term::S12 | Term::P12 => 1,
            Term::D32 => 3,
        }
    }
}

/// A Zeeman sublevel `|term, m⟩`, with `m` stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sublevel {
    pub term: Term,
    pub twice_m: i32,
}

impl Sublevel {
    pub const fn new(term: Term, twice_m: i32) -> Self {
        Self { term, twice_m }
    }

    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        let j2 = self.term.twice_j();
        if self.twice_m.abs() > j2 || (j2 - self.twice_m) % 2 != 0 {
            return Err(Error::domain(format!(
                "m = {}/2 is not a sublevel of {:?}",
                self.twice_m, self.term
            )));
        }
        Ok(())
    }
}

/// Basis ordering used for every density matrix in the crate.
pub const STATES: [Sublevel; 8] = [
    Sublevel::new(Term::S12, -1),
    Sublevel::new(Term::S12, 1),
    Sublevel::new(Term::P12, -1),
    Sublevel::new(Term::P12, 1),
    Sublevel::new(Term::D32, -3),
    Sublevel::new(Term::D32, -1),
    Sublevel::new(Term::D32, 1),
    Sublevel::new(Term::D32, 3),
];

pub fn state_index(level: Sublevel) -> Option<usize> {
    STATES.iter().position(|s| *s == level)
}

/// Indices of all sublevels of `term` in [`STATES`].
pub fn term_indices(term: Term) -> impl Iterator<Item = usize> {
    STATES
        .iter()
        .enumerate()
        .filter(move |(_, s)| s.term == term)
        .map(|(i, _)| i)
}

/// The two dipole transitions sharing the P1/2 upper level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    /// S1/2 ↔ P1/2 at 493.4 nm.
    Cooling,
    /// D3/2 ↔ P1/2 at 649.7 nm.
    Repump,
}

impl Transition {
    pub fn lower_term(self) -> Term {
        match self {
            Transition::Cooling => Term::S12,
            Transition::Repump => Term::D32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandeFactors {
    pub s12: f64,
    pub p12: f64,
    pub d32: f64,
}

impl Default for LandeFactors {
    fn default() -> Self {
        Self {
            s12: 2.0,
            p12: 2.0 / 3.0,
            d32: 4.0 / 5.0,
        }
    }
}

impl LandeFactors {
    pub fn get(&self, term: Term) -> f64 {
        match term {
            Term::S12 => self.s12,
            Term::P12 => self.p12,
            Term::D32 => self.d32,
        }
    }
}

/// The eight-level S1/2–P1/2–D3/2 system.
///
/// Decay rates are angular frequencies; in files they appear as Hz
/// (`gamma_sp_hz`, `gamma_pd_hz`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LevelScheme {
    pub lande_g: LandeFactors,
    /// P1/2 → S1/2 partial decay rate.
    #[serde(with = "angular_as_hz", rename = "gamma_sp_hz")]
    pub gamma_sp: f64,
    /// P1/2 → D3/2 partial decay rate.
    #[serde(with = "angular_as_hz", rename = "gamma_pd_hz")]
    pub gamma_pd: f64,
    pub wavelength_cooling: f64,
    pub wavelength_repump: f64,
}

impl Default for LevelScheme {
    fn default() -> Self {
        Self {
            lande_g: LandeFactors::default(),
            gamma_sp: angular(15.1 * MHZ),
            gamma_pd: angular(5.3 * MHZ),
            wavelength_cooling: 493.4 * NM,
            wavelength_repump: 649.7 * NM,
        }
    }
}

impl LevelScheme {
    pub fn states(&self) -> &'static [Sublevel; 8] {
        &STATES
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("gamma_sp_hz", self.gamma_sp),
            ("gamma_pd_hz", self.gamma_pd),
            ("wavelength_cooling", self.wavelength_cooling),
            ("wavelength_repump", self.wavelength_repump),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, "must be finite and positive"));
            }
        }
        Ok(())
    }

    /// Total P1/2 decay rate.
    pub fn gamma_total(&self) -> f64 {
        self.gamma_sp + self.gamma_pd
    }

    pub fn partial_rate(&self, transition: Transition) -> f64 {
        match transition {
            Transition::Cooling => self.gamma_sp,
            Transition::Repump => self.gamma_pd,
        }
    }

    pub fn wavelength(&self, transition: Transition) -> f64 {
        match transition {
            Transition::Cooling => self.wavelength_cooling,
            Transition::Repump => self.wavelength_repump,
        }
    }

    /// The transition a laser of this wavelength addresses (within 1 nm).
    pub fn transition_for(&self, wavelength: f64) -> Result<Transition> {
        [Transition::Cooling, Transition::Repump]
            .into_iter()
            .find(|t| (self.wavelength(*t) - wavelength).abs() < 1.0 * NM)
            .ok_or_else(|| {
                Error::domain(format!(
                    "no transition near {:.2} nm",
                    wavelength / NM
                ))
            })
    }

    pub fn zeeman_shift(
        &self,
        constants: &PhysicalConstants,
        level: Sublevel,
        b_field: f64,
    ) -> Result<f64> {
        zeeman_shift(self, constants, level, b_field)
    }
}

/// Linear Zeeman shift g·m·μ_B·B/ħ (rad/s) of a sublevel in a field of
/// magnitude `b_field` (tesla).
pub fn zeeman_shift(
    scheme: &LevelScheme,
    constants: &PhysicalConstants,
    level: Sublevel,
    b_field: f64,
) -> Result<f64> {
    level.validate()?;
    if !(b_field >= 0.0 && b_field.is_finite()) {
        return Err(Error::domain(format!("magnetic field {b_field} T")));
    }
    Ok(scheme.lande_g.get(level.term) * level.m() * constants.bohr_magneton * b_field
        / constants.planck_reduced)
}

/// One linearly polarized, monochromatic laser beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserField {
    pub wavelength: f64,
    /// Detuning from the field-free transition frequency.
    #[serde(with = "angular_as_hz", rename = "detuning_hz")]
    pub detuning: f64,
    /// W/m².
    pub intensity: f64,
    pub polarization: Vector3<f64>,
    pub k_direction: Vector3<f64>,
    /// Phenomenological laser linewidth (phase-diffusion rate); zero means
    /// monochromatic.
    #[serde(with = "angular_as_hz", rename = "linewidth_hz", default)]
    pub linewidth: f64,
}

impl LaserField {
    /// 493 nm cooling laser at Δ = −2π×19 MHz, 189 mW/cm², propagating along
    /// x̂ and polarized along ŷ.
    pub fn cooling_default() -> Self {
        Self {
            wavelength: 493.4 * NM,
            detuning: angular(-19.0 * MHZ),
            intensity: 189.0 * MW_PER_CM2,
            polarization: Vector3::y(),
            k_direction: Vector3::x(),
            linewidth: 0.0,
        }
    }

    /// 650 nm repumper at Δ = +2π×5 MHz, 107 mW/cm², co-propagating with the
    /// cooling beam.
    pub fn repump_default() -> Self {
        Self {
            wavelength: 649.7 * NM,
            detuning: angular(5.0 * MHZ),
            intensity: 107.0 * MW_PER_CM2,
            polarization: Vector3::y(),
            k_direction: Vector3::x(),
            linewidth: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::config("intensity", "must be finite and non-negative"));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::config("wavelength", "must be positive"));
        }
        if !self.detuning.is_finite() {
            return Err(Error::config("detuning_hz", "must be finite"));
        }
        if !(self.linewidth >= 0.0 && self.linewidth.is_finite()) {
            return Err(Error::config("linewidth_hz", "must be non-negative"));
        }
        let (p, k) = (self.polarization.norm(), self.k_direction.norm());
        if (p - 1.0).abs() > 1e-9 || (k - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "polarization",
                "polarization and k_direction must be unit vectors",
            ));
        }
        if self.polarization.dot(&self.k_direction).abs() > 1e-9 {
            return Err(Error::config(
                "polarization",
                "must be perpendicular to k_direction",
            ));
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }
}

/// Two-level saturation intensity πhcΓ/(3λ³).
pub fn saturation_intensity(constants: &PhysicalConstants, gamma: f64, wavelength: f64) -> f64 {
    PI * constants.planck() * constants.speed_of_light * gamma / (3.0 * wavelength.powi(3))
}

/// Rabi frequency Ω = Γ_t·sqrt(I / 2I_sat) of `laser` on `transition`.
pub fn rabi_frequency(
    scheme: &LevelScheme,
    constants: &PhysicalConstants,
    laser: &LaserField,
    transition: Transition,
) -> Result<f64> {
    if scheme.transition_for(laser.wavelength)? != transition {
        return Err(Error::domain(format!(
            "laser at {:.1} nm does not drive the {transition:?} transition",
            laser.wavelength / NM
        )));
    }
    if !(laser.intensity >= 0.0) {
        return Err(Error::domain("negative intensity"));
    }
    let gamma = scheme.partial_rate(transition);
    let i_sat = saturation_intensity(constants, gamma, scheme.wavelength(transition));
    Ok(gamma * (laser.intensity / (2.0 * i_sat)).sqrt())
}

/// Recoil frequency ħk²/2M with k = 2π/λ.
pub fn recoil_frequency(mass: f64, wavelength: f64) -> Result<f64> {
    if !(mass > 0.0 && wavelength > 0.0) {
        return Err(Error::domain("mass and wavelength must be positive"));
    }
    let k = TAU / wavelength;
    Ok(HBAR * k * k / (2.0 * mass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{to_hz, GAUSS, KHZ};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn defaults() -> (LevelScheme, PhysicalConstants) {
        (LevelScheme::default(), PhysicalConstants::default())
    }

    #[test]
    fn zeeman_examples() {
        let (s, c) = defaults();
        let up = Sublevel::new(Term::S12, 1);
        assert_eq!(zeeman_shift(&s, &c, up, 0.0).unwrap(), 0.0);
        let w = zeeman_shift(&s, &c, up, 2.8 * GAUSS).unwrap();
        assert_relative_eq!(to_hz(w) / MHZ, 3.92, max_relative = 2e-3);
        let d = zeeman_shift(&s, &c, Sublevel::new(Term::D32, 3), 2.8 * GAUSS).unwrap();
        assert_relative_eq!(to_hz(d) / MHZ, 4.70, max_relative = 2e-3);
    }

    #[test]
    fn zeeman_rejects_bad_m() {
        let (s, c) = defaults();
        assert!(zeeman_shift(&s, &c, Sublevel::new(Term::S12, 3), 1e-4).is_err());
        assert!(zeeman_shift(&s, &c, Sublevel::new(Term::D32, 2), 1e-4).is_err());
        assert!(zeeman_shift(&s, &c, Sublevel::new(Term::D32, 1), -1e-4).is_err());
    }

    #[test]
    fn sum_rule_every_upper_state() {
        for upper in STATES.iter().filter(|s| s.term == Term::P12) {
            for lower_term in [Term::S12, Term::D32] {
                let total: f64 = STATES
                    .iter()
                    .filter(|s| s.term == lower_term)
                    .flat_map(|l| (-1..=1).map(move |q| (*l, q)))
                    .map(|(l, q)| coupling_coefficient(l, *upper, q).unwrap().powi(2))
                    .sum();
                assert_relative_eq!(total, 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn rabi_examples() {
        let (s, c) = defaults();
        let mut laser = LaserField::cooling_default();
        laser.intensity = 0.0;
        assert_eq!(rabi_frequency(&s, &c, &laser, Transition::Cooling).unwrap(), 0.0);

        let i_sat = saturation_intensity(&c, s.gamma_sp, s.wavelength_cooling);
        assert_relative_eq!(i_sat / MW_PER_CM2, 16.4, max_relative = 5e-3);
        laser.intensity = 2.0 * i_sat;
        assert_relative_eq!(
            rabi_frequency(&s, &c, &laser, Transition::Cooling).unwrap(),
            s.gamma_sp,
            max_relative = 1e-14
        );

        laser.intensity = 189.0 * MW_PER_CM2;
        let omega = rabi_frequency(&s, &c, &laser, Transition::Cooling).unwrap();
        assert_relative_eq!(to_hz(omega) / MHZ, 36.0, max_relative = 0.01);
    }

    #[test]
    fn rabi_wrong_transition() {
        let (s, c) = defaults();
        let laser = LaserField::cooling_default();
        assert!(rabi_frequency(&s, &c, &laser, Transition::Repump).is_err());
        let mut off = laser;
        off.wavelength = 780e-9;
        assert!(rabi_frequency(&s, &c, &off, Transition::Cooling).is_err());
    }

    #[test]
    fn recoil_examples() {
        let m = BARIUM_MASS_U * ATOMIC_MASS_UNIT;
        let w = recoil_frequency(m, 493.4 * NM).unwrap();
        assert_relative_eq!(to_hz(w) / KHZ, 5.9, max_relative = 0.01);
        assert_relative_eq!(recoil_frequency(2.0 * m, 493.4 * NM).unwrap(), w / 2.0);
        let w2 = recoil_frequency(m, 986.8 * NM).unwrap();
        assert_relative_eq!(to_hz(w2) / KHZ, 1.475, max_relative = 0.01);
        assert!(recoil_frequency(0.0, 1e-7).is_err());
    }

    #[test]
    fn laser_validation() {
        let mut l = LaserField::cooling_default();
        assert!(l.validate().is_ok());
        l.polarization = Vector3::x();
        assert!(matches!(l.validate(), Err(Error::Config { .. })));
        let mut l = LaserField::cooling_default();
        l.intensity = -1.0;
        assert!(l.validate().is_err());
    }

    #[test]
    fn scheme_json_uses_hz() {
        let s = LevelScheme::default();
        let json = serde_json::to_value(s).unwrap();
        assert_relative_eq!(json["gamma_sp_hz"].as_f64().unwrap(), 15.1e6, max_relative = 1e-12);
        let back: LevelScheme = serde_json::from_value(json).unwrap();
        assert_relative_eq!(back.gamma_pd, s.gamma_pd, max_relative = 1e-14);
        let partial: LevelScheme = serde_json::from_str(r#"{"gamma_pd_hz": 4.0e6}"#).unwrap();
        assert_relative_eq!(partial.gamma_pd, angular(4e6));
        assert_eq!(partial.gamma_sp, s.gamma_sp);
        assert!(serde_json::from_str::<LevelScheme>(r#"{"gamma": 1}"#).is_err());
    }

    proptest! {
        #[test]
        fn zeeman_odd_and_linear(b in 0.0f64..1e-2, idx in 0usize..8) {
            let (s, c) = defaults();
            let lvl = STATES[idx];
            let flipped = Sublevel::new(lvl.term, -lvl.twice_m);
            let a = zeeman_shift(&s, &c, lvl, b).unwrap();
            prop_assert!((a + zeeman_shift(&s, &c, flipped, b).unwrap()).abs() <= 1e-9 * a.abs().max(1.0));
            let a2 = zeeman_shift(&s, &c, lvl, 2.0 * b).unwrap();
            prop_assert!((a2 - 2.0 * a).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn rabi_sqrt_scaling(i in 0.0f64..1e5) {
            let (s, c) = defaults();
            let mut l = LaserField::repump_default();
            l.intensity = i;
            let w1 = rabi_frequency(&s, &c, &l, Transition::Repump).unwrap();
            l.intensity = 4.0 * i;
            let w4 = rabi_frequency(&s, &c, &l, Transition::Repump).unwrap();
            prop_assert!((w4 - 2.0 * w1).abs() <= 1e-12 * w1.max(1.0));
        }

        #[test]
        fn recoil_mass_wavelength_invariant(m1 in 1e-26f64..1e-24, l1 in 1e-7f64..2e-6,
                                            m2 in 1e-26f64..1e-24, l2 in 1e-7f64..2e-6) {
            let a = recoil_frequency(m1, l1).unwrap() * m1 * l1 * l1;
            let b = recoil_frequency(m2, l2).unwrap() * m2 * l2 * l2;
            prop_assert!((a / b - 1.0).abs() < 1e-12);
        }
    }
}
