//! Eight-level optical Bloch equations for the two-laser Λ system, their
//! steady state, excitation spectra and the slope dP_P/dΔ.

mod density;
mod liouvillian;

pub use density::{null_space_dimension, steady_state, DensityMatrix, Validity};
pub use liouvillian::{
    build_liouvillian, build_liouvillian_with, commutator_superop, dissipator_superop,
    hamiltonian, polarization_components, unvec, vectorize, DecayModel, Liouvillian, Matrix8,
    DIM, SUPER_DIM,
};

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atom::{LaserField, LevelScheme, PhysicalConstants, Transition};
use crate::error::{Error, Result};
use crate::units::{angular, to_hz, GAUSS};

/// Directions fixing the quantization axis and the observation direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentGeometry {
    pub b_direction: Vector3<f64>,
    pub laser_k: Vector3<f64>,
    pub laser_polarization: Vector3<f64>,
    pub detection_k: Vector3<f64>,
}

impl Default for ExperimentGeometry {
    /// Lasers along x̂ polarized along ŷ, field and detection along ẑ.
    fn default() -> Self {
        Self {
            b_direction: Vector3::z(),
            laser_k: Vector3::x(),
            laser_polarization: Vector3::y(),
            detection_k: Vector3::z(),
        }
    }
}

impl ExperimentGeometry {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("b_direction", self.b_direction),
            ("laser_k", self.laser_k),
            ("laser_polarization", self.laser_polarization),
            ("detection_k", self.detection_k),
        ] {
            if (v.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::config(key, "must be a unit vector"));
            }
        }
        if self.laser_k.dot(&self.laser_polarization).abs() > 1e-9 {
            return Err(Error::config(
                "laser_polarization",
                "must be perpendicular to laser_k",
            ));
        }
        Ok(())
    }

    /// Same geometry with the quantization axis reversed (m → −m).
    pub fn flipped_field(&self) -> Self {
        Self {
            b_direction: -self.b_direction,
            ..*self
        }
    }
}

/// Everything that determines a steady state. Serializes with frequencies
/// in Hz and the field in gauss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlochConfig {
    pub scheme: LevelScheme,
    pub constants: PhysicalConstants,
    pub cooling: LaserField,
    pub repump: LaserField,
    #[serde(with = "tesla_as_gauss", rename = "b_field_gauss")]
    pub b_field: f64,
    pub geometry: ExperimentGeometry,
    pub decay_model: DecayModel,
}

mod tesla_as_gauss {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(b / super::GAUSS)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d).map(|g| g * super::GAUSS)
    }
}

impl Default for BlochConfig {
    /// Δ₄₉₃ = −2π×19 MHz, Δ₆₅₀ = +2π×5 MHz, 189 and 107 mW/cm², 2.8 G.
    fn default() -> Self {
        Self {
            scheme: LevelScheme::default(),
            constants: PhysicalConstants::default(),
            cooling: LaserField::cooling_default(),
            repump: LaserField::repump_default(),
            b_field: 2.8 * GAUSS,
            geometry: ExperimentGeometry::default(),
            decay_model: DecayModel::default(),
        }
    }
}

impl BlochConfig {
    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        self.constants.validate()?;
        self.cooling.validate()?;
        self.repump.validate()?;
        self.geometry.validate()?;
        if self.scheme.transition_for(self.cooling.wavelength)? != Transition::Cooling {
            return Err(Error::config("cooling.wavelength", "must address S1/2-P1/2"));
        }
        if self.scheme.transition_for(self.repump.wavelength)? != Transition::Repump {
            return Err(Error::config("repump.wavelength", "must address D3/2-P1/2"));
        }
        if !(self.b_field >= 0.0 && self.b_field.is_finite()) {
            return Err(Error::config("b_field_gauss", "must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn laser(&self, transition: Transition) -> &LaserField {
        match transition {
            Transition::Cooling => &self.cooling,
            Transition::Repump => &self.repump,
        }
    }

    pub fn laser_mut(&mut self, transition: Transition) -> &mut LaserField {
        match transition {
            Transition::Cooling => &mut self.cooling,
            Transition::Repump => &mut self.repump,
        }
    }
}

/// A finite-difference derivative with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivative {
    /// dP_P/dΔ in 1/(rad/s).
    pub value: f64,
    /// |D(h/2) − D(h)|/3 from one Richardson halving.
    pub error: f64,
}

/// Default finite-difference step for dP_P/dΔ: 2π×100 kHz.
pub const DEFAULT_DERIVATIVE_STEP: f64 = 2.0 * std::f64::consts::PI * 100e3;

#[derive(Debug, Clone)]
pub struct ScanPoint {
    /// Scanned detuning (rad/s).
    pub detuning: f64,
    pub p_population: Result<f64>,
}

/// A configured two-laser Bloch model. The dissipative part of the generator
/// is built once and shared by every variant made with the `with_*` methods.
#[derive(Debug, Clone)]
pub struct BlochSystem {
    config: BlochConfig,
    dissipator: Arc<DMatrix<Complex64>>,
}

impl BlochSystem {
    pub fn new(config: BlochConfig) -> Result<Self> {
        config.validate()?;
        let dissipator = dissipator_superop(
            &config.scheme,
            config.decay_model,
            config.cooling.linewidth,
            config.repump.linewidth,
        )?;
        Ok(Self {
            config,
            dissipator: Arc::new(dissipator),
        })
    }

    pub fn reference() -> Self {
        Self::new(BlochConfig::default()).expect("default configuration is valid")
    }

    pub fn config(&self) -> &BlochConfig {
        &self.config
    }

    /// Replaces parameters that leave the dissipator unchanged. Changing decay
    /// rates or linewidths requires [`BlochSystem::new`].
    pub fn with_config(&self, config: BlochConfig) -> Result<Self> {
        let same_dissipator = config.scheme == self.config.scheme
            && config.decay_model == self.config.decay_model
            && config.cooling.linewidth == self.config.cooling.linewidth
            && config.repump.linewidth == self.config.repump.linewidth;
        if !same_dissipator {
            return Self::new(config);
        }
        config.validate()?;
        Ok(Self {
            config,
            dissipator: Arc::clone(&self.dissipator),
        })
    }

    pub fn detuning(&self, axis: Transition) -> f64 {
        self.config.laser(axis).detuning
    }

    pub fn with_detuning(&self, axis: Transition, detuning: f64) -> Self {
        let mut s = self.clone();
        s.config.laser_mut(axis).detuning = detuning;
        s
    }

    pub fn with_intensity(&self, axis: Transition, intensity: f64) -> Result<Self> {
        let mut c = self.config;
        c.laser_mut(axis).intensity = intensity;
        self.with_config(c)
    }

    pub fn with_b_field(&self, b_field: f64) -> Result<Self> {
        let mut c = self.config;
        c.b_field = b_field;
        self.with_config(c)
    }

    pub fn hamiltonian(&self) -> Result<Matrix8> {
        let c = &self.config;
        hamiltonian(
            &c.scheme,
            &c.constants,
            &[c.cooling, c.repump],
            c.b_field,
            &c.geometry,
        )
    }

    pub fn liouvillian(&self) -> Result<Liouvillian> {
        let h = self.hamiltonian()?;
        Ok(Liouvillian {
            matrix: commutator_superop(&h) + &*self.dissipator,
        })
    }

    pub fn steady_state(&self) -> Result<DensityMatrix> {
        steady_state(&self.liouvillian()?)
    }

    pub fn p_population(&self) -> Result<f64> {
        Ok(self.steady_state()?.p_population())
    }

    /// P_P with the `axis` laser detuned to `detuning`.
    pub fn p_population_at(&self, axis: Transition, detuning: f64) -> Result<f64> {
        self.with_detuning(axis, detuning).p_population()
    }

    /// Steady-state P_P at every grid detuning of the `axis` laser. Point
    /// failures are reported per point.
    pub fn excitation_spectrum(&self, axis: Transition, grid: &[f64]) -> Result<Vec<ScanPoint>> {
        if grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("scan grid contains non-finite values"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("scan grid must be strictly increasing"));
        }
        let point = |&d: &f64| ScanPoint {
            detuning: d,
            p_population: self.p_population_at(axis, d),
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            Ok(grid.par_iter().map(point).collect())
        }
        #[cfg(not(feature = "parallel"))]
        {
            Ok(grid.iter().map(point).collect())
        }
    }

    /// dP_P/dΔ for the `axis` laser by central differences at steps `h` and
    /// `h/2`, Richardson-extrapolated.
    pub fn p_derivative(&self, axis: Transition, h: f64) -> Result<Derivative> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::domain("derivative step must be positive"));
        }
        let d0 = self.detuning(axis);
        let central = |step: f64| -> Result<f64> {
            let plus = self.p_population_at(axis, d0 + step)?;
            let minus = self.p_population_at(axis, d0 - step)?;
            Ok((plus - minus) / (2.0 * step))
        };
        let coarse = central(h)?;
        let fine = central(h / 2.0)?;
        Ok(Derivative {
            value: fine + (fine - coarse) / 3.0,
            error: (fine - coarse).abs() / 3.0,
        })
    }
}

/// Uniform grid of `n` points from `start_hz` to `stop_hz`, returned in rad/s.
pub fn detuning_grid_hz(start_hz: f64, stop_hz: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![angular(start_hz)],
        _ => (0..n)
            .map(|i| angular(start_hz + (stop_hz - start_hz) * i as f64 / (n - 1) as f64))
            .collect(),
    }
}

/// Writes a scan as CSV with columns `detuning_hz,p_population`; failed
/// points carry `nan`.
pub fn write_scan_csv<W: Write>(points: &[ScanPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["detuning_hz", "p_population"])?;
    for p in points {
        let value = p.p_population.as_ref().copied().unwrap_or(f64::NAN);
        w.write_record([format!("{}", to_hz(p.detuning)), format!("{value}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `detuning_hz,p_population` CSV, returning (rad/s, P_P) pairs.
pub fn read_scan_csv<R: std::io::Read>(input: R) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Parse(format!("missing column `{name}`")))
    };
    let (xi, yi) = (col("detuning_hz")?, col("p_population")?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .unwrap_or("")
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {:?}: {e}", rec.position())))
        };
        out.push((angular(parse(xi)?), parse(yi)?));
    }
    Ok(out)
}

/// JSON scan output with the full configuration echoed.
#[derive(Debug, Serialize)]
pub struct ScanReport<'a> {
    pub axis: Transition,
    pub config: &'a BlochConfig,
    pub points: Vec<ScanReportPoint>,
}

#[derive(Debug, Serialize)]
pub struct ScanReportPoint {
    pub detuning_hz: f64,
    pub p_population: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl<'a> ScanReport<'a> {
    pub fn new(axis: Transition, config: &'a BlochConfig, points: &[ScanPoint]) -> Self {
        Self {
            axis,
            config,
            points: points
                .iter()
                .map(|p| ScanReportPoint {
                    detuning_hz: to_hz(p.detuning),
                    p_population: p.p_population.as_ref().ok().copied(),
                    error: p.p_population.as_ref().err().map(|e| e.to_string()),
                })
                .collect(),
        }
    }
}
