use serde::{Deserialize, Serialize};

use super::lm::{canonical_order, restore_order};
use super::{least_squares_masked, FitOptions, FitResult, FreeParameter, Observations};
use crate::atom::Transition;
use crate::bloch::{BlochConfig, BlochSystem};
use crate::error::{Error, Result};
use crate::units::{angular, to_hz, GAUSS, MHZ, MW_PER_CM2};

/// Quantities `fit_bloch_scan` can adjust, in the units used for fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlochParameter {
    /// Δ₄₉₃ in MHz.
    CoolingDetuning,
    /// I₄₉₃ in mW/cm².
    CoolingIntensity,
    /// I₆₅₀ in mW/cm².
    RepumpIntensity,
    /// B in gauss.
    BField,
    /// Count rate per unit P_P.
    Scale,
}

impl BlochParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::CoolingDetuning => "detuning_493_mhz",
            Self::CoolingIntensity => "intensity_493_mw_cm2",
            Self::RepumpIntensity => "intensity_650_mw_cm2",
            Self::BField => "b_field_gauss",
            Self::Scale => "scale",
        }
    }

    fn read(self, c: &BlochConfig, scale: f64) -> f64 {
        match self {
            Self::CoolingDetuning => to_hz(c.cooling.detuning) / MHZ,
            Self::CoolingIntensity => c.cooling.intensity / MW_PER_CM2,
            Self::RepumpIntensity => c.repump.intensity / MW_PER_CM2,
            Self::BField => c.b_field / GAUSS,
            Self::Scale => scale,
        }
    }

    fn write(self, c: &mut BlochConfig, scale: &mut f64, v: f64) {
        match self {
            Self::CoolingDetuning => c.cooling.detuning = angular(v * MHZ),
            Self::CoolingIntensity => c.cooling.intensity = v * MW_PER_CM2,
            Self::RepumpIntensity => c.repump.intensity = v * MW_PER_CM2,
            Self::BField => c.b_field = v * GAUSS,
            Self::Scale => *scale = v,
        }
    }

    fn bounds(self) -> (f64, f64) {
        match self {
            Self::CoolingDetuning => (f64::NEG_INFINITY, f64::INFINITY),
            _ => (0.0, f64::INFINITY),
        }
    }
}

/// Starting configuration, free parameters and weighting for a scan fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanFitSpec {
    /// Initial guess for every parameter, free or fixed.
    pub initial: BlochConfig,
    /// Initial (or fixed) count rate per unit P_P.
    pub scale: f64,
    pub free: Vec<BlochParameter>,
    /// Per-point σ of the data. Unweighted when unset.
    pub sigma: Option<f64>,
    pub fit: FitOptions,
}

impl Default for ScanFitSpec {
    fn default() -> Self {
        Self {
            initial: BlochConfig::default(),
            scale: 1.0,
            free: vec![
                BlochParameter::CoolingDetuning,
                BlochParameter::CoolingIntensity,
                BlochParameter::RepumpIntensity,
                BlochParameter::BField,
            ],
            sigma: None,
            fit: FitOptions::default(),
        }
    }
}

fn evaluate(system: &BlochSystem, detunings: &[f64], mask: &[bool]) -> Vec<Result<f64>> {
    let point = |(i, &d): (usize, &f64)| -> Result<f64> {
        if mask[i] {
            return Ok(0.0);
        }
        system.p_population_at(Transition::Repump, angular(d))
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        detunings.par_iter().enumerate().map(point).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        detunings.iter().enumerate().map(point).collect()
    }
}

/// Fit of scale·P_P(Δ₆₅₀) to a repump-detuning scan, `data` holding
/// (Δ₆₅₀ in Hz, signal) pairs. Each model evaluation re-solves the steady
/// state at every point, reusing the dissipator of the starting system.
///
/// Points whose steady state cannot be computed at the starting values are
/// masked and listed in the result.
pub fn fit_bloch_scan(data: &[(f64, f64)], spec: &ScanFitSpec) -> Result<FitResult> {
    if spec.free.is_empty() {
        return Err(Error::config("free", "no free parameters"));
    }
    for (i, p) in spec.free.iter().enumerate() {
        if spec.free[..i].contains(p) {
            return Err(Error::config("free", format!("{} listed twice", p.name())));
        }
    }
    let system = BlochSystem::new(spec.initial)?;
    let raw_x: Vec<f64> = data.iter().map(|d| d.0).collect();
    let raw_y: Vec<f64> = data.iter().map(|d| d.1).collect();
    let order = canonical_order(&raw_x, &Observations { y: &raw_y, sigma: None });
    let detunings: Vec<f64> = order.iter().map(|&i| raw_x[i]).collect();
    let y: Vec<f64> = order.iter().map(|&i| raw_y[i]).collect();

    let initial = evaluate(&system, &detunings, &vec![false; data.len()]);
    let mask: Vec<bool> = initial
        .iter()
        .zip(&y)
        .map(|(r, y)| r.is_err() || !y.is_finite())
        .collect();
    if mask.iter().all(|m| *m) {
        return Err(initial
            .into_iter()
            .find_map(|r| r.err())
            .unwrap_or_else(|| Error::Fit("no finite data".into())));
    }

    let free: Vec<FreeParameter> = spec
        .free
        .iter()
        .map(|p| {
            let (lo, hi) = p.bounds();
            FreeParameter::bounded(p.name(), p.read(&spec.initial, spec.scale), lo, hi)
        })
        .collect();
    let predict = |values: &[f64]| -> Result<Vec<f64>> {
        let mut config = spec.initial;
        let mut scale = spec.scale;
        for (p, &v) in spec.free.iter().zip(values) {
            p.write(&mut config, &mut scale, v);
        }
        let sys = system.with_config(config)?;
        evaluate(&sys, &detunings, &mask)
            .into_iter()
            .map(|r| r.map(|p| scale * p))
            .collect()
    };
    let sigma = spec.sigma.map(|s| vec![s; y.len()]);
    let mut fit = least_squares_masked(
        predict,
        &free,
        &Observations { y: &y, sigma: sigma.as_deref() },
        &mask,
        &spec.fit,
    )?;
    restore_order(&mut fit, &order);
    Ok(fit)
}
