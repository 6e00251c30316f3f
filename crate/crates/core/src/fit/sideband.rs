use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::{least_squares, FitOptions, FitResult, FreeParameter, Observations};
use crate::bessel::{bessel_j, inverse_j0_squared};
use crate::error::{Error, Result};
use crate::motion::lorentzian_mod_index;
use crate::spectrum::SpectrumTrace;

pub const CARRIER_SCALE: &str = "a0";
pub const SIDEBAND_SCALE: &str = "a1";
pub const M_MAX: &str = "m_max";
pub const DELTA_F: &str = "delta_f_hz";
pub const F_MACRO: &str = "f_macro_hz";

/// FWHM of a squared Lorentzian relative to the Lorentzian's own FWHM.
const SQUARED_LORENTZIAN_WIDTH: f64 = 0.643_594_252_905_582_6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    /// A₀·J₀(m(f))².
    CarrierJ0,
    /// A₁·J₁(m(f))².
    SidebandJ1,
}

impl TraceKind {
    fn order(self) -> i32 {
        match self {
            Self::CarrierJ0 => 0,
            Self::SidebandJ1 => 1,
        }
    }

    fn scale_name(self) -> &'static str {
        match self {
            Self::CarrierJ0 => CARRIER_SCALE,
            Self::SidebandJ1 => SIDEBAND_SCALE,
        }
    }
}

/// One drive-response trace model: which Bessel order, which parameters are
/// held fixed, and the free parameters with bounds and starting values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceModel {
    pub kind: TraceKind,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    pub free: Vec<FreeParameter>,
}

impl TraceModel {
    pub fn new(kind: TraceKind, guess: &SidebandGuess, grid: &[f64]) -> Self {
        let (scale, value) = match kind {
            TraceKind::CarrierJ0 => (CARRIER_SCALE, guess.a0),
            TraceKind::SidebandJ1 => (SIDEBAND_SCALE, guess.a1),
        };
        let mut free = vec![FreeParameter::bounded(scale, value, 0.0, f64::INFINITY)];
        free.extend(shared_parameters(guess, grid));
        Self {
            kind,
            fixed: BTreeMap::new(),
            free,
        }
    }

    /// Moves `name` from the free list to the fixed map.
    pub fn fix(mut self, name: &str, value: f64) -> Self {
        self.free.retain(|p| p.name != name);
        self.fixed.insert(name.to_string(), value);
        self
    }

    fn lookup(&self, name: &str, free_values: &[f64]) -> Result<f64> {
        if let Some(i) = self.free.iter().position(|p| p.name == name) {
            return Ok(free_values[i]);
        }
        self.fixed
            .get(name)
            .copied()
            .ok_or_else(|| Error::config(name, "neither free nor fixed"))
    }

    pub fn evaluate(&self, grid: &[f64], free_values: &[f64]) -> Result<Vec<f64>> {
        let a = self.lookup(self.kind.scale_name(), free_values)?;
        let m_max = self.lookup(M_MAX, free_values)?;
        let delta_f = self.lookup(DELTA_F, free_values)?;
        let f_macro = self.lookup(F_MACRO, free_values)?;
        Ok(response(grid, self.kind.order(), a, m_max, f_macro, delta_f))
    }
}

fn response(grid: &[f64], order: i32, a: f64, m_max: f64, f_macro: f64, delta_f: f64) -> Vec<f64> {
    grid.iter()
        .map(|&f| a * bessel_j(order, lorentzian_mod_index(f, m_max, f_macro, delta_f)).powi(2))
        .collect()
}

fn shared_parameters(guess: &SidebandGuess, grid: &[f64]) -> Vec<FreeParameter> {
    let lo = grid.first().copied().unwrap_or(0.0);
    let hi = grid.last().copied().unwrap_or(0.0);
    let spacing = (hi - lo) / (grid.len().max(2) - 1) as f64;
    vec![
        // Beyond the first zero of J₀ the carrier model is no longer monotonic.
        FreeParameter::bounded(M_MAX, guess.m_max, 0.0, 2.404_825_557_695_773),
        FreeParameter::bounded(DELTA_F, guess.delta_f, 1e-3 * spacing, 10.0 * (hi - lo)),
        FreeParameter::bounded(F_MACRO, guess.f_macro, lo, hi),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidebandGuess {
    pub a0: f64,
    pub a1: f64,
    pub m_max: f64,
    pub delta_f: f64,
    pub f_macro: f64,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s[s.len() / 2]
}

/// Noise estimate from first differences (robust to a smooth response).
fn difference_noise(v: &[f64]) -> f64 {
    let d: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let med = median(&d);
    let mad: Vec<f64> = d.iter().map(|x| (x - med).abs()).collect();
    1.4826 * median(&mad) / std::f64::consts::SQRT_2
}

fn half_height_width(grid: &[f64], y: &[f64], peak: usize, base: f64) -> f64 {
    let half = base + 0.5 * (y[peak] - base);
    let mut left = peak;
    while left > 0 && y[left] > half {
        left -= 1;
    }
    let mut right = peak;
    while right + 1 < y.len() && y[right] > half {
        right += 1;
    }
    (grid[right] - grid[left]).max(grid[1] - grid[0])
}

/// Starting point for the response fit: f_macro at the sideband maximum,
/// Δf from the sideband's half-height width (a squared Lorentzian for small
/// m), m_max from the carrier dip through the inverse of J₀².
///
/// Fails as non-identifiable when the sideband trace shows no response above
/// its noise.
pub fn initial_guess(grid: &[f64], carrier: &[f64], sideband: &[f64]) -> Result<SidebandGuess> {
    let peak = sideband
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Fit("empty trace".into()))?;
    let base = median(sideband);
    let excess = sideband[peak] - base;
    if excess <= 5.0 * difference_noise(sideband) {
        return Err(Error::NonIdentifiable {
            parameters: vec![M_MAX.into(), DELTA_F.into(), F_MACRO.into()],
        });
    }
    let mut sorted = carrier.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let top = (sorted.len() / 10).max(1);
    let a0 = sorted[..top].iter().sum::<f64>() / top as f64;
    let dip = carrier.iter().cloned().fold(f64::INFINITY, f64::min);
    let m_max = inverse_j0_squared((dip / a0).clamp(0.0, 1.0))
        .unwrap_or(1.0)
        .clamp(0.05, 2.3);
    let delta_f = half_height_width(grid, sideband, peak, base) / SQUARED_LORENTZIAN_WIDTH;
    Ok(SidebandGuess {
        a0,
        a1: sideband[peak] / bessel_j(1, m_max).powi(2),
        m_max,
        delta_f,
        f_macro: grid[peak],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// One fit sharing m_max, Δf and f_macro across both traces.
    #[default]
    Joint,
    /// Independent carrier and sideband fits.
    Separate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerScale {
    /// Residuals in linear power.
    #[default]
    Linear,
    /// Residuals in dB; biased at low SNR and requires positive data.
    Decibel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SidebandFitOptions {
    pub mode: FitMode,
    pub scale: PowerScale,
    /// Per-trace noise σ (carrier, sideband). Unweighted when unset.
    pub sigma: Option<(f64, f64)>,
    pub fit: FitOptions,
}

impl Default for SidebandFitOptions {
    fn default() -> Self {
        Self {
            mode: FitMode::Joint,
            scale: PowerScale::Linear,
            sigma: None,
            fit: FitOptions::default(),
        }
    }
}

fn to_scale(scale: PowerScale, v: &[f64]) -> Result<Vec<f64>> {
    match scale {
        PowerScale::Linear => Ok(v.to_vec()),
        PowerScale::Decibel => {
            if v.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::Fit("dB fitting needs strictly positive data".into()));
            }
            Ok(v.iter().map(|x| 10.0 * x.log10()).collect())
        }
    }
}

fn model_to_scale(scale: PowerScale, v: Vec<f64>) -> Vec<f64> {
    match scale {
        PowerScale::Linear => v,
        PowerScale::Decibel => v.into_iter().map(|x| 10.0 * x.max(1e-300).log10()).collect(),
    }
}

/// Fit of one trace against `model`.
pub fn fit_trace(
    model: &TraceModel,
    trace: &SpectrumTrace,
    scale: PowerScale,
    sigma: Option<f64>,
    options: &FitOptions,
) -> Result<FitResult> {
    let grid = &trace.bin_centers;
    let y = to_scale(scale, &trace.power)?;
    let sig = sigma.map(|s| vec![s; y.len()]);
    least_squares(
        |p| Ok(model_to_scale(scale, model.evaluate(grid, p)?)),
        &model.free,
        &Observations { y: &y, sigma: sig.as_deref() },
        options,
    )
}

fn same_grid(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0))
}

/// Fit of the carrier and first-sideband heights versus drive frequency with
/// |A_n J_n(m(f))|² and a Lorentzian m(f). Joint mode returns one result with
/// a0, a1, m_max, delta_f_hz and f_macro_hz; separate mode returns the
/// carrier fit and the sideband fit.
pub fn fit_sideband_pair(
    carrier: &SpectrumTrace,
    sideband: &SpectrumTrace,
    options: &SidebandFitOptions,
) -> Result<Vec<FitResult>> {
    if !same_grid(&carrier.bin_centers, &sideband.bin_centers) {
        return Err(Error::config("sideband", "traces must share the drive-frequency grid"));
    }
    if carrier.len() < 6 {
        return Err(Error::Fit("traces are too short to fit".into()));
    }
    let grid = &carrier.bin_centers;
    let guess = initial_guess(grid, &carrier.power, &sideband.power)?;
    match options.mode {
        FitMode::Separate => {
            let c = TraceModel::new(TraceKind::CarrierJ0, &guess, grid);
            let s = TraceModel::new(TraceKind::SidebandJ1, &guess, grid);
            Ok(vec![
                fit_trace(&c, carrier, options.scale, options.sigma.map(|s| s.0), &options.fit)?,
                fit_trace(&s, sideband, options.scale, options.sigma.map(|s| s.1), &options.fit)?,
            ])
        }
        FitMode::Joint => {
            let n = grid.len();
            let mut y = to_scale(options.scale, &carrier.power)?;
            y.extend(to_scale(options.scale, &sideband.power)?);
            let sigma = options
                .sigma
                .map(|(sc, ss)| [vec![sc; n], vec![ss; n]].concat());
            let mut free = vec![
                FreeParameter::bounded(CARRIER_SCALE, guess.a0, 0.0, f64::INFINITY),
                FreeParameter::bounded(SIDEBAND_SCALE, guess.a1, 0.0, f64::INFINITY),
            ];
            free.extend(shared_parameters(&guess, grid));
            let fit = least_squares(
                |p| {
                    let mut out = response(grid, 0, p[0], p[2], p[4], p[3]);
                    out.extend(response(grid, 1, p[1], p[2], p[4], p[3]));
                    Ok(model_to_scale(options.scale, out))
                },
                &free,
                &Observations { y: &y, sigma: sigma.as_deref() },
                &options.fit,
            )?;
            Ok(vec![fit])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::recipes::{driven_response_traces, DriveScan, SidebandResponse};

    #[test]
    fn squared_lorentzian_width_constant() {
        assert!((SQUARED_LORENTZIAN_WIDTH - (2f64.sqrt() - 1.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn noiseless_joint_fit_recovers_parameters() {
        let truth = SidebandResponse::default();
        let scan = DriveScan { relative_noise: 0.0, ..DriveScan::default() };
        let (c, s) = driven_response_traces(&truth, &scan).unwrap();
        let fit = &fit_sideband_pair(&c, &s, &SidebandFitOptions::default()).unwrap()[0];
        assert!(fit.converged, "{}", fit.message);
        assert!((fit.value(M_MAX).unwrap() - 1.5).abs() < 1e-6);
        assert!((fit.value(DELTA_F).unwrap() - 750.0).abs() < 1e-3);
        assert!((fit.value(F_MACRO).unwrap() - 620.5e3).abs() < 1e-3);
    }

    #[test]
    fn flat_traces_are_non_identifiable() {
        let grid: Vec<f64> = (0..50).map(|i| 620e3 + 10.0 * i as f64).collect();
        let c = SpectrumTrace::new(grid.clone(), vec![1.0; 50], 1.0);
        let s = SpectrumTrace::new(grid, vec![0.0; 50], 1.0);
        match fit_sideband_pair(&c, &s, &SidebandFitOptions::default()) {
            Err(Error::NonIdentifiable { parameters }) => {
                assert!(parameters.contains(&DELTA_F.to_string()))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn carrier_only_fit_returns_mean() {
        let grid: Vec<f64> = (0..40).map(|i| 620e3 + 10.0 * i as f64).collect();
        let power: Vec<f64> = (0..40).map(|i| 1.0 + 0.01 * ((i * 7 % 11) as f64 - 5.0)).collect();
        let mean = power.iter().sum::<f64>() / 40.0;
        let trace = SpectrumTrace::new(grid.clone(), power, 1.0);
        let guess = SidebandGuess { a0: 0.9, a1: 1.0, m_max: 0.0, delta_f: 750.0, f_macro: 620.2e3 };
        let model = TraceModel::new(TraceKind::CarrierJ0, &guess, &grid)
            .fix(M_MAX, 0.0)
            .fix(DELTA_F, 750.0)
            .fix(F_MACRO, 620.2e3);
        let fit = fit_trace(&model, &trace, PowerScale::Linear, None, &FitOptions::default()).unwrap();
        assert!((fit.value(CARRIER_SCALE).unwrap() - mean).abs() < 1e-12);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = SpectrumTrace::new(vec![1.0, 2.0, 3.0], vec![1.0; 3], 1.0);
        let b = SpectrumTrace::new(vec![1.0, 2.0, 4.0], vec![1.0; 3], 1.0);
        assert!(matches!(
            fit_sideband_pair(&a, &b, &SidebandFitOptions::default()),
            Err(Error::Config { .. })
        ));
    }
}
