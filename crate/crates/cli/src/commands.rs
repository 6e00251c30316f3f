//! Run configurations and the work behind each subcommand.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::json;

use ionfluor::atom::{recoil_frequency, Transition};
use ionfluor::bessel::bessel_j;
use ionfluor::bloch::{
    detuning_grid_hz, read_scan_csv, write_scan_csv, BlochConfig, BlochSystem, ExperimentGeometry, ScanPoint,
    ScanReport, DEFAULT_DERIVATIVE_STEP,
};
use ionfluor::fit::{fit_bloch_scan, fit_sideband_pair, BlochParameter, FitMode, PowerScale, ScanFitSpec, SidebandFitOptions};
use ionfluor::motion::{
    alpha_from_fitted_width, cooling_coefficient, default_micromotion_index, micromotion_mod_index, wave_vectors,
    TrapConfig,
};
use ionfluor::spectrum::recipes::{
    driven_response_traces, micromotion_trace, zoom_trace, DriveScan, SidebandResponse, ZoomTraceOptions,
};
use ionfluor::spectrum::{
    min_detectable_for_snr, mode_matching_for_snr, snr_budget, HeterodyneConfig, Modulation, SpectrumTrace, Window,
};
use ionfluor::units::{angular, to_hz, GAUSS, MHZ, MW_PER_CM2, NM};

use crate::args::{AxisArg, LaserArgs, ModeArg, ParamArg, ScaleArg, WindowArg};
use crate::config::Output;
use crate::error::CliError;

pub(crate) fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

pub(crate) fn apply_laser(config: &mut BlochConfig, args: &LaserArgs) {
    set(&mut config.cooling.detuning, args.cooling_detuning_hz.map(angular));
    set(&mut config.repump.detuning, args.repump_detuning_hz.map(angular));
    set(&mut config.cooling.intensity, args.cooling_intensity.map(|v| v * MW_PER_CM2));
    set(&mut config.repump.intensity, args.repump_intensity.map(|v| v * MW_PER_CM2));
    set(&mut config.b_field, args.b_gauss.map(|v| v * GAUSS));
}

impl From<WindowArg> for Window {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::Hann => Window::Hann,
            WindowArg::Rectangular => Window::Rectangular,
        }
    }
}

impl From<AxisArg> for Transition {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Cooling => Transition::Cooling,
            AxisArg::Repump => Transition::Repump,
        }
    }
}

impl From<ModeArg> for FitMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Joint => FitMode::Joint,
            ModeArg::Separate => FitMode::Separate,
        }
    }
}

impl From<ScaleArg> for PowerScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Linear => PowerScale::Linear,
            ScaleArg::Decibel => PowerScale::Decibel,
        }
    }
}

impl From<ParamArg> for BlochParameter {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::CoolingDetuning => BlochParameter::CoolingDetuning,
            ParamArg::CoolingIntensity => BlochParameter::CoolingIntensity,
            ParamArg::RepumpIntensity => BlochParameter::RepumpIntensity,
            ParamArg::BField => BlochParameter::BField,
            ParamArg::Scale => BlochParameter::Scale,
        }
    }
}

fn trace_csv(trace: &SpectrumTrace) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    trace.write_csv(&mut buf, true)?;
    Ok(buf)
}

fn read_trace(path: &str) -> Result<SpectrumTrace, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    Ok(SpectrumTrace::read_csv(file)?)
}

// ---- spectrum

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumRun {
    pub heterodyne: HeterodyneConfig,
    pub modulation: Modulation,
    pub analyzer: ZoomTraceOptions,
    /// When set, the mode matching is chosen to give this carrier SNR in 1 Hz.
    pub snr_unit_db: Option<f64>,
}

impl Default for SpectrumRun {
    /// The elastic-peak measurement: 61 mHz RBW, 17 dB in 1 Hz, carrier at 50 kHz.
    fn default() -> Self {
        Self {
            heterodyne: HeterodyneConfig {
                resolution_bandwidth: 0.061,
                ..HeterodyneConfig::default()
            },
            modulation: Modulation::micro(default_micromotion_index(), 20),
            analyzer: ZoomTraceOptions {
                bins: 1024,
                averages: 10,
                window: Window::Rectangular,
                center_hz: None,
                noise: true,
                seed: 0,
            },
            snr_unit_db: Some(17.0),
        }
    }
}

pub struct SpectrumFlags {
    pub seed: Option<u64>,
    pub m_micro: Option<f64>,
    pub no_noise: bool,
    pub rbw_hz: Option<f64>,
    pub bins: Option<usize>,
    pub averages: Option<usize>,
    pub window: Option<WindowArg>,
    pub snr_db: Option<f64>,
}

impl SpectrumRun {
    pub fn apply(&mut self, f: &SpectrumFlags) {
        set(&mut self.analyzer.seed, f.seed);
        set(&mut self.modulation.m_micro, f.m_micro);
        if f.no_noise {
            self.analyzer.noise = false;
        }
        set(&mut self.heterodyne.resolution_bandwidth, f.rbw_hz);
        set(&mut self.analyzer.bins, f.bins);
        set(&mut self.analyzer.averages, f.averages);
        set(&mut self.analyzer.window, f.window.map(Window::from));
        if f.snr_db.is_some() {
            self.snr_unit_db = f.snr_db;
        }
    }

    /// Folds the SNR target into the mode matching so the echo carries the
    /// value actually used.
    pub fn finalize(&mut self) -> Result<(), CliError> {
        if let Some(target) = self.snr_unit_db.take() {
            let unit = HeterodyneConfig {
                resolution_bandwidth: 1.0,
                ..self.heterodyne
            };
            self.heterodyne.mode_matching =
                mode_matching_for_snr(&unit, target).map_err(|e| CliError::config("snr_unit_db", e.to_string()))?;
        }
        Ok(())
    }

    pub fn execute(&self, out: &mut Output) -> Result<serde_json::Value, CliError> {
        self.heterodyne.validate()?;
        self.modulation.validate()?;
        let trace = zoom_trace(&self.heterodyne, &self.modulation, &self.analyzer)?;
        out.bytes("spectrum.csv", &trace_csv(&trace)?)?;
        let peak = trace.peak();
        Ok(json!({
            "peak_hz": trace.bin_centers[peak],
            "peak_db": 10.0 * trace.power[peak].log10(),
            "bins": trace.len(),
            "rbw_hz": trace.resolution_bandwidth,
        }))
    }
}

// ---- scan

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanRun {
    pub bloch: BlochConfig,
    pub axis: Transition,
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
}

impl Default for ScanRun {
    fn default() -> Self {
        Self {
            bloch: BlochConfig::default(),
            axis: Transition::Repump,
            start_hz: -40.0 * MHZ,
            stop_hz: 40.0 * MHZ,
            points: 161,
        }
    }
}

impl ScanRun {
    pub fn execute(&self, out: &mut Output) -> Result<serde_json::Value, CliError> {
        if self.points < 2 {
            return Err(CliError::config("points", "need at least 2 points"));
        }
        if !(self.stop_hz > self.start_hz) {
            return Err(CliError::config("stop_hz", "must exceed start_hz"));
        }
        let system = BlochSystem::new(self.bloch)?;
        let grid = detuning_grid_hz(self.start_hz, self.stop_hz, self.points);
        let points = system.excitation_spectrum(self.axis, &grid)?;
        let mut csv = Vec::new();
        write_scan_csv(&points, &mut csv)?;
        out.bytes("scan.csv", &csv)?;
        out.json("scan.json", &ScanReport::new(self.axis, &self.bloch, &points))?;
        let failed = points.iter().filter(|p| p.p_population.is_err()).count();
        let best = points
            .iter()
            .filter_map(|p| p.p_population.as_ref().ok().map(|v| (p.detuning, *v)))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        Ok(json!({
            "points": points.len(),
            "failed_points": failed,
            "max_p_population": best.map(|b| b.1),
            "max_at_hz": best.map(|b| to_hz(b.0)),
        }))
    }
}

// ---- cooling-rate

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoolingRun {
    pub bloch: BlochConfig,
    pub derivative_step_hz: f64,
}

impl Default for CoolingRun {
    fn default() -> Self {
        Self {
            bloch: BlochConfig::default(),
            derivative_step_hz: to_hz(DEFAULT_DERIVATIVE_STEP),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CoolingReport {
    /// α/2π.
    pub alpha_hz: f64,
    pub alpha_rad_per_s: f64,
    pub dp_ddelta_s_per_rad: f64,
    pub dp_ddelta_error_s_per_rad: f64,
    pub p_population: f64,
    pub recoil_hz: f64,
}

impl CoolingRun {
    pub fn report(&self) -> Result<CoolingReport, CliError> {
        if !(self.derivative_step_hz > 0.0) {
            return Err(CliError::config("derivative_step_hz", "must be positive"));
        }
        let system = BlochSystem::new(self.bloch)?;
        let r = cooling_coefficient(&system, angular(self.derivative_step_hz))?;
        let recoil = recoil_frequency(self.bloch.constants.ion_mass, self.bloch.cooling.wavelength)?;
        Ok(CoolingReport {
            alpha_hz: r.linewidth_hz,
            alpha_rad_per_s: r.alpha,
            dp_ddelta_s_per_rad: r.dp_ddelta,
            dp_ddelta_error_s_per_rad: r.dp_ddelta_error,
            p_population: system.p_population()?,
            recoil_hz: to_hz(recoil),
        })
    }

    pub fn execute(&self, out: &mut Output) -> Result<serde_json::Value, CliError> {
        let report = self.report()?;
        out.json("cooling_rate.json", &report)?;
        Ok(serde_json::to_value(&report).map_err(|e| CliError::Io(e.to_string()))?)
    }
}

// ---- fit-sidebands

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSidebandsRun {
    /// Input traces; the bundled dataset is used when both are unset.
    pub carrier_csv: Option<String>,
    pub sideband_csv: Option<String>,
    pub options: SidebandFitOptions,
    /// Truth and drive scan of the bundled dataset.
    pub dataset: SidebandResponse,
    pub scan: DriveScan,
}

impl Default for FitSidebandsRun {
    fn default() -> Self {
        Self {
            carrier_csv: None,
            sideband_csv: None,
            options: SidebandFitOptions::default(),
            dataset: SidebandResponse::default(),
            scan: DriveScan::default(),
        }
    }
}

/// The synthetic drive-frequency dataset shipped with the tool: m_max 1.5,
/// Δf 750 Hz, f_macro 620.5 kHz, 1% noise, seed 0.
pub fn bundled_sideband_dataset() -> Result<(SpectrumTrace, SpectrumTrace), CliError> {
    let run = FitSidebandsRun::default();
    Ok(driven_response_traces(&run.dataset, &run.scan)?)
}

impl FitSidebandsRun {
    pub fn execute(&self, out: &mut Output) -> Result<serde_json::Value, CliError> {
        let (carrier, sideband, source) = match (&self.carrier_csv, &self.sideband_csv) {
            (Some(c), Some(s)) => (read_trace(c)?, read_trace(s)?, "files"),
            (None, None) => {
                let (c, s) = driven_response_traces(&self.dataset, &self.scan)?;
                out.bytes("carrier.csv", &trace_csv(&c)?)?;
                out.bytes("sideband.csv", &trace_csv(&s)?)?;
                (c, s, "bundled")
            }
            _ => return Err(CliError::config("carrier_csv", "give both carrier and sideband traces or neither")),
        };
        let fits = fit_sideband_pair(&carrier, &sideband, &self.options)?;
        let width = fits.last().and_then(|f| f.value("delta_f_hz")).map(alpha_from_fitted_width);
        let report = json!({ "source": source, "fits": fits, "alpha_from_width": width });
        out.json("fit_sidebands.json", &report)?;
        Ok(json!({
            "source": source,
            "m_max": fits.last().and_then(|f| f.value("m_max")),
            "delta_f_hz": fits.last().and_then(|f| f.value("delta_f_hz")),
            "f_macro_hz": fits.last().and_then(|f| f.value("f_macro_hz")),
            "converged": fits.iter().all(|f| f.converged),
        }))
    }
}

// ---- fit-scan

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanDataset {
    pub truth: BlochConfig,
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
    /// Gaussian σ as a fraction of the largest P_P of the scan.
    pub relative_noise: f64,
    pub seed: u64,
}

impl Default for ScanDataset {
    fn default() -> Self {
        Self {
            truth: BlochConfig::default(),
            start_hz: -40.0 * MHZ,
            stop_hz: 40.0 * MHZ,
            points: 81,
            relative_noise: 0.02,
            seed: 1,
        }
    }
}

impl ScanDataset {
    /// (Δ₆₅₀ in Hz, noisy P_P) pairs.
    pub fn generate(&self) -> Result<Vec<(f64, f64)>, CliError> {
        if self.points < 2 || !(self.stop_hz > self.start_hz) {
            return Err(CliError::config("dataset.points", "need ≥ 2 points and stop_hz > start_hz"));
        }
        if !(self.relative_noise >= 0.0) {
            return Err(CliError::config("dataset.relative_noise", "must be non-negative"));
        }
        let system = BlochSystem::new(self.truth)?;
        let grid = detuning_grid_hz(self.start_hz, self.stop_hz, self.points);
        let clean = system
            .excitation_spectrum(Transition::Repump, &grid)?
            .into_iter()
            .map(|p| p.p_population)
            .collect::<Result<Vec<f64>, _>>()?;
        let peak = clean.iter().cloned().fold(0.0, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok(grid
            .iter()
            .zip(&clean)
            .map(|(g, v)| (to_hz(*g), v + self.relative_noise * peak * Distribution::<f64>::sample(&StandardNormal, &mut rng)))
            .collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitScanRun {
    /// Input scan; the bundled dataset is used when unset.
    pub data_csv: Option<String>,
    pub spec: ScanFitSpec,
    pub dataset: ScanDataset,
}

impl Default for FitScanRun {
    /// Starts the fit away from the truth: −16 MHz, 150 and 130 mW/cm², 3.3 G.
    fn default() -> Self {
        let mut spec = ScanFitSpec::default();
        spec.initial.cooling.detuning = angular(-16.0 * MHZ);
        spec.initial.cooling.intensity = 150.0 * MW_PER_CM2;
        spec.initial.repump.intensity = 130.0 * MW_PER_CM2;
        spec.initial.b_field = 3.3 * GAUSS;
        Self {
            data_csv: None,
            spec,
            dataset: ScanDataset::default(),
        }
    }
}

impl FitScanRun {
    pub fn execute(&self, out: &mut Output) -> Result<serde_json::Value, CliError> {
        let (data, source) = match &self.data_csv {
            Some(path) => {
                let file = std::fs::File::open(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
                let pairs = read_scan_csv(file)?;
                (pairs.into_iter().map(|(d, p)| (to_hz(d), p)).collect::<Vec<_>>(), "file")
            }
            None => {
                let data = self.dataset.generate()?;
                let points: Vec<ScanPoint> = data
                    .iter()
                    .map(|&(d, p)| ScanPoint {
                        detuning: angular(d),
                        p_population: Ok(p),
                    })
                    .collect();
                let mut csv = Vec::new();
                write_scan_csv(&points, &mut csv)?;
                out.bytes("scan_data.csv", &csv)?;
                (data, "bundled")
            }
        };
        let fit = fit_bloch_scan(&data, &self.spec)?;
        out.json("fit_scan.json", &json!({ "source": source, "fit": fit }))?;
        Ok(json!({ "source": source, "parameters": fit.parameters, "converged": fit.converged }))
    }
}

// ---- micromotion

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MicromotionRun {
    pub trap: TrapConfig,
    pub geometry: ExperimentGeometry,
    /// m.
    pub wavelength: f64,
    /// Amplitude along the trap's micromotion direction; the trap value when
    /// neither this nor `mod_index` is set.
    pub amplitude_nm: Option<f64>,
    pub mod_index: Option<f64>,
    pub snr_db: f64,
    pub orders: u32,
    /// Heterodyne settings whose SNR budget sets the second detection limit.
    pub heterodyne: HeterodyneConfig,
    pub traces: bool,
    /// Carrier SNR in 1 Hz for the traces.
    pub trace_snr_unit_db: f64,
    pub seed: u64,
}

impl Default for MicromotionRun {
    fn default() -> Self {
        Self {
            trap: TrapConfig::default(),
            geometry: ExperimentGeometry::default(),
            wavelength: 493.4 * NM,
            amplitude_nm: None,
            mod_index: None,
            snr_db: 40.0,
            orders: 3,
            heterodyne: HeterodyneConfig::default(),
            traces: false,
            trace_snr_unit_db: 40.0,
            seed: 0,
        }
    }
}

impl MicromotionRun {
    pub fn execute(&self, out: &mut Output) -> Result<serde_json::Value, CliError> {
        self.trap.validate()?;
        self.geometry.validate()?;
        let (k_l, k_d) = wave_vectors(&self.geometry, self.wavelength);
        let amplitude = self.trap.micromotion_amplitude;
        let norm = amplitude.norm();
        if !(norm > 0.0) {
            return Err(CliError::config("trap.micromotion_amplitude", "must be a non-zero vector"));
        }
        let direction = amplitude / norm;
        let projection = direction.dot(&(k_d - k_l)).abs();
        let (a, m) = match (self.amplitude_nm, self.mod_index) {
            (Some(_), Some(_)) => return Err(CliError::config("mod_index", "give amplitude_nm or mod_index, not both")),
            (Some(nm), None) => {
                if !(nm >= 0.0) {
                    return Err(CliError::config("amplitude_nm", "must be non-negative"));
                }
                (nm * NM, micromotion_mod_index(&(direction * nm * NM), &k_l, &k_d))
            }
            (None, Some(m)) => {
                if !(m >= 0.0) {
                    return Err(CliError::config("mod_index", "must be non-negative"));
                }
                if projection == 0.0 {
                    return Err(CliError::config("trap.micromotion_amplitude", "motion is invisible to the detection"));
                }
                (m / projection, m)
            }
            (None, None) => (norm, micromotion_mod_index(&amplitude, &k_l, &k_d)),
        };
        let j0 = bessel_j(0, m).powi(2);
        let sidebands: Vec<_> = (1..=self.orders as i32)
            .map(|n| {
                let ratio = bessel_j(n, m).powi(2) / j0;
                json!({ "order": n, "ratio_to_carrier": ratio, "ratio_db": 10.0 * ratio.log10() })
            })
            .collect();
        let limit = |snr: f64| -> Result<serde_json::Value, CliError> {
            let d = min_detectable_for_snr(snr, &k_l, &k_d, &direction)?;
            let a = d.amplitude();
            Ok(json!({ "snr_db": snr, "amplitude_nm": a.is_finite().then_some(a / NM) }))
        };
        let budget = snr_budget(&self.heterodyne)?;
        let report = json!({
            "mod_index": m,
            "amplitude_nm": a / NM,
            "sidebands": sidebands,
            "detection_limit": limit(self.snr_db)?,
            "detection_limit_at_budget": limit(budget)?,
        });
        out.json("micromotion.json", &report)?;
        if self.traces {
            for n in 0..=self.orders as i32 {
                let t = micromotion_trace(n, m, self.trace_snr_unit_db, self.seed)?;
                out.bytes(&format!("micromotion_order{n}.csv"), &trace_csv(&t)?)?;
            }
        }
        Ok(report)
    }
}
