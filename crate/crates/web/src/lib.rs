//! wasm-bindgen bindings for the static demo page in `www/`. The plain
//! functions do the work and are tested natively; the exported wrappers only
//! convert errors into JS exceptions.

use ionfluor::atom::Transition;
use ionfluor::bloch::{detuning_grid_hz, BlochConfig, BlochSystem, DEFAULT_DERIVATIVE_STEP};
use ionfluor::motion::cooling_coefficient;
use ionfluor::spectrum::recipes::micromotion_trace;
use ionfluor::units::{angular, GAUSS, MHZ, MW_PER_CM2};
use wasm_bindgen::prelude::*;

/// Laser and field settings shown on the page, in lab units.
#[wasm_bindgen]
#[derive(Debug, Clone, Copy)]
pub struct Lasers {
    pub cooling_detuning_mhz: f64,
    pub repump_detuning_mhz: f64,
    /// mW/cm².
    pub cooling_intensity: f64,
    pub repump_intensity: f64,
    pub b_gauss: f64,
}

#[wasm_bindgen]
impl Lasers {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Self {
        Self::default()
    }
}

impl Default for Lasers {
    fn default() -> Self {
        Self {
            cooling_detuning_mhz: -19.0,
            repump_detuning_mhz: 5.0,
            cooling_intensity: 189.0,
            repump_intensity: 107.0,
            b_gauss: 2.8,
        }
    }
}

impl Lasers {
    fn system(&self) -> Result<BlochSystem, String> {
        let mut c = BlochConfig::default();
        c.cooling.detuning = angular(self.cooling_detuning_mhz * MHZ);
        c.repump.detuning = angular(self.repump_detuning_mhz * MHZ);
        c.cooling.intensity = self.cooling_intensity * MW_PER_CM2;
        c.repump.intensity = self.repump_intensity * MW_PER_CM2;
        c.b_field = self.b_gauss * GAUSS;
        BlochSystem::new(c).map_err(|e| e.to_string())
    }
}

/// P1/2 population on a repumper-detuning grid; failed points are NaN.
pub fn repump_scan(lasers: &Lasers, start_mhz: f64, stop_mhz: f64, points: usize) -> Result<Vec<f64>, String> {
    let system = lasers.system()?;
    let grid = detuning_grid_hz(start_mhz * MHZ, stop_mhz * MHZ, points);
    let scan = system
        .excitation_spectrum(Transition::Repump, &grid)
        .map_err(|e| e.to_string())?;
    Ok(scan.iter().map(|p| p.p_population.as_ref().copied().unwrap_or(f64::NAN)).collect())
}

/// α/2π in Hz against the cooling detuning; NaN where the steady state fails.
pub fn cooling_curve(lasers: &Lasers, start_mhz: f64, stop_mhz: f64, points: usize) -> Result<Vec<f64>, String> {
    let system = lasers.system()?;
    Ok(detuning_grid_hz(start_mhz * MHZ, stop_mhz * MHZ, points)
        .into_iter()
        .map(|d| {
            let s = system.with_detuning(Transition::Cooling, d);
            cooling_coefficient(&s, DEFAULT_DERIVATIVE_STEP).map_or(f64::NAN, |r| r.linewidth_hz)
        })
        .collect())
}

/// Analyzer trace of micromotion line `order` as interleaved
/// (frequency Hz, power dB) pairs.
pub fn sideband_trace(order: i32, m_micro: f64, snr_unit_db: f64, seed: u64) -> Result<Vec<f64>, String> {
    let t = micromotion_trace(order, m_micro, snr_unit_db, seed).map_err(|e| e.to_string())?;
    Ok(t.bin_centers
        .iter()
        .zip(t.power_db())
        .flat_map(|(f, p)| [*f, p])
        .collect())
}

#[wasm_bindgen(js_name = repumpScan)]
pub fn repump_scan_js(lasers: &Lasers, start_mhz: f64, stop_mhz: f64, points: usize) -> Result<Vec<f64>, JsError> {
    repump_scan(lasers, start_mhz, stop_mhz, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = coolingCurve)]
pub fn cooling_curve_js(lasers: &Lasers, start_mhz: f64, stop_mhz: f64, points: usize) -> Result<Vec<f64>, JsError> {
    cooling_curve(lasers, start_mhz, stop_mhz, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sidebandTrace)]
pub fn sideband_trace_js(order: i32, m_micro: f64, snr_unit_db: f64, seed: u64) -> Result<Vec<f64>, JsError> {
    sideband_trace(order, m_micro, snr_unit_db, seed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_has_requested_points_in_range() {
        let p = repump_scan(&Lasers::default(), -40.0, 40.0, 41).unwrap();
        assert_eq!(p.len(), 41);
        assert!(p.iter().all(|v| *v > 0.0 && *v < 0.5));
    }

    #[test]
    fn cooling_curve_matches_reference_point() {
        let a = cooling_curve(&Lasers::default(), -19.0, -19.0, 1).unwrap();
        assert!((a[0] - 529.0).abs() < 1.0, "{a:?}");
    }

    #[test]
    fn red_detuning_cools() {
        let a = cooling_curve(&Lasers::default(), -40.0, -15.0, 6).unwrap();
        assert!(a.iter().all(|v| *v > 0.0), "{a:?}");
    }

    #[test]
    fn sideband_trace_peaks_at_fifty_kilohertz() {
        let t = sideband_trace(1, 0.47, 40.0, 0).unwrap();
        let pairs: Vec<(f64, f64)> = t.chunks(2).map(|c| (c[0], c[1])).collect();
        let peak = pairs.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert!((peak.0 - 50e3).abs() < 2.0, "{peak:?}");
    }

    #[test]
    fn dark_setting_reports_an_error() {
        let lasers = Lasers { repump_intensity: 0.0, ..Lasers::default() };
        let p = repump_scan(&lasers, -10.0, 10.0, 3).unwrap();
        assert!(p.iter().all(|v| v.is_nan()));
        let bad = Lasers { cooling_intensity: -1.0, ..Lasers::default() };
        assert!(repump_scan(&bad, -10.0, 10.0, 3).is_err());
    }
}
