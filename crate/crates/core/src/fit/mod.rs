//! Nonlinear least squares: a bounded Levenberg-Marquardt engine, the
//! carrier/sideband response fit, and the excitation-scan fit that uses the
//! Bloch solver as its forward model.

mod lm;
mod scan;
mod sideband;

pub use lm::{least_squares, least_squares_masked, least_squares_xy, Observations};
pub use scan::{fit_bloch_scan, BlochParameter, ScanFitSpec};
pub use sideband::{
    fit_sideband_pair, fit_trace, initial_guess, FitMode, PowerScale, SidebandFitOptions,
    SidebandGuess, TraceKind, TraceModel,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeParameter {
    pub name: String,
    pub initial: f64,
    #[serde(default = "neg_inf")]
    pub lower: f64,
    #[serde(default = "pos_inf")]
    pub upper: f64,
}

fn neg_inf() -> f64 {
    f64::NEG_INFINITY
}

fn pos_inf() -> f64 {
    f64::INFINITY
}

impl FreeParameter {
    pub fn new(name: impl Into<String>, initial: f64) -> Self {
        Self {
            name: name.into(),
            initial,
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn bounded(name: impl Into<String>, initial: f64, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            initial,
            lower,
            upper,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.initial.is_finite() {
            return Err(Error::config(&self.name, "initial value must be finite"));
        }
        if !(self.lower <= self.initial && self.initial <= self.upper) {
            return Err(Error::config(
                &self.name,
                format!("initial value {} outside [{}, {}]", self.initial, self.lower, self.upper),
            ));
        }
        Ok(())
    }

    /// Magnitude used for finite-difference steps when the value is near 0.
    pub(crate) fn typical_scale(&self) -> f64 {
        let width = self.upper - self.lower;
        let s = self.initial.abs();
        if s > 0.0 {
            s
        } else if width.is_finite() && width > 0.0 {
            1e-3 * width
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Converged when every parameter moves by less than this, relatively.
    pub step_tolerance: f64,
    /// Converged when the cost drops by less than this, relatively.
    pub cost_tolerance: f64,
    /// Smallest-to-largest eigenvalue ratio of the column-normalized JᵀJ
    /// below which the fit is reported as non-identifiable.
    pub identifiability_threshold: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: 1e-9,
            cost_tolerance: 1e-12,
            identifiability_threshold: 1e-14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// Free-parameter names in fit order; the covariance uses this order.
    pub names: Vec<String>,
    pub parameters: BTreeMap<String, f64>,
    /// Present only for converged fits.
    pub standard_errors: Option<BTreeMap<String, f64>>,
    pub covariance: Option<Vec<Vec<f64>>>,
    /// ‖r‖ of the weighted residual vector.
    pub residual_norm: f64,
    pub chi_squared: f64,
    pub degrees_of_freedom: usize,
    pub iterations: usize,
    pub converged: bool,
    pub message: String,
    /// Indices of data points excluded from the fit.
    pub masked: Vec<usize>,
    /// Weighted residuals (y − model)/σ, 0 at masked points.
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl FitResult {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        free: &[FreeParameter],
        values: &[f64],
        residual_norm: f64,
        chi_squared: f64,
        degrees_of_freedom: usize,
        iterations: usize,
        converged: bool,
        message: String,
    ) -> Self {
        Self {
            names: free.iter().map(|f| f.name.clone()).collect(),
            parameters: free.iter().map(|f| f.name.clone()).zip(values.iter().cloned()).collect(),
            standard_errors: None,
            covariance: None,
            residual_norm,
            chi_squared,
            degrees_of_freedom,
            iterations,
            converged,
            message,
            masked: Vec::new(),
            residuals: Vec::new(),
        }
    }

    pub(crate) fn set_covariance(&mut self, cov: DMatrix<f64>) {
        self.standard_errors = Some(
            self.names
                .iter()
                .enumerate()
                .map(|(i, n)| (n.clone(), cov[(i, i)].max(0.0).sqrt()))
                .collect(),
        );
        self.covariance = Some(
            (0..cov.nrows())
                .map(|i| (0..cov.ncols()).map(|j| cov[(i, j)]).collect())
                .collect(),
        );
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.parameters.get(name).copied()
    }

    pub fn error(&self, name: &str) -> Option<f64> {
        self.standard_errors.as_ref()?.get(name).copied()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_slope_is_exact() {
        let x: Vec<f64> = (1..=20).map(|i| i as f64 * 0.37).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v + 0.1 * (v * 7.0).sin()).collect();
        let fit = least_squares_xy(
            |x, p| p[0] * x,
            &[FreeParameter::new("slope", 1.0)],
            &x,
            &Observations { y: &y, sigma: None },
            &FitOptions::default(),
        )
        .unwrap();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        assert!(fit.converged);
        assert_relative_eq!(fit.value("slope").unwrap(), sxy / sxx, max_relative = 1e-12);
    }

    #[test]
    fn exact_initial_guess_needs_no_iterations() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * (-0.2 * v).exp()).collect();
        let fit = least_squares_xy(
            |x, p| p[0] * (-p[1] * x).exp(),
            &[FreeParameter::new("a", 3.0), FreeParameter::new("k", 0.2)],
            &x,
            &Observations { y: &y, sigma: None },
            &FitOptions::default(),
        )
        .unwrap();
        assert_eq!(fit.iterations, 0);
        assert_eq!(fit.residual_norm, 0.0);
        assert!(fit.converged);
    }

    #[test]
    fn exponential_recovered_with_bounds() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.2).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.7 * (-0.8 * v).exp() + 0.05).collect();
        let fit = least_squares_xy(
            |x, p| p[0] * (-p[1] * x).exp() + p[2],
            &[
                FreeParameter::bounded("a", 1.0, 0.0, 10.0),
                FreeParameter::bounded("k", 0.3, 0.0, 5.0),
                FreeParameter::new("c", 0.0),
            ],
            &x,
            &Observations { y: &y, sigma: None },
            &FitOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(fit.value("a").unwrap(), 1.7, max_relative = 1e-7);
        assert_relative_eq!(fit.value("k").unwrap(), 0.8, max_relative = 1e-7);
    }

    #[test]
    fn redundant_parameters_are_reported() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 0.3 * v.sin()).collect();
        let err = least_squares_xy(
            |x, p| (p[0] + p[1]) * x,
            &[FreeParameter::new("a", 1.0), FreeParameter::new("b", 0.5)],
            &x,
            &Observations { y: &y, sigma: None },
            &FitOptions::default(),
        )
        .unwrap_err();
        match err {
            Error::NonIdentifiable { parameters } => assert_eq!(parameters, vec!["a", "b"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_few_points_rejected() {
        let err = least_squares_xy(
            |x, p| p[0] * x + p[1],
            &[FreeParameter::new("a", 1.0), FreeParameter::new("b", 0.0)],
            &[1.0, 2.0],
            &Observations { y: &[1.0, 2.0], sigma: None },
            &FitOptions::default(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn initial_outside_bounds_is_config_error() {
        let p = FreeParameter::bounded("a", 2.0, 0.0, 1.0);
        assert!(matches!(p.validate(), Err(Error::Config { .. })));
    }
}
