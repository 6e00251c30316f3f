//! Time-domain integration of one secular mode under laser friction and an
//! optional drive.

use std::io::Write;

use serde::Serialize;

use super::{radiation_pressure_force, DriveConfig, SecularMode};
use crate::bloch::BlochSystem;
use crate::error::{Error, Result};
use crate::units::angular;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PhaseSpacePoint {
    /// m
    pub x: f64,
    /// m/s
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

/// Radiation-pressure force F(v) − F(0) tabulated on Chebyshev nodes over
/// [−v_max, v_max], so integrators do not re-solve the Bloch equations at
/// every step.
#[derive(Debug, Clone)]
pub struct ForceProfile {
    v_max: f64,
    coeffs: Vec<f64>,
}

impl ForceProfile {
    pub fn tabulate(system: &BlochSystem, v_max: f64, nodes: usize) -> Result<Self> {
        if !(v_max > 0.0) || nodes < 2 {
            return Err(Error::config("v_max", "need v_max > 0 and at least 2 nodes"));
        }
        let f0 = radiation_pressure_force(0.0, system)?;
        let n = nodes;
        let xs: Vec<f64> = (0..n)
            .map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos())
            .collect();
        let values = xs
            .iter()
            .map(|x| Ok(radiation_pressure_force(x * v_max, system)? - f0))
            .collect::<Result<Vec<f64>>>()?;
        let coeffs = (0..n)
            .map(|k| {
                let s: f64 = (0..n)
                    .map(|j| {
                        values[j]
                            * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / n as f64).cos()
                    })
                    .sum();
                s * 2.0 / n as f64
            })
            .collect();
        Ok(Self { v_max, coeffs })
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// F(v) − F(0); `None` outside the tabulated range.
    pub fn eval(&self, v: f64) -> Option<f64> {
        let x = v / self.v_max;
        if !(-1.0..=1.0).contains(&x) {
            return None;
        }
        // Clenshaw
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        Some(x * b1 - b2 + 0.5 * self.coeffs[0])
    }
}

/// Velocity-dependent force on the mode.
#[derive(Debug, Clone)]
pub enum Friction {
    /// F = −αMv.
    Linear { alpha: f64 },
    /// Full nonlinear radiation pressure minus its static part.
    Radiation(ForceProfile),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryOptions {
    pub duration: f64,
    /// Integration step; must not exceed 0.01 / f_mode.
    pub step: f64,
    /// Keep every n-th step in the output.
    pub record_every: usize,
}

impl TrajectoryOptions {
    /// 200 steps per mode period, every step recorded.
    pub fn for_mode(mode: &SecularMode, duration: f64) -> Self {
        Self {
            duration,
            step: 0.005 / mode.frequency,
            record_every: 1,
        }
    }
}

/// Integrates M x'' + Mω₀² x = F_friction(v) + F_drive cos(2π f_drive t) with
/// classical fourth-order Runge-Kutta.
pub fn damped_trajectory(
    initial: PhaseSpacePoint,
    friction: &Friction,
    mode: &SecularMode,
    drive: Option<&DriveConfig>,
    mass: f64,
    options: TrajectoryOptions,
) -> Result<Vec<TrajectorySample>> {
    if !(options.duration > 0.0) {
        return Err(Error::config("duration", "must be positive"));
    }
    let max_step = 0.01 / mode.frequency;
    if !(options.step > 0.0 && options.step <= max_step * (1.0 + 1e-12)) {
        return Err(Error::config(
            "step",
            format!("must be in (0, {max_step:e}] s (0.01 of a mode period)"),
        ));
    }
    if options.record_every == 0 {
        return Err(Error::config("record_every", "must be at least 1"));
    }
    if let Some(d) = drive {
        d.validate()?;
    }
    let w0sq = mode.omega().powi(2);
    let (f_amp, w_drive) = drive.map_or((0.0, 0.0), |d| (d.force_amplitude, angular(d.f_drive)));

    let accel = |t: f64, x: f64, v: f64| -> Result<f64> {
        let f_fric = match friction {
            Friction::Linear { alpha } => -alpha * mass * v,
            Friction::Radiation(profile) => profile.eval(v).ok_or_else(|| {
                Error::domain(format!(
                    "velocity {v:e} m/s left the tabulated force range ±{:e}",
                    profile.v_max()
                ))
            })?,
        };
        Ok(-w0sq * x + (f_fric + f_amp * (w_drive * t).cos()) / mass)
    };

    let h = options.step;
    let n_steps = (options.duration / h).round() as usize;
    let mut out = Vec::with_capacity(n_steps / options.record_every + 1);
    let (mut x, mut v) = (initial.x, initial.v);
    out.push(TrajectorySample { t: 0.0, x, v });
    for i in 0..n_steps {
        let t = i as f64 * h;
        let k1x = v;
        let k1v = accel(t, x, v)?;
        let k2x = v + 0.5 * h * k1v;
        let k2v = accel(t + 0.5 * h, x + 0.5 * h * k1x, k2x)?;
        let k3x = v + 0.5 * h * k2v;
        let k3v = accel(t + 0.5 * h, x + 0.5 * h * k2x, k3x)?;
        let k4x = v + h * k3v;
        let k4v = accel(t + h, x + h * k3x, k4x)?;
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (i + 1) % options.record_every == 0 {
            out.push(TrajectorySample { t: (i + 1) as f64 * h, x, v });
        }
    }
    Ok(out)
}

/// CSV with columns `t_s,x_m,v_mps`.
pub fn write_trajectory_csv<W: Write>(samples: &[TrajectorySample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_s", "x_m", "v_mps"])?;
    for s in samples {
        w.write_record([s.t.to_string(), s.x.to_string(), s.v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
