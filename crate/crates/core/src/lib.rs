//! Resonance fluorescence of a single laser-cooled, trapped Ba⁺ ion.
//!
//! * [`atom`]: level structure, Zeeman shifts, dipole couplings, Rabi frequencies.
//! * [`bloch`]: eight-level Bloch equations, steady state, excitation spectra.
//! * [`motion`]: radiation-pressure friction, cooling rate, driven secular motion,
//!   micromotion modulation index.
//! * [`spectrum`]: heterodyne signal synthesis, spectrum-analyzer emulation, SNR.
//! * [`fit`]: Levenberg-Marquardt fits of sideband traces and excitation scans.

pub mod atom;
pub mod bessel;
pub mod bloch;
pub mod error;
pub mod fit;
pub mod motion;
pub mod spectrum;
pub mod units;

pub use error::{Error, Result};
