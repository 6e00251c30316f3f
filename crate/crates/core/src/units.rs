//! Unit helpers. Internally every frequency is angular (rad/s); files and the
//! command line use plain Hz.

use std::f64::consts::TAU;

pub const MHZ: f64 = 1e6;
pub const KHZ: f64 = 1e3;
pub const GAUSS: f64 = 1e-4;
pub const NM: f64 = 1e-9;
/// 1 mW/cm² in W/m².
pub const MW_PER_CM2: f64 = 10.0;

/// 2π × `hz`.
#[inline]
pub fn angular(hz: f64) -> f64 {
    TAU * hz
}

#[inline]
pub fn to_hz(omega: f64) -> f64 {
    omega / TAU
}

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(d: f64) -> f64 {
    10f64.powf(d / 10.0)
}

/// Serde adapter storing an angular frequency as Hz.
pub(crate) mod angular_as_hz {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(omega: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(super::to_hz(*omega))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d).map(super::angular)
    }
}
