//! Unit conversions.

use std::f64::consts::PI;

/// Multiplier taking an ordinary frequency in kHz to an angular frequency in rad/μs.
pub const KHZ_TO_RAD_PER_US: f64 = 2.0 * PI * 1e-3;

/// Speed of light in mm/μs.
pub const SPEED_OF_LIGHT_MM_PER_US: f64 = 299_792.458;

#[inline]
pub fn angular(khz: f64) -> f64 {
    khz * KHZ_TO_RAD_PER_US
}

/// Decay rate in kHz whose coherence envelope `exp(-2π·γ·t)` has time constant `t2_us`.
pub fn rate_from_t2(t2_us: f64) -> f64 {
    1.0 / (KHZ_TO_RAD_PER_US * t2_us)
}
