//! Conversions at the config boundary. Everything past this point is SI.

use std::f64::consts::TAU;

pub const GPA: f64 = 1e9;
pub const MJ_PER_M3: f64 = 1e6;

// Dividing by the exact reciprocal keeps integer inputs identical to literals
// such as `3000e-9`.
pub fn nm_to_m(nm: f64) -> f64 {
    nm / 1e9
}

pub fn m_to_nm(m: f64) -> f64 {
    m * 1e9
}

pub fn mt_to_t(mt: f64) -> f64 {
    mt / 1e3
}

pub fn t_to_mt(t: f64) -> f64 {
    t * 1e3
}

pub fn us_to_s(us: f64) -> f64 {
    us / 1e6
}

pub fn s_to_us(s: f64) -> f64 {
    s * 1e6
}

/// Cyclic frequency in MHz to angular frequency in rad/s (2π included).
pub fn mhz_to_angular(mhz: f64) -> f64 {
    TAU * mhz * 1e6
}

/// Angular frequency in rad/s back to cyclic MHz.
pub fn angular_to_mhz(rad_per_s: f64) -> f64 {
    rad_per_s / (TAU * 1e6)
}

pub fn hz_to_angular(hz: f64) -> f64 {
    TAU * hz
}
