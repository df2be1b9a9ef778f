//! Physical constants (CODATA 2018 values).

use serde::Serialize;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Electron spin g-factor, rounded.
pub const G_FACTOR: f64 = 2.0;
/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;
/// NV ground-state zero-field splitting used for the field bound, s⁻¹.
///
/// Taken as a bare number (2.88e9) rather than 2π·2.88 GHz; the field bound of
/// 32.7 mT follows only from that convention.
pub const NV_ZERO_FIELD_SPLITTING: f64 = 2.88e9;

/// Immutable bundle of the constants the formulas consume.
///
/// Kept as a value so tests can zero out gravity or swap the g-factor without
/// touching globals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub bohr_magneton: f64,
    pub g_factor: f64,
    pub gravity: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants =
        PhysicalConstants { hbar: HBAR, bohr_magneton: BOHR_MAGNETON, g_factor: G_FACTOR, gravity: GRAVITY };

    /// Angular frequency per tesla for a Bohr-magneton Zeeman shift, rad/(s·T).
    pub fn zeeman_rate(&self) -> f64 {
        self.bohr_magneton / self.hbar
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}
