//! Cantilever mechanics: mass, flexural resonances, self-weight sag and the
//! two field-driven deflection mechanisms (magnetoelastic stress and magnetic
//! torque on the film moment).
//!
//! The tip sits midway between the two NV spins at rest gap `h₀`. A deflection
//! `d` moves it to gaps `h₁ = h₀ − d` and `h₂ = h₀ + d`, which defines the
//! asymmetry `Δh = 2|h₁ − h₂| / (h₁ + h₂) = 2d / h₀`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{PhysicalConstants, NV_ZERO_FIELD_SPLITTING};
use crate::error::{PhysicsError, Result};

/// Clamped-free eigenvalues `βₙ` for the first three flexural modes.
pub const MODE_BETAS: [f64; 3] = [1.8751, 4.6941, 7.8548];

/// Geometry and material data of a film-coated cantilever. SI throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantileverSpec {
    pub length: f64,
    pub width: f64,
    pub substrate_thickness: f64,
    pub film_thickness: f64,
    pub young_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
    /// Magnetoelastic coupling coefficient `B₁`, J/m³.
    pub magnetoelastic_b1: f64,
    /// Volume per film atom, m³.
    pub atomic_volume: f64,
    /// Film moment per atom in Bohr magnetons.
    pub moment_per_atom: f64,
    /// Tip-to-spin distance with the cantilever undeflected, m.
    pub rest_gap: f64,
}

impl CantileverSpec {
    /// Si(100) beam, 3000 × 300 × 30 nm, with a 10 nm bulk-like Ni film and a
    /// 25 nm rest gap.
    pub fn reference() -> Self {
        CantileverSpec {
            length: 3000e-9,
            width: 300e-9,
            substrate_thickness: 30e-9,
            film_thickness: 10e-9,
            young_modulus: 130e9,
            poisson_ratio: 0.279,
            density: 2330.0,
            magnetoelastic_b1: 9.38e6,
            atomic_volume: 1.096e-29,
            moment_per_atom: 2.0,
            rest_gap: 25e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length", self.length),
            ("width", self.width),
            ("substrate_thickness", self.substrate_thickness),
            ("young_modulus", self.young_modulus),
            ("density", self.density),
            ("atomic_volume", self.atomic_volume),
            ("rest_gap", self.rest_gap),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(PhysicsError::invalid(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.film_thickness >= 0.0 && self.film_thickness < self.substrate_thickness) {
            return Err(PhysicsError::invalid(format!(
                "film_thickness must lie in [0, substrate_thickness), got {}",
                self.film_thickness
            )));
        }
        if !(self.poisson_ratio > 0.0 && self.poisson_ratio < 0.5) {
            return Err(PhysicsError::invalid(format!(
                "poisson_ratio must lie in (0, 0.5), got {}",
                self.poisson_ratio
            )));
        }
        if !(self.magnetoelastic_b1.is_finite() && self.moment_per_atom.is_finite()) {
            return Err(PhysicsError::invalid("magnetic film parameters must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Magnetoelastic,
    Torque,
}

/// End deflection together with the resulting tip-spin gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeflectionReport {
    pub mechanism: Mechanism,
    pub deflection: f64,
    pub h1: f64,
    pub h2: f64,
    pub delta_h: f64,
    /// Set when the applied field exceeds [`max_field`] for the NV splitting.
    pub over_field: bool,
}

impl DeflectionReport {
    fn new(mechanism: Mechanism, deflection: f64, rest_gap: f64, over_field: bool) -> Result<Self> {
        if deflection >= rest_gap {
            return Err(PhysicsError::GapClosure { deflection_m: deflection, gap_m: rest_gap });
        }
        Ok(DeflectionReport {
            mechanism,
            deflection,
            h1: rest_gap - deflection,
            h2: rest_gap + deflection,
            delta_h: 2.0 * deflection / rest_gap,
            over_field,
        })
    }
}

pub fn mass(spec: &CantileverSpec) -> f64 {
    spec.density * spec.length * spec.width * spec.substrate_thickness
}

/// Flexural resonance `f = t β² √(Y/3ρ) / (4π L²)` in Hz for `mode` 1..=3.
pub fn resonance_frequency(spec: &CantileverSpec, mode: usize) -> Result<f64> {
    resonance_frequency_with(spec, mode, &MODE_BETAS)
}

/// Same as [`resonance_frequency`] with an explicit β table.
pub fn resonance_frequency_with(spec: &CantileverSpec, mode: usize, betas: &[f64; 3]) -> Result<f64> {
    if !(1..=3).contains(&mode) {
        return Err(PhysicsError::invalid(format!("mode index must be 1, 2 or 3, got {mode}")));
    }
    let beta = betas[mode - 1];
    Ok(spec.substrate_thickness * beta * beta * (spec.young_modulus / (3.0 * spec.density)).sqrt()
        / (4.0 * PI * spec.length * spec.length))
}

/// End deflection under uniform self-weight, `3ρ g L⁴ / (2 Y t²)`.
pub fn gravity_sag(spec: &CantileverSpec, constants: &PhysicalConstants) -> f64 {
    let l = spec.length;
    let t = spec.substrate_thickness;
    3.0 * spec.density * constants.gravity * l.powi(4) / (2.0 * spec.young_modulus * t * t)
}

/// Magnetoelastic end deflection `3 L² t_f (1+ν) B₁ / (Y t²)`, m, without the
/// gap check.
pub fn magnetoelastic_deflection(spec: &CantileverSpec) -> f64 {
    let l = spec.length;
    let t = spec.substrate_thickness;
    3.0 * l * l * spec.film_thickness * (1.0 + spec.poisson_ratio) * spec.magnetoelastic_b1
        / (spec.young_modulus * t * t)
}

/// Deflection from magnetoelastic film stress on magnetization reorientation.
/// Independent of the field magnitude.
pub fn deflection_magnetoelastic(spec: &CantileverSpec) -> Result<DeflectionReport> {
    DeflectionReport::new(Mechanism::Magnetoelastic, magnetoelastic_deflection(spec), spec.rest_gap, false)
}

/// Torque end deflection `4 t_f m_atom μ_B B₀ L³ / (ρ_atomic Y t³)`, m,
/// without the gap check.
pub fn torque_deflection(spec: &CantileverSpec, b0: f64, constants: &PhysicalConstants) -> f64 {
    let moment = spec.moment_per_atom * constants.bohr_magneton;
    4.0 * spec.film_thickness * moment * b0 * spec.length.powi(3)
        / (spec.atomic_volume * spec.young_modulus * spec.substrate_thickness.powi(3))
}

/// Deflection from the torque `m × B₀` on the in-plane film moment.
/// Linear in `b0` (tesla).
pub fn deflection_torque(spec: &CantileverSpec, b0: f64, constants: &PhysicalConstants) -> Result<DeflectionReport> {
    if !(b0 >= 0.0 && b0.is_finite()) {
        return Err(PhysicsError::invalid(format!("B0 must be non-negative, got {b0}")));
    }
    let over_field = b0 > max_field_with(NV_ZERO_FIELD_SPLITTING, constants);
    let defl = torque_deflection(spec, b0, constants);
    DeflectionReport::new(Mechanism::Torque, defl, spec.rest_gap, over_field)
}

/// `Δh(B₀)` for torque actuation, evaluated from its own closed form
/// `8 m_atom t_f μ_B B₀ L³ / (h₀ ρ_atomic Y t³)`.
pub fn asymmetry(spec: &CantileverSpec, b0: f64, constants: &PhysicalConstants) -> Result<f64> {
    // Gap closure and argument checks are shared with the deflection path.
    deflection_torque(spec, b0, constants)?;
    Ok(8.0 * spec.moment_per_atom * spec.film_thickness * constants.bohr_magneton * b0 * spec.length.powi(3)
        / (spec.rest_gap * spec.atomic_volume * spec.young_modulus * spec.substrate_thickness.powi(3)))
}

/// Zero-point amplitude `√(ħ / 2 m ω)` for an angular frequency `omega`.
pub fn zero_point_amplitude(mass: f64, omega: f64, constants: &PhysicalConstants) -> f64 {
    (constants.hbar / (2.0 * mass * omega)).sqrt()
}

/// Zero-point amplitude under both readings of "resonator frequency".
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroPointAmplitudes {
    /// `ω = 2π f`, the physically correct convention.
    pub angular: f64,
    /// `ω = f` numerically, which reproduces the ≈5e-13 m figure quoted for
    /// this cantilever.
    pub bare: f64,
}

pub fn zero_point_amplitudes(mass: f64, frequency_hz: f64, constants: &PhysicalConstants) -> ZeroPointAmplitudes {
    ZeroPointAmplitudes {
        angular: zero_point_amplitude(mass, 2.0 * PI * frequency_hz, constants),
        bare: zero_point_amplitude(mass, frequency_hz, constants),
    }
}

/// Largest field keeping the Zeeman shift below the zero-field splitting,
/// `ħ ω₀ / μ_B` in tesla.
pub fn max_field(zero_field_splitting: f64) -> f64 {
    max_field_with(zero_field_splitting, &PhysicalConstants::CODATA)
}

pub fn max_field_with(zero_field_splitting: f64, constants: &PhysicalConstants) -> f64 {
    constants.hbar * zero_field_splitting / constants.bohr_magneton
}
