//! NV spin model: three-level Hamiltonian, reduction to a dressed two-level
//! system, spin-tip coupling and the asymmetric coupling bundle.
//!
//! Frequencies are angular (rad/s). The dressed mixing angle uses the branch
//! `sin θ = Ω/ω`, `cos θ = −δ/ω`, so `sin θ ≥ 0` whenever `Ω > 0`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use crate::constants::{PhysicalConstants, NV_ZERO_FIELD_SPLITTING};
use crate::error::{PhysicsError, Result};
use crate::mechanics::max_field_with;

/// Relative size below which a resonator-spin detuning counts as zero.
pub const DISPERSIVE_TOLERANCE: f64 = 1e-12;

/// Microwave drive and field environment of one NV spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriveConfig {
    /// Zero-field Rabi frequency `Ω₀`, rad/s.
    pub bare_rabi: f64,
    /// Applied static field `B₀`, T.
    pub static_field: f64,
    /// Film stray field at the spin `B_ms`, T.
    pub tip_field_at_spin: f64,
    /// Drive detuning `δ`, rad/s.
    pub detuning: f64,
    /// Resonator angular frequency `ω_r`, rad/s.
    pub resonator_frequency: f64,
    /// Tip field magnitude `|B_tip|`, T.
    pub tip_field_magnitude: f64,
}

impl DriveConfig {
    pub fn within_field_bound(&self, constants: &PhysicalConstants) -> bool {
        self.static_field <= max_field_with(NV_ZERO_FIELD_SPLITTING, constants)
    }
}

/// Rabi frequency after the Zeeman correction, `Ω₀ − (μ_B/ħ)(B₀ + B_ms)`.
///
/// Fields beyond the splitting bound are still evaluated; check
/// [`DriveConfig::within_field_bound`] separately.
pub fn effective_rabi(config: &DriveConfig, constants: &PhysicalConstants) -> Result<f64> {
    let shift = constants.zeeman_rate() * (config.static_field + config.tip_field_at_spin);
    let rabi = config.bare_rabi - shift;
    if !(rabi > 0.0) {
        return Err(PhysicsError::ParameterRegime(format!(
            "effective Rabi frequency {rabi:.6e} rad/s is not positive (Zeeman shift {shift:.6e} rad/s)"
        )));
    }
    Ok(rabi)
}

/// Driven NV triplet in the rotating frame, basis order `{|−1⟩, |0⟩, |+1⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelSystem {
    pub detuning_plus: f64,
    pub detuning_minus: f64,
    pub rabi_plus: f64,
    pub rabi_minus: f64,
    pub matrix: Matrix3<Complex64>,
}

pub fn three_level_hamiltonian(
    detuning_plus: f64,
    detuning_minus: f64,
    rabi_plus: f64,
    rabi_minus: f64,
) -> ThreeLevelSystem {
    let c = |x: f64| Complex64::new(x, 0.0);
    let (m1, z, p1) = (0usize, 1usize, 2usize);
    let mut h = Matrix3::<Complex64>::zeros();
    h[(m1, m1)] = c(-detuning_minus);
    h[(p1, p1)] = c(-detuning_plus);
    h[(z, m1)] = c(rabi_minus / 2.0);
    h[(m1, z)] = c(rabi_minus / 2.0);
    h[(z, p1)] = c(rabi_plus / 2.0);
    h[(p1, z)] = c(rabi_plus / 2.0);
    ThreeLevelSystem { detuning_plus, detuning_minus, rabi_plus, rabi_minus, matrix: h }
}

impl ThreeLevelSystem {
    pub fn ground() -> Vector3<Complex64> {
        Vector3::new(Complex64::ZERO, Complex64::ONE, Complex64::ZERO)
    }

    /// `(|−1⟩ + |+1⟩)/√2`
    pub fn bright() -> Vector3<Complex64> {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Vector3::new(s, Complex64::ZERO, s)
    }

    /// `(|−1⟩ − |+1⟩)/√2`
    pub fn dark() -> Vector3<Complex64> {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Vector3::new(s, Complex64::ZERO, -s)
    }

    /// `⟨bra|H|ket⟩`
    pub fn element(&self, bra: &Vector3<Complex64>, ket: &Vector3<Complex64>) -> Complex64 {
        bra.dotc(&(self.matrix * ket))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Dressed splitting and mixing angle of the driven two-level system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DressedParameters {
    pub omega: f64,
    pub theta: f64,
}

impl DressedParameters {
    pub fn sin_theta(&self) -> f64 {
        self.theta.sin()
    }

    pub fn cos_theta(&self) -> f64 {
        self.theta.cos()
    }
}

/// `ω = √(Ω² + δ²)` and `θ` with `tan θ = −Ω/δ`, `sin θ = Ω/ω`.
pub fn dressed_parameters(rabi: f64, detuning: f64) -> Result<DressedParameters> {
    if rabi == 0.0 && detuning == 0.0 {
        return Err(PhysicsError::invalid("dressed basis undefined for Ω = δ = 0"));
    }
    Ok(DressedParameters { omega: rabi.hypot(detuning), theta: rabi.atan2(-detuning) })
}

/// Field gradient `|B_tip| / h` at tip-spin gap `h`, T/m.
pub fn field_gradient(tip_field: f64, gap: f64) -> f64 {
    tip_field / gap
}

/// Spin-resonator coupling `λ = g μ_B G a₀ / ħ` in rad/s.
pub fn tip_coupling(gradient: f64, zero_point_amplitude: f64, constants: &PhysicalConstants) -> f64 {
    constants.g_factor * constants.bohr_magneton * gradient * zero_point_amplitude / constants.hbar
}

/// Parameters of both spins once the tip is displaced off-centre.
///
/// Index 1 is the spin the tip moved towards (coupling enhanced by `1 + Δh`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingSet {
    pub lambda: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub rabi: f64,
    pub rabi1: f64,
    pub rabi2: f64,
    /// Drive detuning `δ`, common to both spins.
    pub drive_detuning: f64,
    pub omega: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub resonator_frequency: f64,
    /// `Δ = ω_r − ω`
    pub detuning: f64,
    pub detuning1: f64,
    pub detuning2: f64,
    pub theta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub delta_h: f64,
    pub phonon_number: f64,
    /// `α = Ω² / (ω Δ)`
    pub alpha: f64,
}

fn check_dispersive(which: &'static str, value: f64, scale: f64) -> Result<()> {
    if value.abs() <= DISPERSIVE_TOLERANCE * scale {
        return Err(PhysicsError::DispersiveBreakdown { which, value });
    }
    Ok(())
}

/// Expand the symmetric parameters to the two spins at asymmetry `delta_h`.
///
/// `λ₁,₂ = λ(1 ± Δh)`, `Ω₁,₂ = Ω(1 ± Δh)`, `ω₁,₂ = ω ± (Ω²/ω)Δh` and
/// `Δᵢ = ω_r − ωᵢ`. The mixing angles come from the exact dressed basis of
/// each `Ωᵢ`. Negative `delta_h` is the same configuration with the spin labels
/// exchanged.
pub fn asymmetric_couplings(
    lambda: f64,
    rabi: f64,
    drive_detuning: f64,
    resonator_frequency: f64,
    delta_h: f64,
    phonon_number: f64,
) -> Result<CouplingSet> {
    if !(delta_h.abs() < 1.0) {
        return Err(PhysicsError::invalid(format!("Δh must satisfy |Δh| < 1, got {delta_h}")));
    }
    if !(phonon_number >= 0.0) {
        return Err(PhysicsError::invalid(format!("phonon number must be ≥ 0, got {phonon_number}")));
    }
    let dressed = dressed_parameters(rabi, drive_detuning)?;
    let omega = dressed.omega;
    let scale = resonator_frequency.abs().max(omega);
    let detuning = resonator_frequency - omega;
    check_dispersive("Δ", detuning, scale)?;

    let d_omega = rabi * rabi / omega * delta_h;
    let (omega1, omega2) = (omega + d_omega, omega - d_omega);
    let (detuning1, detuning2) = (resonator_frequency - omega1, resonator_frequency - omega2);
    check_dispersive("Δ₁", detuning1, scale)?;
    check_dispersive("Δ₂", detuning2, scale)?;

    let (rabi1, rabi2) = (rabi * (1.0 + delta_h), rabi * (1.0 - delta_h));
    let theta1 = dressed_parameters(rabi1, drive_detuning)?.theta;
    let theta2 = dressed_parameters(rabi2, drive_detuning)?.theta;

    Ok(CouplingSet {
        lambda,
        lambda1: lambda * (1.0 + delta_h),
        lambda2: lambda * (1.0 - delta_h),
        rabi,
        rabi1,
        rabi2,
        drive_detuning,
        omega,
        omega1,
        omega2,
        resonator_frequency,
        detuning,
        detuning1,
        detuning2,
        theta: dressed.theta,
        theta1,
        theta2,
        delta_h,
        phonon_number,
        alpha: rabi * rabi / (omega * detuning),
    })
}

impl CouplingSet {
    /// The same physical configuration with spins 1 and 2 relabelled.
    pub fn swapped(&self) -> CouplingSet {
        CouplingSet {
            lambda1: self.lambda2,
            lambda2: self.lambda1,
            rabi1: self.rabi2,
            rabi2: self.rabi1,
            omega1: self.omega2,
            omega2: self.omega1,
            detuning1: self.detuning2,
            detuning2: self.detuning1,
            theta1: self.theta2,
            theta2: self.theta1,
            delta_h: -self.delta_h,
            ..*self
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.delta_h == 0.0
    }
}

/// Flip-flop coupling in the asymmetry expansion,
/// `J = (2λ²/ω) α [1 + (α² − 1) Δh²]`.
///
/// Uses `sin θ₁,₂ ≈ sin θ`; the exact Hamiltonian in
/// [`crate::dynamics::build_heff`] keeps the two angles separate.
pub fn effective_coupling_strength(set: &CouplingSet) -> f64 {
    let a = set.alpha;
    2.0 * set.lambda * set.lambda / set.omega * a * (1.0 + (a * a - 1.0) * set.delta_h * set.delta_h)
}

/// `J(Δh) / J(0) = 1 + (α² − 1) Δh²`.
pub fn coupling_enhancement_ratio(set: &CouplingSet) -> f64 {
    let a = set.alpha;
    1.0 + (a * a - 1.0) * set.delta_h * set.delta_h
}

/// Whether asymmetry strengthens the spin-spin coupling: `Ω⁴ / (ω² Δ²) > 1`.
pub fn enhancement_predicate(set: &CouplingSet) -> bool {
    let r2 = set.rabi * set.rabi;
    r2 * r2 / (set.omega * set.omega * set.detuning * set.detuning) > 1.0
}
