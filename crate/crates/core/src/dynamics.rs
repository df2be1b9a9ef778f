//! Two-spin dynamics under the effective (resonator-eliminated) Hamiltonian.
//!
//! Product basis order is `{|ee⟩, |eg⟩, |ge⟩, |gg⟩}` (index 0..4). Bell states:
//!
//! ```text
//! |Φ±⟩ = (|ee⟩ ± |gg⟩)/√2      amplitudes C₁, C₂
//! |ψ±⟩ = (|eg⟩ ± |ge⟩)/√2      amplitudes C₃, C₄
//! ```
//!
//! The effective Hamiltonian only couples Φ⁺↔Φ⁻ and ψ⁺↔ψ⁻, so each Bell
//! block evolves on its own. In the `A, B, D, F` parametrisation the blocks are
//! `∓A σₓ` (Φ) and `B σ_z + D σₓ` (ψ, with `F² = B² + D²`).

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PhysicsError, Result};
use crate::spin_model::{CouplingSet, DISPERSIVE_TOLERANCE};

/// Normalisation tolerance for caller-supplied states.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// RK4 steps must satisfy `‖H‖_F · dt` below this.
pub const MAX_STEP_PHASE: f64 = 0.1;

/// The closed-form concurrence expression is evaluated with frequencies in
/// rad/μs and times in μs, the units the figures are drawn in. Its last term is
/// not dimensionally homogeneous, so the unit choice changes its value.
pub const CLOSED_FORM_TIME_UNIT: f64 = 1e-6;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Amplitudes `C₁..C₄` on `|Φ⁺⟩, |Φ⁻⟩, |ψ⁺⟩, |ψ⁻⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellAmplitudes(pub [Complex64; 4]);

impl BellAmplitudes {
    /// Checked constructor: the state must be normalised.
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self> {
        let state = BellAmplitudes(amplitudes);
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(PhysicsError::invalid(format!("Bell amplitudes not normalised: Σ|Cᵢ|² = {norm}")));
        }
        Ok(state)
    }

    pub fn from_real(amplitudes: [f64; 4]) -> Result<Self> {
        Self::new(amplitudes.map(re))
    }

    /// `C₁ = C₂ = C₃ = C₄ = 1/2`, i.e. the product state `|e⟩(|e⟩+|g⟩)/√2`.
    pub fn uniform() -> Self {
        BellAmplitudes([re(0.5); 4])
    }

    pub fn basis(index: usize) -> Self {
        let mut c = [Complex64::ZERO; 4];
        c[index] = Complex64::ONE;
        BellAmplitudes(c)
    }

    pub fn phi_plus() -> Self {
        Self::basis(0)
    }

    pub fn phi_minus() -> Self {
        Self::basis(1)
    }

    pub fn psi_plus() -> Self {
        Self::basis(2)
    }

    pub fn psi_minus() -> Self {
        Self::basis(3)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Population of the Φ block, `|C₁|² + |C₂|²`.
    pub fn phi_weight(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn psi_weight(&self) -> f64 {
        self.0[2].norm_sqr() + self.0[3].norm_sqr()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.0.iter().all(|c| c.im.abs() <= tol)
    }

    pub fn to_product(&self) -> Vector4<Complex64> {
        let [c1, c2, c3, c4] = self.0;
        let s = FRAC_1_SQRT_2;
        Vector4::new((c1 + c2) * s, (c3 + c4) * s, (c3 - c4) * s, (c1 - c2) * s)
    }

    pub fn from_product(psi: &Vector4<Complex64>) -> Self {
        let s = FRAC_1_SQRT_2;
        let (ee, eg, ge, gg) = (psi[0], psi[1], psi[2], psi[3]);
        BellAmplitudes([(ee + gg) * s, (ee - gg) * s, (eg + ge) * s, (eg - ge) * s])
    }

    pub fn max_abs_diff(&self, other: &BellAmplitudes) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Bell-block frequencies of the effective dynamics, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbdfCoefficients {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub f: f64,
}

/// Block frequencies in the asymmetry expansion:
///
/// ```text
/// A = (λ²/2ω)(2n+1) α [1 − (α−1)Δh²]
/// B = −(λ²Ω²/2ω²Δ)   [1 − (α−1)Δh²]
/// D = −(λ²/2ω)(2n+1) α (α−1) Δh
/// F = √(B² + D²)
/// ```
///
/// `λ²Ω²/(2ω²Δ)` is rewritten as `(λ²/2ω) α` so that `B (2n+1) = −A` holds
/// bit for bit.
pub fn abdf(set: &CouplingSet) -> AbdfCoefficients {
    let alpha = set.alpha;
    let dh = set.delta_h;
    let occupation = 2.0 * set.phonon_number + 1.0;
    let base = set.lambda * set.lambda / (2.0 * set.omega) * alpha;
    let correction = 1.0 - (alpha - 1.0) * dh * dh;
    let k = base * correction;
    let a = k * occupation;
    let b = -k;
    let d = -base * occupation * (alpha - 1.0) * dh;
    AbdfCoefficients { a, b, d, f: b.hypot(d) }
}

/// Effective Hamiltonian in the product basis, with the couplings it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub matrix: Matrix4<Complex64>,
    pub couplings: CouplingSet,
}

impl EffectiveHamiltonian {
    pub fn hermiticity_defect(&self) -> f64 {
        (self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm, an upper bound on the spectral radius.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Largest matrix element linking `{|ee⟩, |gg⟩}` to `{|eg⟩, |ge⟩}`.
    pub fn block_coupling(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in [0usize, 3] {
            for j in [1usize, 2] {
                worst = worst.max(self.matrix[(i, j)].norm()).max(self.matrix[(j, i)].norm());
            }
        }
        worst
    }
}

/// Effective Hamiltonian of the two spins after eliminating the resonator:
///
/// ```text
/// H = −¼ (s₁ σ₁ᶻ + s₂ σ₂ᶻ) − ¼ J (σ₁⁺σ₂⁻ + σ₁⁻σ₂⁺)
/// sᵢ = sin²θᵢ (λᵢ²/Δᵢ)(2n+1),   J = sin θ₁ sin θ₂ λ₁λ₂ (1/Δ₁ + 1/Δ₂)
/// ```
///
/// Both mixing angles are used exactly, no `sin θᵢ ≈ sin θ` shortcut.
pub fn build_heff(set: &CouplingSet) -> Result<EffectiveHamiltonian> {
    let scale = set.resonator_frequency.abs().max(set.omega.abs());
    for (which, value) in [("Δ₁", set.detuning1), ("Δ₂", set.detuning2)] {
        if value.abs() <= DISPERSIVE_TOLERANCE * scale {
            return Err(PhysicsError::DispersiveBreakdown { which, value });
        }
    }
    let occupation = 2.0 * set.phonon_number + 1.0;
    let (sin1, sin2) = (set.theta1.sin(), set.theta2.sin());
    let s1 = sin1 * sin1 * set.lambda1 * set.lambda1 / set.detuning1 * occupation;
    let s2 = sin2 * sin2 * set.lambda2 * set.lambda2 / set.detuning2 * occupation;
    let j = sin1 * sin2 * set.lambda1 * set.lambda2 * (1.0 / set.detuning1 + 1.0 / set.detuning2);

    // σᶻ eigenvalues of spin 1 and spin 2 on ee, eg, ge, gg
    const Z1: [f64; 4] = [1.0, 1.0, -1.0, -1.0];
    const Z2: [f64; 4] = [1.0, -1.0, 1.0, -1.0];
    let mut h = Matrix4::<Complex64>::zeros();
    for k in 0..4 {
        h[(k, k)] = re(-0.25 * (s1 * Z1[k] + s2 * Z2[k]));
    }
    // σ₁⁺σ₂⁻ |ge⟩ = |eg⟩ and its conjugate
    h[(1, 2)] = re(-0.25 * j);
    h[(2, 1)] = re(-0.25 * j);
    Ok(EffectiveHamiltonian { matrix: h, couplings: *set })
}

/// Which evolution route produces the Bell amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionMode {
    /// Closed form with the Φ block rotated by real `cos/−sin` factors, as
    /// commonly printed. Not norm preserving unless `C₁ = C₂ = 0`.
    Printed,
    /// Closed form with a unitary Φ block.
    Unitary,
    /// RK4 integration of the effective Hamiltonian.
    Numeric,
}

impl fmt::Display for EvolutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvolutionMode::Printed => "printed",
            EvolutionMode::Unitary => "unitary",
            EvolutionMode::Numeric => "numeric",
        })
    }
}

impl FromStr for EvolutionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "printed" => Ok(EvolutionMode::Printed),
            "unitary" => Ok(EvolutionMode::Unitary),
            "numeric" => Ok(EvolutionMode::Numeric),
            other => Err(format!("unknown evolution mode '{other}' (expected printed, unitary or numeric)")),
        }
    }
}

/// `sin(F t) / F`, finite as `F → 0`.
fn sin_over(f: f64, t: f64) -> f64 {
    let x = f * t;
    if x.abs() < 1e-6 {
        t * (1.0 - x * x / 6.0)
    } else {
        x.sin() / f
    }
}

/// Closed-form Bell amplitudes at time `t` (seconds).
///
/// Φ block, printed: `C₁ cos At − C₂ sin At`, `C₂ cos At − C₁ sin At`.
/// Φ block, unitary: `C₁ cos At + i C₂ sin At`, `C₂ cos At + i C₁ sin At`,
/// which is the exact propagator of the `−A σₓ` block of [`build_heff`].
///
/// ψ block (both modes): `exp(−i t (B σ_z + D σₓ))`, written as
/// `cos Ft − i (B/F) sin Ft` etc. with `sin(Ft)/F → t` at `F = 0`.
pub fn evolve_closed_form(
    state0: &BellAmplitudes,
    coeffs: &AbdfCoefficients,
    t: f64,
    mode: EvolutionMode,
) -> Result<BellAmplitudes> {
    if !(t >= 0.0) {
        return Err(PhysicsError::invalid(format!("evolution time must be ≥ 0, got {t}")));
    }
    let [c1, c2, c3, c4] = state0.0;
    let (sa, ca) = (coeffs.a * t).sin_cos();
    let (n1, n2) = match mode {
        EvolutionMode::Printed => (c1 * ca - c2 * sa, c2 * ca - c1 * sa),
        EvolutionMode::Unitary => (c1 * ca + I * c2 * sa, c2 * ca + I * c1 * sa),
        EvolutionMode::Numeric => {
            return Err(PhysicsError::invalid("numeric mode has no closed form; use evolve_numeric"));
        }
    };
    let cf = (coeffs.f * t).cos();
    let s = sin_over(coeffs.f, t);
    let diag_plus = re(cf) - I * (coeffs.b * s);
    let diag_minus = re(cf) + I * (coeffs.b * s);
    let off = -I * (coeffs.d * s);
    let n3 = diag_plus * c3 + off * c4;
    let n4 = off * c3 + diag_minus * c4;
    Ok(BellAmplitudes([n1, n2, n3, n4]))
}

/// Fixed-step classical RK4 for `i dψ/dt = H ψ` in the product basis.
#[derive(Debug, Clone)]
pub struct Rk4Propagator {
    generator: Matrix4<Complex64>,
}

impl Rk4Propagator {
    pub fn new(heff: &EffectiveHamiltonian) -> Self {
        Rk4Propagator { generator: heff.matrix * (-I) }
    }

    pub fn step(&self, psi: &Vector4<Complex64>, dt: f64) -> Vector4<Complex64> {
        let g = &self.generator;
        let h = re(dt);
        let k1 = g * psi;
        let k2 = g * (psi + k1 * (h * 0.5));
        let k3 = g * (psi + k2 * (h * 0.5));
        let k4 = g * (psi + k3 * h);
        psi + (k1 + k2 * re(2.0) + k3 * re(2.0) + k4) * (h / 6.0)
    }
}

fn check_step(heff: &EffectiveHamiltonian, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(PhysicsError::invalid(format!("dt must be positive, got {dt}")));
    }
    let phase = heff.norm() * dt;
    if phase >= MAX_STEP_PHASE {
        return Err(PhysicsError::invalid(format!(
            "step too large: ‖H‖·dt = {phase:.3e} must stay below {MAX_STEP_PHASE}"
        )));
    }
    Ok(())
}

/// Integrate to time `t` with step `dt`. When `t` is not a multiple of `dt`
/// the last step is shortened. The norm is not renormalised, so drift stays
/// measurable.
pub fn evolve_numeric(state0: &BellAmplitudes, heff: &EffectiveHamiltonian, t: f64, dt: f64) -> Result<BellAmplitudes> {
    check_step(heff, dt)?;
    if !(t >= 0.0) {
        return Err(PhysicsError::invalid(format!("evolution time must be ≥ 0, got {t}")));
    }
    if t > 0.0 && dt > t {
        return Err(PhysicsError::invalid(format!("dt = {dt} exceeds the evolution time {t}")));
    }
    if t == 0.0 {
        return Ok(*state0);
    }
    let prop = Rk4Propagator::new(heff);
    let mut psi = state0.to_product();
    let ratio = t / dt;
    let mut steps = ratio.round();
    let mut remainder = 0.0;
    if (ratio - steps).abs() > 1e-9 {
        steps = ratio.floor();
        remainder = t - steps * dt;
    }
    for _ in 0..steps as u64 {
        psi = prop.step(&psi, dt);
    }
    if remainder > 0.0 {
        psi = prop.step(&psi, remainder);
    }
    Ok(BellAmplitudes::from_product(&psi))
}

/// States at `t = k · stride · dt` for `k = 0 ..= steps / stride`, from one
/// continuous RK4 run.
pub fn sample_numeric(
    state0: &BellAmplitudes,
    heff: &EffectiveHamiltonian,
    dt: f64,
    steps: usize,
    stride: usize,
) -> Result<Vec<BellAmplitudes>> {
    check_step(heff, dt)?;
    if stride == 0 {
        return Err(PhysicsError::invalid("sampling stride must be ≥ 1"));
    }
    let prop = Rk4Propagator::new(heff);
    let mut psi = state0.to_product();
    let mut out = Vec::with_capacity(steps / stride + 1);
    out.push(*state0);
    for k in 1..=steps {
        psi = prop.step(&psi, dt);
        if k % stride == 0 {
            out.push(BellAmplitudes::from_product(&psi));
        }
    }
    Ok(out)
}

/// `σ_y ⊗ σ_y` in the product basis.
pub fn spin_flip() -> Matrix4<Complex64> {
    let mut y = Matrix4::<Complex64>::zeros();
    y[(0, 3)] = re(-1.0);
    y[(3, 0)] = re(-1.0);
    y[(1, 2)] = re(1.0);
    y[(2, 1)] = re(1.0);
    y
}

/// Pure-state concurrence `|⟨ψ*| σ_y⊗σ_y |ψ⟩|`.
pub fn concurrence_pure(state: &BellAmplitudes) -> f64 {
    let psi = state.to_product();
    let bra_conj = psi.conjugate();
    bra_conj.dotc(&(spin_flip() * psi)).norm()
}

/// Concurrence from the density matrix, `max(0, μ₁ − μ₂ − μ₃ − μ₄)` with `μᵢ`
/// the decreasing square roots of the eigenvalues of `ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
///
/// The `μᵢ` are obtained as singular values of `√ρ · (σ_y⊗σ_y) · √ρ*`, which
/// share that spectrum and avoid taking square roots of rounding noise.
pub fn wootters_concurrence_density(rho: &Matrix4<Complex64>) -> f64 {
    let eig = rho.symmetric_eigen();
    let trace: f64 = eig.eigenvalues.iter().sum();
    let cutoff = 1e-13 * trace.abs().max(1.0);
    let mut sqrt_rho = Matrix4::<Complex64>::zeros();
    for k in 0..4 {
        let lambda = eig.eigenvalues[k];
        if lambda > cutoff {
            let v = eig.eigenvectors.column(k);
            sqrt_rho += v * v.adjoint() * re(lambda.sqrt());
        }
    }
    let product = sqrt_rho * spin_flip() * sqrt_rho.conjugate();
    let mut mu: Vec<f64> = product.singular_values().iter().copied().collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    (mu[0] - mu[1] - mu[2] - mu[3]).max(0.0)
}

pub fn wootters_concurrence(state: &BellAmplitudes) -> f64 {
    let psi = state.to_product();
    let norm = psi.norm_squared();
    wootters_concurrence_density(&(psi * psi.adjoint() / re(norm)))
}

/// Result of the closed-form concurrence expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormConcurrence {
    pub value: f64,
    /// True when `F ± B` or `F` vanished and the value came from printed-mode
    /// evolution plus [`concurrence_pure`] instead.
    pub fallback: bool,
}

/// Literal seven-term closed form for `|C(t)|` from real initial amplitudes.
///
/// Evaluated term by term as printed, including its last term, which differs
/// from the product of the two ψ-block rational amplitudes (see the verify
/// report). Frequencies and time are taken in rad/μs and μs.
pub fn concurrence_closed_form(
    state0: &BellAmplitudes,
    coeffs: &AbdfCoefficients,
    t: f64,
) -> Result<ClosedFormConcurrence> {
    closed_form(state0, coeffs, t, false)
}

/// The closed form with its last term replaced by
/// `−(D C₃ − (F+B) C₄)(D C₃ + (F−B) C₄) / 2F²`, the cross term of the two
/// ψ-block amplitudes. Agrees with the evolved state to rounding at any `Δh`;
/// used to localise the deviation of the literal form.
pub fn concurrence_closed_form_factored(
    state0: &BellAmplitudes,
    coeffs: &AbdfCoefficients,
    t: f64,
) -> Result<ClosedFormConcurrence> {
    closed_form(state0, coeffs, t, true)
}

fn closed_form(
    state0: &BellAmplitudes,
    coeffs: &AbdfCoefficients,
    t: f64,
    factored_last: bool,
) -> Result<ClosedFormConcurrence> {
    if !state0.is_real(NORM_TOLERANCE) {
        return Err(PhysicsError::invalid("closed-form concurrence needs real initial amplitudes"));
    }
    let u = CLOSED_FORM_TIME_UNIT;
    let (a, b, d, f) = (coeffs.a * u, coeffs.b * u, coeffs.d * u, coeffs.f * u);
    let t = t / u;
    let degenerate = f == 0.0 || (f + b).abs() <= 1e-9 * f || (f - b).abs() <= 1e-9 * f;
    if degenerate {
        let evolved = evolve_closed_form(state0, coeffs, t * u, EvolutionMode::Printed)?;
        return Ok(ClosedFormConcurrence { value: concurrence_pure(&evolved), fallback: true });
    }

    let [c1, c2, c3, c4] = state0.0.map(|c| c.re);
    let fp = f + b;
    let fm = f - b;
    let f2 = f * f;
    let e_minus = Complex64::from_polar(1.0, -2.0 * f * t);
    let e_plus = e_minus.conj();

    let t1 = re((c1 * c1 - c2 * c2) * (2.0 * a * t).cos());
    let t2 = e_minus * ((-d * c3 + fp * c4).powi(2) / (4.0 * f2));
    let t3 = -e_minus * ((d * d * c3 - d * fp * c4).powi(2) / (4.0 * f2 * fp * fp));
    let t4 = e_plus * ((d * c3 + fm * c4).powi(2) / (4.0 * f2));
    let t5 = -e_plus * ((d * d * c3 + d * fm * c4).powi(2) / (4.0 * f2 * fm * fm));
    let t6 = re((-d * c3 + fp * c4) * (d * c3 + fm * c4) / (2.0 * f2));
    let t7 = if factored_last {
        re(-(d * c3 - fp * c4) * (d * c3 + fm * c4) / (2.0 * f2))
    } else {
        re(-(d * c3 - d * fp * c4) * (d * d * c3 + d * fm * c4) / (2.0 * f2 * fm * fm))
    };

    Ok(ClosedFormConcurrence { value: (t1 + t2 + t3 + t4 + t5 + t6 + t7).norm(), fallback: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_model::asymmetric_couplings;
    use std::f64::consts::TAU;

    fn lambda() -> f64 {
        TAU * 0.1e6
    }

    fn mapped(alpha: f64, delta_h: f64) -> CouplingSet {
        let detuning = 2.0 * lambda();
        let omega = alpha * detuning;
        asymmetric_couplings(lambda(), omega, 0.0, omega + detuning, delta_h, 1.0).unwrap()
    }

    #[test]
    fn bell_conversion_is_orthonormal() {
        let s = FRAC_1_SQRT_2;
        let phi_p = BellAmplitudes::phi_plus().to_product();
        assert_eq!(phi_p, Vector4::new(re(s), re(0.0), re(0.0), re(s)));
        let psi_m = BellAmplitudes::psi_minus().to_product();
        assert_eq!(psi_m, Vector4::new(re(0.0), re(s), re(-s), re(0.0)));
        for i in 0..4 {
            for j in 0..4 {
                let ip = BellAmplitudes::basis(i).to_product().dotc(&BellAmplitudes::basis(j).to_product());
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - re(expect)).norm() < 1e-15);
            }
        }
        let ee = BellAmplitudes::uniform().to_product();
        assert!((ee[0] - re(s)).norm() < 1e-15 && (ee[1] - re(s)).norm() < 1e-15);
    }

    #[test]
    fn unnormalised_state_rejected() {
        assert!(BellAmplitudes::from_real([1.0, 1.0, 0.0, 0.0]).is_err());
        assert!(BellAmplitudes::from_real([0.5; 4]).is_ok());
    }

    #[test]
    fn abdf_symmetric() {
        let c = abdf(&mapped(2.0, 0.0));
        assert_eq!(c.d, 0.0);
        assert_eq!(c.f, c.b.abs());
        let a_us = c.a * 1e-6;
        assert!((a_us - 0.75 * lambda() * 1e-6).abs() < 1e-12);
        assert!((a_us - 0.4712).abs() < 1e-4);
        assert!((c.b + 0.25 * lambda()).abs() < 1e-9);
    }

    #[test]
    fn abdf_unit_alpha_has_no_mixing() {
        let set = asymmetric_couplings(0.1, 1.0, 0.0, 2.0, 0.4, 1.0).unwrap();
        assert_eq!(abdf(&set).d, 0.0);
    }

    #[test]
    fn abdf_identity_exact() {
        for (alpha, dh) in [(0.25, 0.3), (3.0, 0.5), (1.7, 0.11)] {
            let c = abdf(&mapped(alpha, dh));
            assert_eq!(c.b * 3.0 + c.a, 0.0);
            assert!(c.f >= c.b.abs());
        }
    }

    #[test]
    fn heff_symmetric_elements() {
        let set = mapped(1.5, 0.0);
        let h = build_heff(&set).unwrap();
        let sin2 = set.theta.sin().powi(2);
        let j = 2.0 * lambda() * lambda() * sin2 / set.detuning;
        assert!((h.matrix[(1, 2)].re + 0.25 * j).abs() < 1e-9 * j);
        let s = sin2 * lambda() * lambda() / set.detuning * 3.0;
        assert!((h.matrix[(0, 0)].re + s / 2.0).abs() < 1e-9 * s);
        assert_eq!(h.hermiticity_defect(), 0.0);
        assert_eq!(h.block_coupling(), 0.0);
    }

    #[test]
    fn heff_without_coupling_is_zero() {
        let set = asymmetric_couplings(0.0, 1.0, 0.0, 3.0, 0.2, 1.0).unwrap();
        assert_eq!(build_heff(&set).unwrap().matrix, Matrix4::zeros());
    }

    #[test]
    fn heff_dispersive_breakdown() {
        let mut set = mapped(1.5, 0.2);
        set.detuning2 = 0.0;
        assert!(matches!(build_heff(&set), Err(PhysicsError::DispersiveBreakdown { which: "Δ₂", .. })));
    }

    #[test]
    fn closed_form_identity_at_zero() {
        let c = abdf(&mapped(3.0, 0.5));
        let s0 = BellAmplitudes::from_real([0.1, 0.7, -0.5, 0.5]).unwrap();
        for mode in [EvolutionMode::Printed, EvolutionMode::Unitary] {
            assert_eq!(evolve_closed_form(&s0, &c, 0.0, mode).unwrap(), s0);
        }
        assert!(evolve_closed_form(&s0, &c, 1e-6, EvolutionMode::Numeric).is_err());
    }

    #[test]
    fn closed_form_symmetric_psi_plus_phase_only() {
        let c = abdf(&mapped(0.25, 0.0));
        let s0 = BellAmplitudes::psi_plus();
        for t in [1e-6, 7.3e-6, 29e-6] {
            let s = evolve_closed_form(&s0, &c, t, EvolutionMode::Unitary).unwrap();
            let expect = Complex64::from_polar(1.0, -c.b * t);
            assert!((s.0[2] - expect).norm() < 1e-12);
            assert!(s.0[3].norm() < 1e-15);
        }
    }

    #[test]
    fn phi_block_invariant() {
        let c = abdf(&mapped(3.0, 0.25));
        let s0 = BellAmplitudes::from_real([0.5, 0.3, 0.1, (1.0f64 - 0.35).sqrt()]).unwrap();
        let q0 = s0.0[0] * s0.0[0] - s0.0[1] * s0.0[1];
        for t in [0.5e-6, 3e-6, 11e-6] {
            let p = evolve_closed_form(&s0, &c, t, EvolutionMode::Printed).unwrap();
            let u = evolve_closed_form(&s0, &c, t, EvolutionMode::Unitary).unwrap();
            let qp = p.0[0] * p.0[0] - p.0[1] * p.0[1];
            let qu = u.0[0] * u.0[0] - u.0[1] * u.0[1];
            assert!((qp - q0 * (2.0 * c.a * t).cos()).norm() < 1e-12);
            assert!((qu - q0).norm() < 1e-12);
        }
        let eq = BellAmplitudes::uniform();
        for mode in [EvolutionMode::Printed, EvolutionMode::Unitary] {
            let s = evolve_closed_form(&eq, &c, 4.2e-6, mode).unwrap();
            assert!((s.0[0] * s.0[0] - s.0[1] * s.0[1]).norm() < 1e-15);
        }
    }

    #[test]
    fn sinc_limit_is_smooth() {
        let c = AbdfCoefficients { a: 0.0, b: 0.0, d: 0.0, f: 0.0 };
        let s0 = BellAmplitudes::uniform();
        assert_eq!(evolve_closed_form(&s0, &c, 5e-6, EvolutionMode::Unitary).unwrap(), s0);
    }

    #[test]
    fn numeric_zero_hamiltonian() {
        let set = asymmetric_couplings(0.0, 1.0, 0.0, 3.0, 0.0, 1.0).unwrap();
        let h = build_heff(&set).unwrap();
        let s0 = BellAmplitudes::from_real([0.5, -0.5, 0.5, 0.5]).unwrap();
        assert!(evolve_numeric(&s0, &h, 2.0, 0.1).unwrap().max_abs_diff(&s0) < 1e-15);
    }

    #[test]
    fn numeric_step_checks() {
        let h = build_heff(&mapped(1.5, 0.0)).unwrap();
        let s0 = BellAmplitudes::uniform();
        assert!(evolve_numeric(&s0, &h, 1e-6, 0.0).is_err());
        assert!(evolve_numeric(&s0, &h, 1e-6, 2e-6).is_err());
        // ‖H‖·dt ≈ 0.7e6 · 1e-6
        assert!(evolve_numeric(&s0, &h, 10e-6, 1e-6).is_err());
        assert_eq!(evolve_numeric(&s0, &h, 0.0, 1e-9).unwrap(), s0);
    }

    #[test]
    fn numeric_psi_plus_eigenvector() {
        let h = build_heff(&mapped(0.25, 0.0)).unwrap();
        let s = evolve_numeric(&BellAmplitudes::psi_plus(), &h, 5e-6, 1e-9).unwrap();
        assert!((s.0[2].norm() - 1.0).abs() < 1e-9);
        assert!(s.phi_weight() + s.0[3].norm_sqr() < 1e-18);
    }

    #[test]
    fn numeric_partial_last_step() {
        let h = build_heff(&mapped(1.5, 0.2)).unwrap();
        let s0 = BellAmplitudes::uniform();
        let a = evolve_numeric(&s0, &h, 1.0005e-6, 1e-9).unwrap();
        let b = evolve_numeric(&s0, &h, 1.0005e-6, 0.5e-9).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn concurrence_reference_states() {
        assert!((concurrence_pure(&BellAmplitudes::phi_plus()) - 1.0).abs() < 1e-15);
        assert!((concurrence_pure(&BellAmplitudes::psi_minus()) - 1.0).abs() < 1e-15);
        let ee = BellAmplitudes::from_real([FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0]).unwrap();
        assert!(concurrence_pure(&ee) < 1e-15);
        assert!(concurrence_pure(&BellAmplitudes::uniform()) < 1e-15);

        assert!((wootters_concurrence(&BellAmplitudes::psi_minus()) - 1.0).abs() < 1e-12);
        let ge = BellAmplitudes::from_real([0.0, 0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2]).unwrap();
        assert!(wootters_concurrence(&ge) < 1e-12);
        let u = BellAmplitudes::uniform();
        assert!((concurrence_pure(&u) - wootters_concurrence(&u)).abs() < 1e-9);
    }

    #[test]
    fn wootters_maximally_mixed_is_zero() {
        let rho = Matrix4::<Complex64>::identity() * re(0.25);
        assert!(wootters_concurrence_density(&rho) < 1e-12);
        // Werner state p|ψ⁻⟩⟨ψ⁻| + (1−p)I/4 has C = (3p − 1)/2
        let psi = BellAmplitudes::psi_minus().to_product();
        let p = 0.8;
        let werner = psi * psi.adjoint() * re(p) + Matrix4::identity() * re((1.0 - p) / 4.0);
        assert!((wootters_concurrence_density(&werner) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn closed_form_concurrence_cases() {
        let c = abdf(&mapped(3.0, 0.5));
        let u = BellAmplitudes::uniform();
        // At t = 0 the expression collapses to C₄² − C₃² + (2RS − last term),
        // where R, S are the two exponential weights of C₃(t). The residual is
        // the misprint in the last term, nonzero once D ≠ 0.
        let at0 = concurrence_closed_form(&u, &c, 0.0).unwrap();
        assert!(!at0.fallback);
        let (b, d, f) = (c.b * 1e-6, c.d * 1e-6, c.f * 1e-6);
        let (c3, c4) = (0.5, 0.5);
        let r = (d * d * c3 - d * (f + b) * c4) / (2.0 * (f + b) * f);
        let s = (d * d * c3 + d * (f - b) * c4) / (2.0 * (f - b) * f);
        let last = (d * c3 - d * (f + b) * c4) * (d * d * c3 + d * (f - b) * c4) / (2.0 * f * f * (f - b).powi(2));
        let expected = (c4 * c4 - c3 * c3 + 2.0 * r * s - last).abs();
        assert!((at0.value - expected).abs() < 1e-12, "{} vs {expected}", at0.value);
        assert!(at0.value > 1e-3);

        for t in [0.0, 2e-6, 13.3e-6] {
            let phi = concurrence_closed_form(&BellAmplitudes::phi_plus(), &c, t).unwrap();
            assert!((phi.value - (2.0 * c.a * t).cos().abs()).abs() < 1e-12);
        }

        let sym = abdf(&mapped(3.0, 0.0));
        for t in [1e-6, 13.3e-6] {
            let r = concurrence_closed_form(&u, &sym, t).unwrap();
            assert!(r.fallback);
            let direct = concurrence_pure(&evolve_closed_form(&u, &sym, t, EvolutionMode::Printed).unwrap());
            assert_eq!(r.value, direct);
        }

        let complex = BellAmplitudes::new([re(0.5), re(0.5), Complex64::new(0.0, 0.5), re(0.5)]).unwrap();
        assert!(concurrence_closed_form(&complex, &c, 1e-6).is_err());
    }

    #[test]
    fn mode_parsing() {
        for m in [EvolutionMode::Printed, EvolutionMode::Unitary, EvolutionMode::Numeric] {
            assert_eq!(m.to_string().parse::<EvolutionMode>().unwrap(), m);
        }
        assert!("euler".parse::<EvolutionMode>().is_err());
    }

    #[test]
    fn factored_closed_form_matches_evolution() {
        let u = BellAmplitudes::uniform();
        for (alpha, dh) in [(0.25, 0.25), (1.5, 0.5), (3.0, 0.5)] {
            let c = abdf(&mapped(alpha, dh));
            for k in 0..50 {
                let t = k as f64 * 0.6e-6;
                let cf = concurrence_closed_form_factored(&u, &c, t).unwrap();
                let ev = concurrence_pure(&evolve_closed_form(&u, &c, t, EvolutionMode::Printed).unwrap());
                assert!((cf.value - ev).abs() < 1e-12, "α={alpha} Δh={dh} t={t}: {} vs {ev}", cf.value);
            }
        }
    }
}
