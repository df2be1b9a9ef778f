//! Self-consistency suite behind `nv-seesaw verify`.
//!
//! Assertable checks decide the exit code. Known inconsistencies in the
//! published model are listed separately with the numbers that expose them;
//! they never affect the exit code.

use std::fmt::Write as _;

use nalgebra::Vector4;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::constants::{PhysicalConstants, NV_ZERO_FIELD_SPLITTING};
use crate::dynamics::{
    abdf, build_heff, concurrence_closed_form, concurrence_closed_form_factored, concurrence_pure, evolve_closed_form,
    evolve_numeric, sample_numeric, wootters_concurrence, BellAmplitudes, EvolutionMode,
};
use crate::mechanics::{self, CantileverSpec, MODE_BETAS};
use crate::spin_model::{
    coupling_enhancement_ratio, effective_coupling_strength, enhancement_predicate, three_level_hamiltonian,
    tip_coupling, ThreeLevelSystem,
};
use crate::units;

use super::config::{parse_config, ScenarioConfig};
use super::scenario::{region_means, run_contour, standard_mapping, timeseries, trend_means, TrendMeans};

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Seed for the random-state concurrence comparison.
    pub seed: u64,
    pub random_states: usize,
    /// Mode constants used by the resonance checks.
    pub betas: [f64; 3],
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 0, random_states: 1000, betas: MODE_BETAS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub title: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub discrepancies: Vec<Discrepancy>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// 0 when every assertable check passed, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            3
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nv-seesaw verify (seed {})", self.seed);
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "[{tag}] {}: {}", c.name, c.detail);
        }
        let _ = writeln!(out, "\nDocumented discrepancies (reported, not patched):");
        for d in &self.discrepancies {
            let _ = writeln!(out, "- {}: {}", d.title, d.detail);
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let _ = writeln!(out, "\n{} checks, {} failed", self.checks.len(), failed);
        out
    }
}

#[derive(Default)]
struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { name: name.to_owned(), passed, detail });
    }

    fn rel(&mut self, name: &str, value: f64, expected: f64, tol: f64) {
        let err = ((value - expected) / expected).abs();
        self.check(name, err <= tol, format!("{value:.6e} vs {expected:.6e}, rel err {err:.2e} (tol {tol:.1e})"));
    }

    fn below(&mut self, name: &str, value: f64, bound: f64) {
        self.check(name, value <= bound, format!("{value:.3e} (bound {bound:.1e})"));
    }
}

fn sample_times(n: usize, t_max: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| t_max * k as f64 / (n - 1) as f64)
}

const FIGURE_ALPHAS: [f64; 3] = [0.25, 1.5, 3.0];
const FIGURE_DELTA_HS: [f64; 3] = [0.0, 0.25, 0.5];
const T_WINDOW: f64 = 30e-6;

fn mechanics_checks(s: &mut Suite, opts: &VerifyOptions) {
    let spec = CantileverSpec::reference();
    let c = PhysicalConstants::CODATA;
    s.rel("mechanics: mass", mechanics::mass(&spec), 6.29e-17, 5e-3);
    for (mode, expected) in [(1, 4.02e6), (2, 25.2e6), (3, 70.6e6)] {
        let f = mechanics::resonance_frequency_with(&spec, mode, &opts.betas).unwrap_or(f64::NAN);
        s.rel(&format!("mechanics: resonance mode {mode}"), f, expected, 5e-3);
    }
    let f1 = mechanics::resonance_frequency_with(&spec, 1, &opts.betas).unwrap_or(f64::NAN);
    let f2 = mechanics::resonance_frequency_with(&spec, 2, &opts.betas).unwrap_or(f64::NAN);
    let ratio = (MODE_BETAS[1] / MODE_BETAS[0]).powi(2);
    s.rel("mechanics: f2/f1 = (β2/β1)²", f2 / f1, ratio, 1e-12);

    s.rel("mechanics: magnetoelastic deflection", mechanics::magnetoelastic_deflection(&spec), 27.7e-9, 1e-2);
    let d10 = mechanics::torque_deflection(&spec, 10e-3, &c);
    s.rel("mechanics: torque deflection at 10 mT", d10, 5.2e-9, 2e-2);
    let d30 = mechanics::torque_deflection(&spec, 30e-3, &c);
    s.rel("mechanics: torque deflection linear in B0", d30, 3.0 * d10, 1e-12);
    let bmax = mechanics::max_field_with(NV_ZERO_FIELD_SPLITTING, &c);
    s.rel("mechanics: field bound", bmax, 32.7e-3, 1e-2);
    let sag = mechanics::gravity_sag(&spec, &c);
    s.check("mechanics: gravity sag negligible", sag / d10 < 1e-4, format!("sag / torque(10 mT) = {:.2e}", sag / d10));

    let spec_wide_gap = CantileverSpec { rest_gap: 100e-9, ..spec };
    match mechanics::deflection_torque(&spec_wide_gap, 10e-3, &c) {
        Ok(r) => {
            s.rel("mechanics: h1 + h2 = 2 h0", r.h1 + r.h2, 2.0 * spec_wide_gap.rest_gap, 1e-12);
            let dh = mechanics::asymmetry(&spec_wide_gap, 10e-3, &c).unwrap_or(f64::NAN);
            s.rel("mechanics: Δh(B0) closed form", dh, r.delta_h, 1e-12);
        }
        Err(e) => s.check("mechanics: h1 + h2 = 2 h0", false, e.to_string()),
    }
    s.check(
        "mechanics: over-field flag above bound",
        mechanics::deflection_torque(&spec_wide_gap, 50e-3, &c).map(|r| r.over_field).unwrap_or(false),
        "B0 = 50 mT".into(),
    );
}

fn spin_checks(s: &mut Suite) {
    let sys = three_level_hamiltonian(1.0e6, 1.0e6, 2.0e6, 2.0e6);
    s.below("spin: three-level Hamiltonian Hermitian", sys.hermiticity_defect(), 1e-12);
    let dark = sys.element(&ThreeLevelSystem::ground(), &ThreeLevelSystem::dark()).norm();
    s.below("spin: dark state decoupled from |0⟩", dark, 1e-9);

    let set = standard_mapping(3.0, 0.5, 1.0).expect("reference mapping");
    let j0 = effective_coupling_strength(&standard_mapping(3.0, 0.0, 1.0).expect("reference mapping"));
    let ratio = effective_coupling_strength(&set) / j0;
    s.rel("spin: coupling ratio at α = 3, Δh = 0.5", ratio, 3.0, 1e-12);
    s.rel("spin: coupling ratio formula", coupling_enhancement_ratio(&set), ratio, 1e-12);

    let mut predicate_ok = true;
    for alpha in [0.25, 0.5, 1.5, 3.0] {
        let set = standard_mapping(alpha, 0.25, 1.0).expect("mapping");
        predicate_ok &= enhancement_predicate(&set) == (alpha > 1.0);
        predicate_ok &= (coupling_enhancement_ratio(&set) > 1.0) == (alpha > 1.0);
    }
    s.check("spin: enhancement iff α > 1", predicate_ok, "α ∈ {0.25, 0.5, 1.5, 3}".into());

    let set = standard_mapping(1.5, 0.25, 1.0).expect("mapping");
    s.check("spin: label swap is an involution", set.swapped().swapped() == set, "α = 1.5, Δh = 0.25".into());
}

/// Amplitude error of RK4 against the exact propagator at `Δh = 0`.
fn rk4_error(alpha: f64, dt: f64) -> f64 {
    let set = standard_mapping(alpha, 0.0, 1.0).expect("mapping");
    let heff = build_heff(&set).expect("heff");
    let u = BellAmplitudes::uniform();
    let num = evolve_numeric(&u, &heff, T_WINDOW, dt).expect("rk4");
    let exact = evolve_closed_form(&u, &abdf(&set), T_WINDOW, EvolutionMode::Unitary).expect("closed form");
    num.max_abs_diff(&exact)
}

fn random_state(rng: &mut ChaCha8Rng) -> BellAmplitudes {
    let mut z = [Complex64::new(0.0, 0.0); 4];
    for c in z.iter_mut() {
        *c = Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
    }
    let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    BellAmplitudes(z.map(|c| c / norm))
}

fn dynamics_checks(s: &mut Suite, opts: &VerifyOptions) {
    let u = BellAmplitudes::uniform();

    let mut identity_exact = true;
    let mut herm: f64 = 0.0;
    let mut leak: f64 = 0.0;
    let mut unitary_drift: f64 = 0.0;
    let mut numeric_drift: f64 = 0.0;
    let mut printed_norm_err: f64 = 0.0;
    let mut agreement: f64 = 0.0;
    let mut range_ok = true;
    for alpha in FIGURE_ALPHAS {
        for dh in FIGURE_DELTA_HS {
            let set = standard_mapping(alpha, dh, 1.0).expect("mapping");
            let c = abdf(&set);
            identity_exact &= c.b * 3.0 + c.a == 0.0;
            let heff = build_heff(&set).expect("heff");
            herm = herm.max(heff.hermiticity_defect());

            let phi = BellAmplitudes::phi_plus();
            let traj = sample_numeric(&phi, &heff, 1e-9, 30_000, 1000).expect("rk4");
            for st in &traj {
                leak = leak.max(st.psi_weight());
                numeric_drift = numeric_drift.max((st.norm_sqr() - 1.0).abs());
            }
            for t in sample_times(61, T_WINDOW) {
                let un = evolve_closed_form(&u, &c, t, EvolutionMode::Unitary).expect("closed form");
                let pr = evolve_closed_form(&u, &c, t, EvolutionMode::Printed).expect("closed form");
                unitary_drift = unitary_drift.max((un.norm_sqr() - 1.0).abs());
                let expected = (2.0 * c.a * t).sin().abs() / 2.0;
                printed_norm_err = printed_norm_err.max(((pr.norm_sqr() - 1.0).abs() - expected).abs());
                let (cu, cp) = (concurrence_pure(&un), concurrence_pure(&pr));
                agreement = agreement.max((cu - cp).abs());
                range_ok &= (0.0..=1.0 + 1e-9).contains(&cu) && (0.0..=1.0 + 1e-9).contains(&cp);
                if dh == 0.0 {
                    let cf = concurrence_closed_form(&u, &c, t).expect("closed form").value;
                    agreement = agreement.max((cf - cp).abs());
                }
            }
        }
    }
    s.check("dynamics: B(2n+1) + A = 0 exactly", identity_exact, "figure grid".into());
    s.below("dynamics: effective Hamiltonian Hermitian", herm, 1e-12);
    s.below("dynamics: no Φ/ψ block leakage", leak, 1e-9);
    s.below("dynamics: unitary closed form preserves norm", unitary_drift, 1e-9);
    s.below("dynamics: RK4 preserves norm", numeric_drift, 1e-9);
    s.below("dynamics: printed-mode norm defect = |sin 2At|/2", printed_norm_err, 1e-12);
    s.below("dynamics: printed/unitary concurrence agree (and closed form at Δh = 0)", agreement, 1e-9);
    s.check("dynamics: concurrence within [0, 1]", range_ok, "figure grid".into());

    let mut chain: f64 = 0.0;
    for alpha in FIGURE_ALPHAS {
        let set = standard_mapping(alpha, 0.0, 1.0).expect("mapping");
        let c = abdf(&set);
        let heff = build_heff(&set).expect("heff");
        let traj = sample_numeric(&u, &heff, 1e-9, 30_000, 100).expect("rk4");
        for (k, st) in traj.iter().enumerate() {
            let t = (k * 100) as f64 * 1e-9;
            let cf = concurrence_pure(&evolve_closed_form(&u, &c, t, EvolutionMode::Unitary).expect("closed form"));
            chain = chain.max((cf - wootters_concurrence(st)).abs());
        }
    }
    s.below("dynamics: Δh = 0 closed form vs RK4 + Wootters", chain, 1e-6);

    let ratio = rk4_error(0.25, 0.1e-6) / rk4_error(0.25, 0.05e-6);
    s.check(
        "dynamics: RK4 convergence under dt halving",
        (ratio - 16.0).abs() <= 0.2 * 16.0,
        format!("error ratio {ratio:.3} (expected 16 ± 20%)"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..opts.random_states {
        let st = random_state(&mut rng);
        worst = worst.max((concurrence_pure(&st) - wootters_concurrence(&st)).abs());
    }
    s.below(&format!("dynamics: pure vs Wootters on {} random states", opts.random_states), worst, 1e-9);

    let mut bell_err: f64 = 0.0;
    for st in [
        BellAmplitudes::phi_plus(),
        BellAmplitudes::phi_minus(),
        BellAmplitudes::psi_plus(),
        BellAmplitudes::psi_minus(),
    ] {
        bell_err = bell_err.max((concurrence_pure(&st) - 1.0).abs());
    }
    let mut product_err: f64 = 0.0;
    for k in 0..4 {
        let mut v = Vector4::<Complex64>::zeros();
        v[k] = Complex64::new(1.0, 0.0);
        product_err = product_err.max(concurrence_pure(&BellAmplitudes::from_product(&v)));
    }
    s.below("dynamics: Bell states have concurrence 1", bell_err, 1e-12);
    s.below("dynamics: product states have concurrence 0", product_err, 1e-12);
}

fn harness_checks(s: &mut Suite) {
    let mut cfg = ScenarioConfig::default();
    cfg.sweep.alpha_min = 0.5;
    cfg.sweep.alpha_max = 3.0;
    cfg.sweep.alpha_steps = 3;
    cfg.sweep.delta_h_min = 0.0;
    cfg.sweep.delta_h_max = 0.5;
    cfg.sweep.delta_h_steps = 3;
    cfg.sweep.t_star_us = 2.0;

    let reloaded = parse_config(&cfg.to_json());
    s.check("harness: config round trip", reloaded.as_ref().ok() == Some(&cfg), "serialise + reload".into());

    let serial = run_contour(&cfg, EvolutionMode::Printed, Some(1));
    let parallel = run_contour(&cfg, EvolutionMode::Printed, Some(3));
    match (serial, parallel) {
        (Ok(a), Ok(b)) => {
            s.check("harness: sweep independent of thread count", a == b, "1 vs 3 threads".into());
            let mut worst: f64 = 0.0;
            for cell in &a.cells {
                let set = standard_mapping(cell.alpha, cell.delta_h, 1.0).expect("mapping");
                let ts =
                    timeseries(&set, &cfg.initial_state(), cfg.sweep.t_star_us, cfg.dynamics.dt_us, 1).expect("series");
                let last = ts.rows.last().expect("rows");
                worst = worst.max((last.c_printed - cell.concurrence).abs());
            }
            s.below("harness: sweep cells match time series at t*", worst, 1e-12);
        }
        (a, b) => {
            let msg = a.err().or(b.err()).map(|e| e.to_string()).unwrap_or_default();
            s.check("harness: sweep runs", false, msg);
        }
    }
}

fn discrepancies() -> Vec<Discrepancy> {
    let spec = CantileverSpec::reference();
    let c = PhysicalConstants::CODATA;
    let mut out = Vec::new();

    let sag = mechanics::gravity_sag(&spec, &c);
    out.push(Discrepancy {
        title: "gravity-sag exponent",
        detail: format!(
            "3ρgL⁴/(2Yt²) = {sag:.3e} m; the quoted 2.4e-15 m is off by a factor ~10 and matches the formula only with g omitted"
        ),
    });

    let mass = mechanics::mass(&spec);
    let f1 = mechanics::resonance_frequency(&spec, 1).unwrap_or(f64::NAN);
    let a0 = mechanics::zero_point_amplitudes(mass, f1, &c);
    out.push(Discrepancy {
        title: "a₀ 2π convention",
        detail: format!(
            "√(ħ/2mω) with ω = 2πf gives {:.3e} m; the quoted ≈5e-13 m needs ω = f without 2π ({:.3e} m); the angular value is used",
            a0.angular, a0.bare
        ),
    });

    let lambda_chain = tip_coupling(1e6, 5e-13, &c);
    out.push(Discrepancy {
        title: "λ magnitude chain",
        detail: format!(
            "g μB Gm a₀/ħ with Gm = 1e6 T/m, a₀ = 5e-13 m gives λ = {:.3e} rad/s (λ/2π = {:.1} kHz), a factor {:.1} below the quoted λ/2π ≈ 0.1 MHz; scenarios take λ directly",
            lambda_chain,
            units::angular_to_mhz(lambda_chain) * 1e3,
            units::mhz_to_angular(0.1) / lambda_chain
        ),
    });

    let set = standard_mapping(3.0, 0.5, 1.0).expect("mapping");
    let cc = abdf(&set);
    let j_factor = 1.0 + (3.0f64.powi(2) - 1.0) * 0.25;
    let bell_factor = 1.0 - (3.0 - 1.0) * 0.25;
    out.push(Discrepancy {
        title: "(α²−1) vs (α−1) factor: documented, not reconciled",
        detail: format!(
            "the coupling strength scales with 1 + (α²−1)Δh² while the Bell-block coefficients use 1 − (α−1)Δh²; at α = 3, Δh = 0.5 these are {j_factor} and {bell_factor} (A = {:.4} rad/μs); each formula is implemented as stated",
            cc.a * 1e-6
        ),
    });

    let coeffs = abdf(&standard_mapping(0.25, 0.0, 1.0).expect("mapping"));
    let ee = BellAmplitudes::from_real([std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, 0.0, 0.0])
        .expect("state");
    let t = std::f64::consts::FRAC_PI_4 / coeffs.a;
    let printed = evolve_closed_form(&ee, &coeffs, t, EvolutionMode::Printed).expect("closed form");
    out.push(Discrepancy {
        title: "Φ-block non-unitarity",
        detail: format!(
            "the printed Φ-block rotation (C₁cos At − C₂sin At, C₂cos At − C₁sin At) carries no imaginary unit, so for real amplitudes Σ|Cᵢ|² loses 2C₁C₂ sin 2At: |ee⟩ at At = π/4 is left with norm² {:.3e}; for C₁ = C₂ = 1/2 the defect is |sin 2At|/2 and the concurrence is unaffected; 'unitary' mode uses C₁cos At + iC₂sin At",
            printed.norm_sqr()
        ),
    });

    let u = BellAmplitudes::uniform();
    let mut literal: f64 = 0.0;
    let mut factored: f64 = 0.0;
    for alpha in FIGURE_ALPHAS {
        for dh in [0.25, 0.5] {
            let c = abdf(&standard_mapping(alpha, dh, 1.0).expect("mapping"));
            for t in sample_times(1000, T_WINDOW) {
                let ev = concurrence_pure(&evolve_closed_form(&u, &c, t, EvolutionMode::Printed).expect("closed form"));
                literal = literal.max((concurrence_closed_form(&u, &c, t).expect("closed form").value - ev).abs());
                factored =
                    factored.max((concurrence_closed_form_factored(&u, &c, t).expect("closed form").value - ev).abs());
            }
        }
    }
    out.push(Discrepancy {
        title: "closed-form concurrence last term",
        detail: format!(
            "at Δh ≠ 0 the literal seven-term expression deviates from the evolved state by up to {literal:.3e}; replacing only its last term with −(DC₃ − (F+B)C₄)(DC₃ + (F−B)C₄)/2F² reduces this to {factored:.1e}"
        ),
    });

    let cfg = ScenarioConfig::default();
    let mut trends = String::new();
    for alpha in [0.25, 3.0] {
        let means: Vec<_> = FIGURE_DELTA_HS.iter().map(|&dh| trend_means(&cfg, alpha, dh).ok()).collect();
        let fmt = |pick: &dyn Fn(&TrendMeans) -> Option<f64>| {
            means
                .iter()
                .map(|m| m.as_ref().and_then(pick).map_or("n/a".to_owned(), |v| format!("{v:.4}")))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let _ = write!(
            trends,
            "α = {alpha}: closed-form evolution [{}], literal closed form [{}], exact effective Hamiltonian [{}]; ",
            fmt(&|m| Some(m.printed)),
            fmt(&|m| m.closed_form),
            fmt(&|m| Some(m.numeric)),
        );
    }
    out.push(Discrepancy {
        title: "figure trends",
        detail: format!(
            "time-averaged |C| over [0, 30 μs] for Δh ∈ {{0, 0.25, 0.5}}: {trends}the stated trends are decreasing at α = 0.25 and non-decreasing at α = 3"
        ),
    });

    if let Ok(sweep) = run_contour(&cfg, EvolutionMode::Printed, None) {
        let (low, high) = region_means(&sweep);
        out.push(Discrepancy {
            title: "contour region claim",
            detail: format!(
                "mean |C(t*)| over α < 0.5: Δh < 0.25 → {low:.4}, Δh > 0.3 → {high:.4}; the second region statement repeats α < 0.5 and is read as a typo"
            ),
        });
    }
    out
}

/// Run every check and collect the discrepancy ledger.
pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    let mut s = Suite::default();
    mechanics_checks(&mut s, opts);
    spin_checks(&mut s);
    dynamics_checks(&mut s, opts);
    harness_checks(&mut s);
    VerifyReport { seed: opts.seed, checks: s.checks, discrepancies: discrepancies() }
}
