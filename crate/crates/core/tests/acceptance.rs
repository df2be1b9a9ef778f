//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Runs without the libtest harness so every criterion is evaluated and
//! reported even when an earlier one fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};

use nalgebra::Vector4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use nv_seesaw::constants::NV_ZERO_FIELD_SPLITTING;
use nv_seesaw::dynamics::{
    abdf, build_heff, concurrence_closed_form, concurrence_pure, evolve_closed_form, evolve_numeric, sample_numeric,
    wootters_concurrence, BellAmplitudes, EvolutionMode,
};
use nv_seesaw::harness::{
    region_means, run_contour, run_verify, standard_mapping, trend_means, ScenarioConfig, VerifyOptions,
};
use nv_seesaw::mechanics::{self, CantileverSpec};
use nv_seesaw::spin_model::{coupling_enhancement_ratio, effective_coupling_strength};
use nv_seesaw::PhysicalConstants;

const C: PhysicalConstants = PhysicalConstants::CODATA;
const FIGURE_ALPHAS: [f64; 3] = [0.25, 1.5, 3.0];
const FIGURE_DELTA_HS: [f64; 3] = [0.0, 0.25, 0.5];

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn rel(value: f64, expected: f64) -> f64 {
    ((value - expected) / expected).abs()
}

fn mass() -> Outcome {
    let m = mechanics::mass(&CantileverSpec::reference());
    Outcome { passed: rel(m, 6.29e-17) <= 5e-3, detail: format!("m = {m:.4e} kg (target 6.29e-17 ± 0.5%)") }
}

fn resonances() -> Outcome {
    let spec = CantileverSpec::reference();
    let mut passed = true;
    let mut parts = Vec::new();
    for (mode, target) in [(1, 4.02e6), (2, 25.2e6), (3, 70.6e6)] {
        let f = mechanics::resonance_frequency(&spec, mode).unwrap();
        passed &= rel(f, target) <= 5e-3;
        parts.push(format!("f{mode} = {:.4} MHz", f / 1e6));
    }
    Outcome { passed, detail: format!("{} (targets 4.02, 25.2, 70.6 ± 0.5%)", parts.join(", ")) }
}

fn magnetoelastic() -> Outcome {
    let d = mechanics::magnetoelastic_deflection(&CantileverSpec::reference());
    Outcome { passed: rel(d, 27.7e-9) <= 1e-2, detail: format!("{:.3} nm (target 27.7 ± 1%)", d * 1e9) }
}

fn torque() -> Outcome {
    let spec = CantileverSpec::reference();
    let d10 = mechanics::torque_deflection(&spec, 10e-3, &C);
    let mut linear: f64 = 0.0;
    for k in [0.5, 2.0, 3.0, 7.5] {
        linear = linear.max(rel(mechanics::torque_deflection(&spec, k * 10e-3, &C), k * d10));
    }
    Outcome {
        passed: rel(d10, 5.2e-9) <= 2e-2 && linear <= 1e-12,
        detail: format!("{:.4} nm at 10 mT (target 5.2 ± 2%), linearity rel err {linear:.1e} (≤ 1e-12)", d10 * 1e9),
    }
}

fn field_bound() -> Outcome {
    let b = mechanics::max_field_with(NV_ZERO_FIELD_SPLITTING, &C);
    Outcome { passed: rel(b, 32.7e-3) <= 1e-2, detail: format!("{:.3} mT (target 32.7 ± 1%)", b * 1e3) }
}

fn coupling_enhancement() -> Outcome {
    let set = standard_mapping(3.0, 0.5, 1.0).unwrap();
    let j0 = effective_coupling_strength(&standard_mapping(3.0, 0.0, 1.0).unwrap());
    let ratio = effective_coupling_strength(&set) / j0;
    let exact = coupling_enhancement_ratio(&nv_seesaw::spin_model::CouplingSet { alpha: 3.0, ..set });
    Outcome {
        passed: exact == 3.0 && (ratio - 3.0).abs() <= 1e-12,
        detail: format!(
            "closed-form ratio {exact} at α = 3 exactly; J(0.5)/J(0) = {ratio:.16} from the mapped couplings"
        ),
    }
}

fn oracle_equivalence() -> Outcome {
    let u = BellAmplitudes::uniform();
    let mut worst: f64 = 0.0;
    for alpha in FIGURE_ALPHAS {
        let set = standard_mapping(alpha, 0.0, 1.0).unwrap();
        let c = abdf(&set);
        let traj = sample_numeric(&u, &build_heff(&set).unwrap(), 1e-9, 30_000, 1).unwrap();
        for (k, st) in traj.iter().enumerate() {
            let t = k as f64 * 1e-9;
            let closed = concurrence_pure(&evolve_closed_form(&u, &c, t, EvolutionMode::Unitary).unwrap());
            worst = worst.max((closed - wootters_concurrence(st)).abs());
        }
    }
    let err = |dt: f64| {
        let set = standard_mapping(0.25, 0.0, 1.0).unwrap();
        let num = evolve_numeric(&u, &build_heff(&set).unwrap(), 30e-6, dt).unwrap();
        num.max_abs_diff(&evolve_closed_form(&u, &abdf(&set), 30e-6, EvolutionMode::Unitary).unwrap())
    };
    let ratio = err(0.1e-6) / err(0.05e-6);
    Outcome {
        passed: worst <= 1e-6 && (ratio - 16.0).abs() <= 0.2 * 16.0,
        detail: format!(
            "L∞ {worst:.2e} over 30001 steps × α ∈ {{0.25, 1.5, 3}} (≤ 1e-6); RK4 halving ratio {ratio:.3} (16 ± 20%)"
        ),
    }
}

fn formula_cross_check() -> Outcome {
    let u = BellAmplitudes::uniform();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let times: Vec<f64> = (0..1000).map(|_| rng.random_range(0.0..30e-6)).collect();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for alpha in FIGURE_ALPHAS {
        for dh in FIGURE_DELTA_HS {
            let c = abdf(&standard_mapping(alpha, dh, 1.0).unwrap());
            let mut cell: f64 = 0.0;
            for &t in &times {
                let p = concurrence_pure(&evolve_closed_form(&u, &c, t, EvolutionMode::Printed).unwrap());
                let q = concurrence_pure(&evolve_closed_form(&u, &c, t, EvolutionMode::Unitary).unwrap());
                let r = concurrence_closed_form(&u, &c, t).unwrap().value;
                cell = cell.max((p - q).abs()).max((p - r).abs()).max((q - r).abs());
            }
            worst = worst.max(cell);
            if cell > 1e-9 {
                parts.push(format!("α={alpha} Δh={dh}: {cell:.2e}"));
            }
        }
    }
    let detail = if parts.is_empty() {
        format!("max pairwise gap {worst:.2e} over the figure grid (≤ 1e-9)")
    } else {
        format!("max pairwise gap {worst:.2e} (≤ 1e-9); over tolerance at {}", parts.join("; "))
    };
    Outcome { passed: worst <= 1e-9, detail }
}

fn pure_concurrence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let z: [Complex64; 4] =
            std::array::from_fn(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)));
        let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let st = BellAmplitudes(z.map(|c| c / norm));
        worst = worst.max((concurrence_pure(&st) - wootters_concurrence(&st)).abs());
    }
    let bells = [
        BellAmplitudes::phi_plus(),
        BellAmplitudes::phi_minus(),
        BellAmplitudes::psi_plus(),
        BellAmplitudes::psi_minus(),
    ];
    let bell = bells.iter().map(|s| (concurrence_pure(s) - 1.0).abs()).fold(0.0, f64::max);
    let product = (0..4)
        .map(|k| {
            let mut v = Vector4::<Complex64>::zeros();
            v[k] = Complex64::new(1.0, 0.0);
            concurrence_pure(&BellAmplitudes::from_product(&v))
        })
        .fold(0.0, f64::max);
    Outcome {
        passed: worst <= 1e-9 && bell <= 1e-12 && product <= 1e-12,
        detail: format!("1000 seeded states: max gap {worst:.2e}; Bell |C−1| {bell:.1e}; product C {product:.1e}"),
    }
}

fn trends() -> Outcome {
    let cfg = ScenarioConfig::default();
    let means =
        |alpha: f64| -> Vec<_> { FIGURE_DELTA_HS.iter().map(|&dh| trend_means(&cfg, alpha, dh).unwrap()).collect() };
    let low = means(0.25);
    let high = means(3.0);
    let printed = |m: &[nv_seesaw::harness::TrendMeans]| m.iter().map(|x| x.printed).collect::<Vec<_>>();
    let (lp, hp) = (printed(&low), printed(&high));
    let decreasing = lp.windows(2).all(|w| w[1] < w[0]);
    let non_decreasing = hp.windows(2).all(|w| w[1] >= w[0]);

    let sweep = run_contour(&cfg, EvolutionMode::Printed, None).unwrap();
    let (small, large) = region_means(&sweep);
    let region = small > large;

    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    let numeric = |m: &[nv_seesaw::harness::TrendMeans]| m.iter().map(|x| x.numeric).collect::<Vec<_>>();
    Outcome {
        passed: decreasing && non_decreasing && region,
        detail: format!(
            "α=0.25 means [{}] decreasing: {decreasing}; α=3 means [{}] non-decreasing: {non_decreasing}; \
             region {small:.4} > {large:.4}: {region}; exact-Hamiltonian means α=0.25 [{}], α=3 [{}]",
            fmt(&lp),
            fmt(&hp),
            fmt(&numeric(&low)),
            fmt(&numeric(&high)),
        ),
    }
}

fn discrepancy_ledger() -> Outcome {
    let text = run_verify(&VerifyOptions::default()).to_text();
    let names =
        ["gravity-sag exponent", "a₀ 2π convention", "λ magnitude chain", "(α²−1) vs (α−1)", "Φ-block non-unitarity"];
    let missing: Vec<_> = names.iter().filter(|n| !text.contains(*n)).collect();
    Outcome {
        passed: missing.is_empty() && text.contains("documented, not reconciled"),
        detail: if missing.is_empty() {
            "all five named in verify output".into()
        } else {
            format!("missing {missing:?}")
        },
    }
}

fn run_figures(dir: &Path, threads: &str) -> Vec<(String, Vec<u8>)> {
    let status = Command::new(env!("CARGO_BIN_EXE_nv-seesaw"))
        .arg("figures")
        .arg(dir)
        .env("NV_SEESAW_THREADS", threads)
        .status()
        .expect("run figures");
    assert!(status.success());
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let runs: Vec<_> =
        ["1", "4", "4"].iter().enumerate().map(|(i, t)| run_figures(&root.path().join(format!("run{i}")), t)).collect();
    let same = runs.windows(2).all(|w| w[0] == w[1]);
    let bytes: usize = runs[0].iter().map(|(_, b)| b.len()).sum();
    Outcome {
        passed: same && runs[0].len() == 5,
        detail: format!("{} files, {bytes} bytes, threads 1/4/4 identical: {same}", runs[0].len()),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("cantilever mass", mass),
        ("resonance frequencies", resonances),
        ("magnetoelastic deflection", magnetoelastic),
        ("torque deflection", torque),
        ("field bound", field_bound),
        ("coupling enhancement", coupling_enhancement),
        ("oracle equivalence at Δh = 0", oracle_equivalence),
        ("concurrence formula cross-check", formula_cross_check),
        ("pure-state concurrence", pure_concurrence),
        ("figure trends", trends),
        ("discrepancy ledger", discrepancy_ledger),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += usize::from(!o.passed);
        println!("[{}] {:>2}. {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
