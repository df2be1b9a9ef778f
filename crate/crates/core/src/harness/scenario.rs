//! Scenario runs: time series, (α, Δh) contour, deflection report, figures.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{PhysicalConstants, NV_ZERO_FIELD_SPLITTING};
use crate::dynamics::{
    abdf, build_heff, concurrence_closed_form, concurrence_pure, evolve_closed_form, evolve_numeric, sample_numeric,
    AbdfCoefficients, BellAmplitudes, EvolutionMode, NORM_TOLERANCE,
};
use crate::error::{PhysicsError, Result};
use crate::mechanics::{self, ZeroPointAmplitudes};
use crate::spin_model::{asymmetric_couplings, dressed_parameters, CouplingSet};
use crate::units;

use super::config::{FigureCurves, ScenarioConfig};
use super::{to_json, with_pool, write_file, CsvTable, HarnessError, HarnessResult};

/// `λ/2π = 0.1 MHz`.
pub const REFERENCE_LAMBDA_MHZ: f64 = 0.1;

pub const TIMESERIES_HEADER: [&str; 7] =
    ["t_us", "C_printed", "C_unitary", "C_numeric", "C_eq22", "norm_printed", "norm_numeric"];

/// Couplings for a given `α` with `Δ = 2λ`, `ω_r = ω + Δ` and drive detuning
/// `δ`. With `δ = 0` this is `Ω = ω = αΔ`; otherwise `Ω` solves
/// `Ω² / √(Ω² + δ²) = αΔ`.
pub fn standard_mapping_with(
    lambda: f64,
    drive_detuning: f64,
    alpha: f64,
    delta_h: f64,
    n: f64,
) -> Result<CouplingSet> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(PhysicsError::invalid(format!("α must be positive, got {alpha}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(PhysicsError::invalid(format!("λ must be positive, got {lambda}")));
    }
    let detuning = 2.0 * lambda;
    let c = alpha * detuning;
    let rabi = if drive_detuning == 0.0 {
        c
    } else {
        let d2 = drive_detuning * drive_detuning;
        ((c * c + (c.powi(4) + 4.0 * c * c * d2).sqrt()) / 2.0).sqrt()
    };
    let omega = dressed_parameters(rabi, drive_detuning)?.omega;
    asymmetric_couplings(lambda, rabi, drive_detuning, omega + detuning, delta_h, n)
}

/// [`standard_mapping_with`] at the reference `λ` and zero drive detuning.
pub fn standard_mapping(alpha: f64, delta_h: f64, n: f64) -> Result<CouplingSet> {
    standard_mapping_with(units::mhz_to_angular(REFERENCE_LAMBDA_MHZ), 0.0, alpha, delta_h, n)
}

fn config_mapping(config: &ScenarioConfig, alpha: f64, delta_h: f64) -> Result<CouplingSet> {
    standard_mapping_with(config.lambda(), config.drive_detuning(), alpha, delta_h, config.dynamics.n)
}

/// Concurrence at `t` (seconds) along one evolution route.
pub fn concurrence_at(set: &CouplingSet, state0: &BellAmplitudes, t: f64, mode: EvolutionMode, dt: f64) -> Result<f64> {
    let state = match mode {
        EvolutionMode::Numeric => evolve_numeric(state0, &build_heff(set)?, t, dt)?,
        closed => evolve_closed_form(state0, &abdf(set), t, closed)?,
    };
    Ok(concurrence_pure(&state))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeseriesRow {
    pub t_us: f64,
    pub c_printed: f64,
    pub c_unitary: f64,
    pub c_numeric: f64,
    /// Literal closed form; absent for complex initial amplitudes.
    pub c_closed_form: Option<f64>,
    pub norm_printed: f64,
    pub norm_numeric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeseriesProvenance {
    pub couplings: CouplingSet,
    pub coefficients: AbdfCoefficients,
    pub initial: [[f64; 2]; 4],
    pub t_max_us: f64,
    pub dt_us: f64,
    pub output_stride: usize,
    /// The closed-form column came from the degenerate-case fallback.
    pub closed_form_fallback: bool,
    pub closed_form_available: bool,
    pub max_norm_drift_numeric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timeseries {
    pub provenance: TimeseriesProvenance,
    pub rows: Vec<TimeseriesRow>,
}

/// Integration steps covering `[0, t_max]`; `t_max` is rounded down to a
/// whole number of steps.
fn step_count(t_max_us: f64, dt_us: f64) -> usize {
    let ratio = t_max_us / dt_us;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.floor() as usize
    }
}

/// All evolution routes sampled at `t = k · stride · dt`.
pub fn timeseries(
    set: &CouplingSet,
    state0: &BellAmplitudes,
    t_max_us: f64,
    dt_us: f64,
    stride: usize,
) -> Result<Timeseries> {
    if !(dt_us > 0.0) || !(t_max_us >= 0.0) {
        return Err(PhysicsError::invalid(format!("need dt > 0 and t_max ≥ 0, got dt = {dt_us}, t_max = {t_max_us}")));
    }
    let coeffs = abdf(set);
    let heff = build_heff(set)?;
    let steps = step_count(t_max_us, dt_us);
    let numeric = sample_numeric(state0, &heff, units::us_to_s(dt_us), steps, stride)?;
    let closed_available = state0.is_real(NORM_TOLERANCE);

    let mut rows = Vec::with_capacity(numeric.len());
    let mut fallback = false;
    let mut drift: f64 = 0.0;
    for (k, num) in numeric.iter().enumerate() {
        let t_us = (k * stride) as f64 * dt_us;
        let t = units::us_to_s(t_us);
        let printed = evolve_closed_form(state0, &coeffs, t, EvolutionMode::Printed)?;
        let unitary = evolve_closed_form(state0, &coeffs, t, EvolutionMode::Unitary)?;
        let closed = if closed_available {
            let cf = concurrence_closed_form(state0, &coeffs, t)?;
            fallback |= cf.fallback;
            Some(cf.value)
        } else {
            None
        };
        drift = drift.max((num.norm_sqr() - 1.0).abs());
        rows.push(TimeseriesRow {
            t_us,
            c_printed: concurrence_pure(&printed),
            c_unitary: concurrence_pure(&unitary),
            c_numeric: concurrence_pure(num),
            c_closed_form: closed,
            norm_printed: printed.norm_sqr(),
            norm_numeric: num.norm_sqr(),
        });
    }

    Ok(Timeseries {
        provenance: TimeseriesProvenance {
            couplings: *set,
            coefficients: coeffs,
            initial: state0.0.map(|c| [c.re, c.im]),
            t_max_us,
            dt_us,
            output_stride: stride,
            closed_form_fallback: fallback,
            closed_form_available: closed_available,
            max_norm_drift_numeric: drift,
        },
        rows,
    })
}

impl TimeseriesRow {
    fn cells(&self) -> [Option<f64>; 7] {
        [
            Some(self.t_us),
            Some(self.c_printed),
            Some(self.c_unitary),
            Some(self.c_numeric),
            self.c_closed_form,
            Some(self.norm_printed),
            Some(self.norm_numeric),
        ]
    }
}

impl Timeseries {
    pub fn to_csv(&self) -> String {
        let mut table = CsvTable::new(&TIMESERIES_HEADER);
        for row in &self.rows {
            table.row(&row.cells());
        }
        table.as_str().to_owned()
    }

    fn append_prefixed(&self, table: &mut CsvTable, alpha: f64, delta_h: f64) {
        for row in &self.rows {
            let mut cells = vec![Some(alpha), Some(delta_h)];
            cells.extend(row.cells());
            table.row(&cells);
        }
    }
}

/// Time series for the scenario in `config` (its `drive.alpha` and `dynamics` sections).
pub fn run_timeseries(config: &ScenarioConfig) -> HarnessResult<Timeseries> {
    let d = &config.dynamics;
    let set = config_mapping(config, config.drive.alpha, d.delta_h).map_err(HarnessError::physics("coupling map"))?;
    timeseries(&set, &config.initial_state(), d.t_max_us, d.dt_us, d.output_stride)
        .map_err(HarnessError::physics("time series"))
}

/// Time averages of each concurrence column of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendMeans {
    pub printed: f64,
    pub unitary: f64,
    pub numeric: f64,
    pub closed_form: Option<f64>,
}

impl Timeseries {
    /// Sample means over the emitted rows (uniform in t).
    pub fn means(&self) -> TrendMeans {
        let n = self.rows.len() as f64;
        let mean = |f: &dyn Fn(&TimeseriesRow) -> f64| self.rows.iter().map(f).sum::<f64>() / n;
        TrendMeans {
            printed: mean(&|r| r.c_printed),
            unitary: mean(&|r| r.c_unitary),
            numeric: mean(&|r| r.c_numeric),
            closed_form: self.provenance.closed_form_available.then(|| mean(&|r| r.c_closed_form.unwrap_or(0.0))),
        }
    }
}

/// Time-averaged concurrence over `[0, dynamics.t_max_us]` at `(α, Δh)`,
/// otherwise using the dynamics section of `config`.
pub fn trend_means(config: &ScenarioConfig, alpha: f64, delta_h: f64) -> Result<TrendMeans> {
    let d = &config.dynamics;
    let set = config_mapping(config, alpha, delta_h)?;
    Ok(timeseries(&set, &config.initial_state(), d.t_max_us, d.dt_us, d.output_stride)?.means())
}

/// Mean concurrence over `{α < 0.5, Δh < 0.25}` and `{α < 0.5, Δh > 0.3}`.
pub fn region_means(sweep: &SweepResult) -> (f64, f64) {
    let avg = |pick: &dyn Fn(&SweepCell) -> bool| {
        let v: Vec<f64> = sweep.cells.iter().filter(|c| pick(c)).map(|c| c.concurrence).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    (avg(&|c| c.alpha < 0.5 && c.delta_h < 0.25), avg(&|c| c.alpha < 0.5 && c.delta_h > 0.3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellProvenance {
    pub lambda: f64,
    pub rabi: f64,
    pub omega: f64,
    pub detuning: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub alpha: f64,
    pub delta_h: f64,
    pub concurrence: f64,
    pub provenance: CellProvenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub mode: EvolutionMode,
    pub t_star_us: f64,
    pub dt_us: f64,
    pub phonon_number: f64,
    pub alphas: Vec<f64>,
    pub delta_hs: Vec<f64>,
    /// α-major: cell `(i, j)` sits at `i * delta_hs.len() + j`.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn value(&self, alpha_index: usize, delta_h_index: usize) -> f64 {
        self.cells[alpha_index * self.delta_hs.len() + delta_h_index].concurrence
    }

    pub fn to_csv(&self) -> String {
        let mut table = CsvTable::new(&["alpha", "delta_h", "concurrence"]);
        for c in &self.cells {
            table.row(&[Some(c.alpha), Some(c.delta_h), Some(c.concurrence)]);
        }
        table.as_str().to_owned()
    }
}

fn sweep_cell(
    config: &ScenarioConfig,
    state0: &BellAmplitudes,
    mode: EvolutionMode,
    alpha: f64,
    delta_h: f64,
) -> Result<SweepCell> {
    let set = config_mapping(config, alpha, delta_h)?;
    let t = units::us_to_s(config.sweep.t_star_us);
    let concurrence = concurrence_at(&set, state0, t, mode, config.dt())?;
    let c = abdf(&set);
    Ok(SweepCell {
        alpha,
        delta_h,
        concurrence,
        provenance: CellProvenance {
            lambda: set.lambda,
            rabi: set.rabi,
            omega: set.omega,
            detuning: set.detuning,
            a: c.a,
            b: c.b,
            d: c.d,
            f: c.f,
        },
    })
}

/// Concurrence at `sweep.t_star_us` over the `(α, Δh)` grid. Cells are
/// evaluated in parallel and collected in grid order, so the result does not
/// depend on the thread count.
pub fn run_contour(config: &ScenarioConfig, mode: EvolutionMode, threads: Option<usize>) -> HarnessResult<SweepResult> {
    let alphas = config.sweep.alphas();
    let delta_hs = config.sweep.delta_hs();
    let state0 = config.initial_state();
    let grid: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| delta_hs.iter().map(move |&d| (a, d))).collect();
    let cells = with_pool(threads, || {
        grid.par_iter()
            .map(|&(a, d)| {
                sweep_cell(config, &state0, mode, a, d)
                    .map_err(HarnessError::physics(format!("sweep cell α = {a}, Δh = {d}")))
            })
            .collect::<HarnessResult<Vec<_>>>()
    })?;
    Ok(SweepResult {
        mode,
        t_star_us: config.sweep.t_star_us,
        dt_us: config.dynamics.dt_us,
        phonon_number: config.dynamics.n,
        alphas,
        delta_hs,
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeflectionEntry {
    /// Applied field, absent for the field-independent magnetoelastic case.
    pub field_mt: Option<f64>,
    pub deflection_nm: f64,
    pub h1_nm: Option<f64>,
    pub h2_nm: Option<f64>,
    pub delta_h: Option<f64>,
    pub over_field: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeflectionRun {
    pub mass_kg: f64,
    pub resonance_frequencies_mhz: [f64; 3],
    pub gravity_sag_m: f64,
    pub zero_point_amplitude_m: ZeroPointAmplitudes,
    pub max_field_mt: f64,
    pub magnetoelastic: DeflectionEntry,
    pub torque: Vec<DeflectionEntry>,
}

fn deflection_entry(
    field_mt: Option<f64>,
    raw: f64,
    over_field: bool,
    report: Result<mechanics::DeflectionReport>,
    delta_h: Option<f64>,
) -> DeflectionEntry {
    let (h1, h2, err) = match report {
        Ok(r) => (Some(units::m_to_nm(r.h1)), Some(units::m_to_nm(r.h2)), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    DeflectionEntry {
        field_mt,
        deflection_nm: units::m_to_nm(raw),
        h1_nm: h1,
        h2_nm: h2,
        delta_h,
        over_field,
        error: err,
    }
}

/// Mechanical summary of the configured cantilever. Gap closure in one entry
/// is reported on that entry and does not abort the run.
pub fn run_deflection(config: &ScenarioConfig) -> HarnessResult<DeflectionRun> {
    let spec = config.cantilever_spec();
    spec.validate().map_err(HarnessError::physics("cantilever"))?;
    let c = PhysicalConstants::CODATA;
    let mut freqs = [0.0; 3];
    for (mode, f) in freqs.iter_mut().enumerate() {
        *f = mechanics::resonance_frequency(&spec, mode + 1).map_err(HarnessError::physics("resonance"))? / 1e6;
    }
    let mass = mechanics::mass(&spec);
    let bmax = mechanics::max_field_with(NV_ZERO_FIELD_SPLITTING, &c);

    let me = mechanics::deflection_magnetoelastic(&spec);
    let magnetoelastic = deflection_entry(
        None,
        mechanics::magnetoelastic_deflection(&spec),
        false,
        me.clone(),
        me.as_ref().ok().map(|r| r.delta_h),
    );

    let torque = config
        .cantilever
        .fields_mt
        .iter()
        .map(|&b_mt| {
            let b = units::mt_to_t(b_mt);
            let report = mechanics::deflection_torque(&spec, b, &c);
            let dh = mechanics::asymmetry(&spec, b, &c).ok();
            deflection_entry(Some(b_mt), mechanics::torque_deflection(&spec, b, &c), b > bmax, report, dh)
        })
        .collect();

    Ok(DeflectionRun {
        mass_kg: mass,
        resonance_frequencies_mhz: freqs,
        gravity_sag_m: mechanics::gravity_sag(&spec, &c),
        zero_point_amplitude_m: mechanics::zero_point_amplitudes(mass, freqs[0] * 1e6, &c),
        max_field_mt: units::t_to_mt(bmax),
        magnetoelastic,
        torque,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveProvenance {
    pub figure: String,
    pub alpha: f64,
    pub delta_h: f64,
    pub provenance: TimeseriesProvenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiguresProvenance {
    pub config: ScenarioConfig,
    pub curves: Vec<CurveProvenance>,
    pub contour: SweepResult,
}

pub const FIGURE_HEADER: [&str; 9] =
    ["alpha", "delta_h", "t_us", "C_printed", "C_unitary", "C_numeric", "C_eq22", "norm_printed", "norm_numeric"];

/// In-memory figure artefacts, keyed by file name.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSet {
    pub files: Vec<(String, String)>,
    pub provenance: FiguresProvenance,
}

fn figure_series(config: &ScenarioConfig, fig: &FigureCurves, state0: &BellAmplitudes) -> Result<Vec<Timeseries>> {
    let d = &config.dynamics;
    fig.delta_h
        .par_iter()
        .map(|&dh| {
            let set = config_mapping(config, fig.alpha, dh)?;
            timeseries(&set, state0, d.t_max_us, d.dt_us, d.output_stride)
        })
        .collect()
}

/// Time-series figures (one CSV per entry of `figures.timeseries`), the
/// contour figure and a provenance document.
pub fn build_figures(config: &ScenarioConfig, threads: Option<usize>) -> HarnessResult<FigureSet> {
    let state0 = config.initial_state();
    let figs = &config.figures.timeseries;
    let series = with_pool(threads, || {
        figs.par_iter()
            .map(|fig| {
                figure_series(config, fig, &state0).map_err(HarnessError::physics(format!("figure {}", fig.name)))
            })
            .collect::<HarnessResult<Vec<_>>>()
    })?;
    let contour = run_contour(config, config.dynamics.mode, threads)?;

    let mut files = Vec::new();
    let mut curves = Vec::new();
    for (fig, runs) in figs.iter().zip(&series) {
        let mut table = CsvTable::new(&FIGURE_HEADER);
        for (run, &dh) in runs.iter().zip(&fig.delta_h) {
            run.append_prefixed(&mut table, fig.alpha, dh);
            curves.push(CurveProvenance {
                figure: fig.name.clone(),
                alpha: fig.alpha,
                delta_h: dh,
                provenance: run.provenance.clone(),
            });
        }
        files.push((format!("{}.csv", fig.name), table.as_str().to_owned()));
    }
    files.push(("fig6.csv".to_owned(), contour.to_csv()));
    let provenance = FiguresProvenance { config: config.clone(), curves, contour };
    files.push(("figures.json".to_owned(), to_json(&provenance)));
    Ok(FigureSet { files, provenance })
}

pub fn write_figures(set: &FigureSet, outdir: &Path) -> HarnessResult<()> {
    for (name, body) in &set.files {
        write_file(&outdir.join(name), body)?;
    }
    Ok(())
}
