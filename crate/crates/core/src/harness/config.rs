//! JSON scenario configuration.
//!
//! Every field except `schema` is optional and falls back to the reference
//! preset (the checked-in `presets/reference.json`). Values are in
//! human-scale units (nm, mT, MHz, μs); accessors convert to SI once.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{BellAmplitudes, EvolutionMode};
use crate::mechanics::CantileverSpec;
use crate::units;

pub const SCHEMA_VERSION: &str = "nv-seesaw/scenario/v1";

/// Tolerance on `Σ|Cᵢ|² = 1` for amplitudes typed into a config file.
const CONFIG_NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("schema violation at {field}: {message}")]
    Schema { field: String, message: String },

    #[error("invalid configuration at {field}: {message}")]
    Invariant { field: String, message: String },
}

impl ConfigError {
    fn schema(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Schema { field: field.to_owned(), message: message.into() }
    }

    fn invariant(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Invariant { field: field.to_owned(), message: message.into() }
    }

    /// Dotted path of the offending field, when there is one.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Schema { field, .. } | ConfigError::Invariant { field, .. } => Some(field),
            ConfigError::Parse { location, .. } => Some(location),
            ConfigError::Io { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CantileverSection {
    pub length_nm: f64,
    pub width_nm: f64,
    pub substrate_thickness_nm: f64,
    pub film_thickness_nm: f64,
    pub young_modulus_gpa: f64,
    pub poisson_ratio: f64,
    pub density_kg_m3: f64,
    pub magnetoelastic_b1_mj_m3: f64,
    pub atomic_volume_m3: f64,
    pub moment_per_atom_bohr: f64,
    pub rest_gap_nm: f64,
    /// Static fields at which the torque deflection is reported.
    pub fields_mt: Vec<f64>,
}

impl Default for CantileverSection {
    fn default() -> Self {
        CantileverSection {
            length_nm: 3000.0,
            width_nm: 300.0,
            substrate_thickness_nm: 30.0,
            film_thickness_nm: 10.0,
            young_modulus_gpa: 130.0,
            poisson_ratio: 0.279,
            density_kg_m3: 2330.0,
            magnetoelastic_b1_mj_m3: 9.38,
            atomic_volume_m3: 1.096e-29,
            moment_per_atom_bohr: 2.0,
            rest_gap_nm: 25.0,
            fields_mt: vec![0.0, 5.0, 10.0, 20.0, 50.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    /// Spin-resonator coupling `λ/2π`.
    pub lambda_mhz: f64,
    pub alpha: f64,
    /// Microwave detuning `δ/2π`.
    pub detuning_mhz: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        DriveSection { lambda_mhz: 0.1, alpha: 0.25, detuning_mhz: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSection {
    pub delta_h: f64,
    /// Mean phonon number of the resonator.
    pub n: f64,
    pub t_max_us: f64,
    pub dt_us: f64,
    /// Write every `output_stride`-th integration step.
    pub output_stride: usize,
    /// `[re, im]` of `C₁..C₄`.
    pub initial: [[f64; 2]; 4],
    pub mode: EvolutionMode,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection {
            delta_h: 0.0,
            n: 1.0,
            t_max_us: 30.0,
            dt_us: 1e-3,
            output_stride: 10,
            initial: [[0.5, 0.0]; 4],
            mode: EvolutionMode::Printed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_steps: usize,
    pub delta_h_min: f64,
    pub delta_h_max: f64,
    pub delta_h_steps: usize,
    pub t_star_us: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        // 0.1 and 0.03 spacings never put α·Δh exactly on 1, where Δ₁ = 0.
        SweepSection {
            alpha_min: 0.1,
            alpha_max: 4.0,
            alpha_steps: 40,
            delta_h_min: 0.0,
            delta_h_max: 0.9,
            delta_h_steps: 31,
            t_star_us: 13.3,
        }
    }
}

impl SweepSection {
    pub fn alphas(&self) -> Vec<f64> {
        linspace(self.alpha_min, self.alpha_max, self.alpha_steps)
    }

    pub fn delta_hs(&self) -> Vec<f64> {
        linspace(self.delta_h_min, self.delta_h_max, self.delta_h_steps)
    }
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    let span = hi - lo;
    (0..steps).map(|k| lo + span * k as f64 / (steps - 1) as f64).collect()
}

/// One time-series figure: a fixed `α` and several asymmetries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureCurves {
    pub name: String,
    pub alpha: f64,
    pub delta_h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiguresSection {
    pub timeseries: Vec<FigureCurves>,
}

impl Default for FiguresSection {
    fn default() -> Self {
        let dh = vec![0.0, 0.25, 0.5];
        let fig = |name: &str, alpha: f64| FigureCurves { name: name.to_owned(), alpha, delta_h: dh.clone() };
        FiguresSection { timeseries: vec![fig("fig3", 1.5), fig("fig4", 0.25), fig("fig5", 3.0)] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: String,
    #[serde(default)]
    pub cantilever: CantileverSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub figures: FiguresSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            schema: SCHEMA_VERSION.to_owned(),
            cantilever: CantileverSection::default(),
            drive: DriveSection::default(),
            dynamics: DynamicsSection::default(),
            sweep: SweepSection::default(),
            figures: FiguresSection::default(),
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let config: ScenarioConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let field = e.path().to_string();
        ConfigError::Schema { field, message: e.into_inner().to_string() }
    })?;
    config.validate()?;
    Ok(config)
}

fn require(cond: bool, field: &str, message: impl FnOnce() -> String) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(ConfigError::schema(field, message()))
    }
}

fn positive(value: f64, field: &str) -> Result<(), ConfigError> {
    require(value.is_finite() && value > 0.0, field, || format!("must be positive, got {value}"))
}

fn unit_interval(value: f64, field: &str) -> Result<(), ConfigError> {
    require((0.0..1.0).contains(&value), field, || format!("must lie in [0, 1), got {value}"))
}

impl ScenarioConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        require(self.schema == SCHEMA_VERSION, "schema", || {
            format!("unsupported schema '{}', expected '{SCHEMA_VERSION}'", self.schema)
        })?;

        let c = &self.cantilever;
        for (v, f) in [
            (c.length_nm, "cantilever.length_nm"),
            (c.width_nm, "cantilever.width_nm"),
            (c.substrate_thickness_nm, "cantilever.substrate_thickness_nm"),
            (c.young_modulus_gpa, "cantilever.young_modulus_gpa"),
            (c.density_kg_m3, "cantilever.density_kg_m3"),
            (c.atomic_volume_m3, "cantilever.atomic_volume_m3"),
            (c.rest_gap_nm, "cantilever.rest_gap_nm"),
        ] {
            positive(v, f)?;
        }
        require(c.poisson_ratio > 0.0 && c.poisson_ratio < 0.5, "cantilever.poisson_ratio", || {
            format!("must lie in (0, 0.5), got {}", c.poisson_ratio)
        })?;
        require(c.film_thickness_nm >= 0.0, "cantilever.film_thickness_nm", || {
            format!("must be non-negative, got {}", c.film_thickness_nm)
        })?;
        if c.film_thickness_nm >= c.substrate_thickness_nm {
            return Err(ConfigError::invariant(
                "cantilever.film_thickness_nm",
                "thin-film formulas need film_thickness_nm < substrate_thickness_nm",
            ));
        }
        for (i, b) in c.fields_mt.iter().enumerate() {
            require(b.is_finite() && *b >= 0.0, &format!("cantilever.fields_mt[{i}]"), || {
                format!("must be non-negative, got {b}")
            })?;
        }

        positive(self.drive.lambda_mhz, "drive.lambda_mhz")?;
        positive(self.drive.alpha, "drive.alpha")?;
        require(self.drive.detuning_mhz.is_finite(), "drive.detuning_mhz", || "must be finite".into())?;

        let d = &self.dynamics;
        unit_interval(d.delta_h, "dynamics.delta_h")?;
        require(d.n.is_finite() && d.n >= 0.0, "dynamics.n", || format!("must be non-negative, got {}", d.n))?;
        require(d.t_max_us.is_finite() && d.t_max_us >= 0.0, "dynamics.t_max_us", || {
            format!("must be non-negative, got {}", d.t_max_us)
        })?;
        positive(d.dt_us, "dynamics.dt_us")?;
        require(d.output_stride >= 1, "dynamics.output_stride", || "must be at least 1".into())?;
        let norm: f64 = d.initial.iter().map(|[r, i]| r * r + i * i).sum();
        if (norm - 1.0).abs() > CONFIG_NORM_TOLERANCE {
            return Err(ConfigError::invariant(
                "dynamics.initial",
                format!("amplitudes must be normalised, Σ|Cᵢ|² = {norm}"),
            ));
        }

        let s = &self.sweep;
        positive(s.alpha_min, "sweep.alpha_min")?;
        positive(s.alpha_max, "sweep.alpha_max")?;
        unit_interval(s.delta_h_min, "sweep.delta_h_min")?;
        unit_interval(s.delta_h_max, "sweep.delta_h_max")?;
        require(s.t_star_us.is_finite() && s.t_star_us >= 0.0, "sweep.t_star_us", || {
            format!("must be non-negative, got {}", s.t_star_us)
        })?;
        for (steps, lo, hi, field) in [
            (s.alpha_steps, s.alpha_min, s.alpha_max, "sweep.alpha_steps"),
            (s.delta_h_steps, s.delta_h_min, s.delta_h_max, "sweep.delta_h_steps"),
        ] {
            require(steps >= 1, field, || "must be at least 1".into())?;
            if steps == 1 && lo != hi {
                return Err(ConfigError::invariant(field, "a single step needs equal min and max"));
            }
            if hi < lo {
                return Err(ConfigError::invariant(field, "max lies below min"));
            }
        }

        for (i, fig) in self.figures.timeseries.iter().enumerate() {
            positive(fig.alpha, &format!("figures.timeseries[{i}].alpha"))?;
            for (j, dh) in fig.delta_h.iter().enumerate() {
                unit_interval(*dh, &format!("figures.timeseries[{i}].delta_h[{j}]"))?;
            }
        }
        Ok(())
    }

    pub fn cantilever_spec(&self) -> CantileverSpec {
        let c = &self.cantilever;
        CantileverSpec {
            length: units::nm_to_m(c.length_nm),
            width: units::nm_to_m(c.width_nm),
            substrate_thickness: units::nm_to_m(c.substrate_thickness_nm),
            film_thickness: units::nm_to_m(c.film_thickness_nm),
            young_modulus: c.young_modulus_gpa * units::GPA,
            poisson_ratio: c.poisson_ratio,
            density: c.density_kg_m3,
            magnetoelastic_b1: c.magnetoelastic_b1_mj_m3 * units::MJ_PER_M3,
            atomic_volume: c.atomic_volume_m3,
            moment_per_atom: c.moment_per_atom_bohr,
            rest_gap: units::nm_to_m(c.rest_gap_nm),
        }
    }

    /// `λ` in rad/s.
    pub fn lambda(&self) -> f64 {
        units::mhz_to_angular(self.drive.lambda_mhz)
    }

    /// Drive detuning `δ` in rad/s.
    pub fn drive_detuning(&self) -> f64 {
        units::mhz_to_angular(self.drive.detuning_mhz)
    }

    pub fn dt(&self) -> f64 {
        units::us_to_s(self.dynamics.dt_us)
    }

    /// Initial Bell amplitudes, rescaled onto the unit sphere.
    pub fn initial_state(&self) -> BellAmplitudes {
        let raw = self.dynamics.initial.map(|[r, i]| Complex64::new(r, i));
        let norm: f64 = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        BellAmplitudes(raw.map(|c| c / norm))
    }
}
