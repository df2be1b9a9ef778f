//! Scenario engine behind the CLI: configs in, CSV/JSON artefacts out.

pub mod config;
pub mod scenario;
pub mod verify;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{load_config, parse_config, ConfigError, ScenarioConfig};
pub use scenario::*;
pub use verify::{run_verify, VerifyOptions, VerifyReport};

use crate::error::PhysicsError;

/// Environment variable that pins the worker-thread count.
pub const THREADS_ENV: &str = "NV_SEESAW_THREADS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{context}: {source}")]
    Physics { context: String, source: PhysicsError },

    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl HarnessError {
    pub fn physics(context: impl Into<String>) -> impl FnOnce(PhysicsError) -> HarnessError {
        let context = context.into();
        move |source| HarnessError::Physics { context, source }
    }

    /// Process exit code: 1 for config and I/O problems, 2 for physics errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io { .. } => 1,
            HarnessError::Physics { .. } => 2,
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

/// Worker count: explicit request, else `NV_SEESAW_THREADS`, else rayon's default.
pub fn thread_count(requested: Option<usize>) -> Option<usize> {
    requested.or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok())).filter(|&n| n > 0)
}

/// Run `job` inside a dedicated rayon pool.
pub fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> T {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(threads) {
        builder = builder.num_threads(n);
    }
    builder.build().expect("rayon pool").install(job)
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comma-separated table with LF line endings.
pub struct CsvTable {
    text: String,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        CsvTable { text }
    }

    /// Numbers are written with [`fmt_f64`]; `None` leaves the cell empty.
    pub fn row(&mut self, cells: &[Option<f64>]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            if let Some(x) = c {
                let _ = write!(self.text, "{}", fmt_f64(*x));
            }
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

pub fn write_file(path: &Path, contents: &str) -> HarnessResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, contents).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}
