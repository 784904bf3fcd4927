//! Configuration-driven driver for the nsclab studies.
//!
//! Every study writes its artifacts into one output directory together with
//! `manifest.json`, which echoes the resolved configuration and lists the
//! SHA-256 digest of each file.

pub mod config;
pub mod output;
pub mod studies;

use clap::ValueEnum;
use std::path::{Path, PathBuf};

pub use config::{Resolved, RunConfig};
pub use output::Artifacts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum StudyName {
    Spectrum,
    SkCheck,
    Evolve,
    DecayFit,
    RelaxSweep,
    InitialLayer,
    Lyapunov,
    Bernstein,
}

impl StudyName {
    pub fn as_str(self) -> &'static str {
        match self {
            StudyName::Spectrum => "spectrum",
            StudyName::SkCheck => "sk-check",
            StudyName::Evolve => "evolve",
            StudyName::DecayFit => "decay-fit",
            StudyName::RelaxSweep => "relax-sweep",
            StudyName::InitialLayer => "initial-layer",
            StudyName::Lyapunov => "lyapunov",
            StudyName::Bernstein => "bernstein",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<nsclab_core::Error> for CliError {
    fn from(e: nsclab_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

/// Reads and resolves a configuration file.
pub fn load(path: &Path, name: StudyName, seed: Option<u64>, out: Option<&str>) -> Result<Resolved, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    RunConfig::from_toml(&text)?.resolve(name, seed, out)
}

/// The resolved parameter set as printed by `--dry-run`.
pub fn dry_run_text(r: &Resolved) -> String {
    let mut c = r.config.clone();
    c.seed = Some(r.seed);
    toml::to_string_pretty(&c).expect("resolved configs serialize")
}

/// Runs the study and writes its artifacts. Returns the output directory.
pub fn run(r: &Resolved) -> Result<PathBuf, CliError> {
    let arts = studies::execute(r)?;
    let dir = PathBuf::from(&r.config.output.dir);
    output::write_all(&dir, r, &arts)?;
    Ok(dir)
}
