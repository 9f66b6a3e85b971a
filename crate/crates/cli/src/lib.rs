//! Command implementations behind the `metricforge` binary.
//!
//! Every command is a pure function from resolved [`Settings`] and a seed to a
//! set of output files. [`execute`] writes those files (each via a temporary
//! file and a rename) together with a `manifest.json` that is enough to
//! replay the run.

pub mod commands;
pub mod manifest;
pub mod output;
pub mod settings;

use std::fmt;
use std::path::Path;

pub use manifest::{digest_inputs, Manifest, MANIFEST_FILE};
pub use output::Outputs;
pub use settings::{Command, Settings};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Lib(metricforge::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Lib(e) if e.is_usage() => EXIT_USAGE,
            CliError::Lib(e) if e.is_numeric() => EXIT_NUMERIC,
            CliError::Lib(_) => EXIT_DATA,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<metricforge::Error> for CliError {
    fn from(e: metricforge::Error) -> Self {
        CliError::Lib(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Runs `command` and returns its outputs, without touching the filesystem
/// beyond reading inputs.
pub fn run(command: Command, settings: &Settings, seed: u64) -> CliResult<Outputs> {
    match command {
        Command::Synth => commands::synth(settings, seed),
        Command::Train => commands::train(settings, seed),
        Command::Score => commands::score(settings, seed),
        Command::Evaluate => commands::evaluate(settings, seed),
    }
}

/// Runs `command`, then writes its outputs and manifest under `out`.
pub fn execute(command: Command, settings: &Settings, seed: u64, out: &Path) -> CliResult<Manifest> {
    let manifest = Manifest::new(command, settings, seed)?;
    let mut outputs = run(command, settings, seed)?;
    outputs.add(MANIFEST_FILE, manifest.to_json());
    outputs.write_all(out)?;
    Ok(manifest)
}

/// Re-runs the command recorded in a manifest after checking that its inputs
/// are unchanged.
pub fn replay(manifest_path: &Path, out: &Path) -> CliResult<Manifest> {
    let recorded = Manifest::load(manifest_path)?;
    let command: Command = recorded.command.parse()?;
    let settings = Settings::from_snapshot(command, &recorded.config)?;
    let current = digest_inputs(command, &settings)?;
    if current != recorded.inputs {
        let changed: Vec<&String> = recorded
            .inputs
            .keys()
            .chain(current.keys())
            .filter(|k| recorded.inputs.get(*k) != current.get(*k))
            .collect();
        return Err(CliError::Data(format!(
            "inputs changed since the manifest was written: {changed:?}"
        )));
    }
    execute(command, &settings, recorded.seed, out)
}
