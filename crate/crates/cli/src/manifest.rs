use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::settings::{Command, Settings};
use crate::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    /// Input path to SHA-256 of its content. Directories list each file.
    pub inputs: BTreeMap<String, String>,
    pub version: String,
    pub seed: u64,
}

impl Manifest {
    pub fn new(command: Command, settings: &Settings, seed: u64) -> CliResult<Self> {
        Ok(Manifest {
            command: command.name().to_owned(),
            config: settings.snapshot().clone(),
            inputs: digest_inputs(command, settings)?,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let s = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&s).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}

fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn digest_path(path: &Path, out: &mut BTreeMap<String, String>) -> CliResult<()> {
    if path.is_dir() {
        let mut entries: Vec<_> = fs::read_dir(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        entries.sort();
        for p in entries {
            out.insert(p.display().to_string(), sha256_file(&p)?);
        }
    } else {
        out.insert(path.display().to_string(), sha256_file(path)?);
    }
    Ok(())
}

/// Content hashes of every input the settings point at.
pub fn digest_inputs(command: Command, settings: &Settings) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for key in command.input_keys() {
        for p in settings.list(key) {
            digest_path(Path::new(&p), &mut out)?;
        }
    }
    Ok(out)
}
