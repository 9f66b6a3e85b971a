use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::{CliError, CliResult};

/// Output files keyed by path relative to the output directory.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Outputs {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, body: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), body.into());
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(Vec::as_slice)
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        self.get(name).and_then(|b| std::str::from_utf8(b).ok())
    }

    /// Writes each file to a temporary sibling and renames it into place.
    pub fn write_all(&self, out: &Path) -> CliResult<()> {
        for (name, body) in &self.files {
            let path = out.join(name);
            let dir = path.parent().unwrap_or(out);
            let io = |e: std::io::Error| CliError::Data(format!("{}: {e}", path.display()));
            fs::create_dir_all(dir).map_err(io)?;
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(body).map_err(io)?;
            tmp.persist(&path).map_err(|e| io(e.error))?;
        }
        Ok(())
    }
}
