use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Ordered `key = value` pairs.
pub type KeyValues = BTreeMap<String, String>;

/// Parses `key = value` lines. Blank lines and lines starting with `#` are ignored.
pub fn parse_key_values(path: &Path, content: &str) -> Result<KeyValues> {
    let mut out = KeyValues::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, i + 1, "expected key = value"))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::parse(path, i + 1, "empty key"));
        }
        if out.insert(k.to_owned(), v.to_owned()).is_some() {
            return Err(Error::parse(path, i + 1, format!("duplicate key {k:?}")));
        }
    }
    Ok(out)
}
