use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use metricforge::corpus::{load_corpus, Corpus, CorpusFormat};
use metricforge::training::parse_key_values;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Synth,
    Train,
    Score,
    Evaluate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Train => "train",
            Command::Score => "score",
            Command::Evaluate => "evaluate",
        }
    }

    /// Every accepted key with its default. An empty default means unset.
    pub fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Command::Synth => &[
                ("format", "wmt_tsv"),
                ("noise", "5"),
                ("parallel", "500"),
                ("segments", "200"),
                ("systems", "6"),
            ],
            Command::Train => &[
                ("addk", "1"),
                ("alpha", "1"),
                ("backend", "log_linear"),
                ("corpus", ""),
                ("corpus_format", "auto"),
                ("dis_learning_rate", "0.05"),
                ("dis_max_steps", "2000"),
                ("gen_learning_rate", "0.1"),
                ("gen_max_steps", "2000"),
                ("heldout_segments", "0"),
                ("lambda", "0.5"),
                ("max_pairs_per_segment", ""),
                ("mode", "reference"),
                ("order", "2"),
                ("parallel", ""),
                ("stage", "gen"),
                ("threshold", "25"),
            ],
            Command::Score => &[
                ("baseline", "none"),
                ("corpus", ""),
                ("corpus_format", "auto"),
                ("mode", "reference"),
                ("model", ""),
                ("name", "t5score"),
            ],
            Command::Evaluate => &[
                ("category", "overall"),
                ("corpus", ""),
                ("corpus_format", "auto"),
                ("metrics", ""),
                ("plot", "false"),
                ("scores", ""),
                ("significance", "0"),
                ("stat", "all"),
                ("threshold", "25"),
                ("top_k", ""),
                ("unsupervised", ""),
            ],
        }
    }

    /// Keys naming input files or directories; `scores` is a comma list.
    pub fn input_keys(self) -> &'static [&'static str] {
        match self {
            Command::Synth => &[],
            Command::Train => &["parallel", "corpus"],
            Command::Score => &["model", "corpus"],
            Command::Evaluate => &["scores", "corpus"],
        }
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        [Command::Synth, Command::Train, Command::Score, Command::Evaluate]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown command {s:?}")))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fully resolved key-value settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    command: Command,
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Settings {
    pub fn defaults(command: Command) -> Self {
        Settings {
            command,
            values: command
                .defaults()
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> CliResult<()> {
        let key = normalize(key);
        match self.values.get_mut(&key) {
            Some(slot) => {
                *slot = value.into();
                Ok(())
            }
            None => Err(CliError::Usage(format!(
                "{} does not accept setting {key:?}",
                self.command
            ))),
        }
    }

    /// Applies a `key = value` config file. A `seed` entry is returned separately.
    pub fn apply_config_file(&mut self, path: &Path) -> CliResult<Option<u64>> {
        let content = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let kv = parse_key_values(path, &content).map_err(|e| CliError::Usage(e.to_string()))?;
        let mut seed = None;
        for (k, v) in kv {
            if normalize(&k) == "seed" {
                seed = Some(v.parse().map_err(|_| CliError::Usage(format!("invalid seed {v:?}")))?);
            } else {
                self.set(&k, v)?;
            }
        }
        Ok(seed)
    }

    /// Rebuilds settings from a manifest snapshot, which must name every key.
    pub fn from_snapshot(command: Command, snapshot: &BTreeMap<String, String>) -> CliResult<Self> {
        let mut s = Settings::defaults(command);
        for (k, v) in snapshot {
            s.set(k, v.clone())?;
        }
        if snapshot.len() != s.values.len() {
            return Err(CliError::Usage("manifest config snapshot is incomplete".into()));
        }
        Ok(s)
    }

    pub fn command(&self) -> Command {
        self.command
    }

    pub fn snapshot(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("{} has no setting {key}", self.command))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<T> {
        let v = self.raw(key);
        v.parse()
            .map_err(|_| CliError::Usage(format!("invalid value for {key}: {v:?}")))
    }

    /// `None` when the value is empty.
    pub fn opt<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        if self.raw(key).is_empty() {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    pub fn flag(&self, key: &str) -> CliResult<bool> {
        match self.raw(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            v => Err(CliError::Usage(format!("invalid boolean for {key}: {v:?}"))),
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        let v = self.raw(key);
        (!v.is_empty()).then(|| PathBuf::from(v))
    }

    pub fn require_path(&self, key: &str) -> CliResult<PathBuf> {
        self.path(key)
            .ok_or_else(|| CliError::Usage(format!("{} needs --{}", self.command, key.replace('_', "-"))))
    }

    /// Comma-separated list; empty means none.
    pub fn list(&self, key: &str) -> Vec<String> {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect()
    }

    pub fn corpus_format(&self, path: &Path) -> CliResult<CorpusFormat> {
        match self.raw("corpus_format") {
            "auto" => Ok(if path.is_dir() {
                CorpusFormat::WmtTsv
            } else {
                CorpusFormat::Jsonl
            }),
            other => Ok(other.parse()?),
        }
    }

    pub fn load_corpus(&self) -> CliResult<Option<Corpus>> {
        match self.path("corpus") {
            None => Ok(None),
            Some(p) => {
                let format = self.corpus_format(&p)?;
                Ok(Some(load_corpus(&p, format)?))
            }
        }
    }
}
