//! Evaluation corpora: segments, system outputs and human judgments.
//!
//! Two on-disk layouts are supported. `wmt_tsv` is a directory holding
//! `segments.tsv`, `outputs.tsv` and (optionally) `judgments.tsv`, each with a
//! header row. `jsonl` is one JSON object per segment with its judgments
//! embedded. MQM penalty scores are negated on load so that a higher score is
//! always better, and negated back on write.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{Text, TokenPolicy};

pub const SEGMENTS_FILE: &str = "segments.tsv";
pub const OUTPUTS_FILE: &str = "outputs.tsv";
pub const JUDGMENTS_FILE: &str = "judgments.tsv";

const SEGMENTS_HEADER: [&str; 3] = ["segment_id", "source", "reference"];
const OUTPUTS_HEADER: [&str; 3] = ["segment_id", "system_id", "hypothesis"];
const JUDGMENTS_HEADER: [&str; 5] = ["segment_id", "system_id", "score", "kind", "category"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgmentKind {
    /// Direct assessment on a 0–100 scale.
    RawDa,
    /// Annotator-standardized direct assessment.
    ZDa,
    /// MQM error score, stored negated (higher is better).
    Mqm,
}

impl JudgmentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JudgmentKind::RawDa => "raw_da",
            JudgmentKind::ZDa => "z_da",
            JudgmentKind::Mqm => "mqm",
        }
    }
}

impl fmt::Display for JudgmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for JudgmentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw_da" => Ok(JudgmentKind::RawDa),
            "z_da" => Ok(JudgmentKind::ZDa),
            "mqm" => Ok(JudgmentKind::Mqm),
            other => Err(Error::InvalidArgument(format!("unknown judgment kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    Accuracy,
    Fluency,
    Terminology,
    Style,
    Locale,
    Overall,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 6] = [
        ErrorCategory::Accuracy,
        ErrorCategory::Fluency,
        ErrorCategory::Terminology,
        ErrorCategory::Style,
        ErrorCategory::Locale,
        ErrorCategory::Overall,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Accuracy => "accuracy",
            ErrorCategory::Fluency => "fluency",
            ErrorCategory::Terminology => "terminology",
            ErrorCategory::Style => "style",
            ErrorCategory::Locale => "locale",
            ErrorCategory::Overall => "overall",
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ErrorCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown error category {s:?}")))
    }
}

/// One human score for a (segment, system) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Judgment {
    pub segment_id: String,
    pub system_id: String,
    pub score: f64,
    pub kind: JudgmentKind,
    pub category: Option<ErrorCategory>,
}

impl Judgment {
    fn check(&self) -> std::result::Result<(), String> {
        if !self.score.is_finite() {
            return Err(format!("non-finite score {}", self.score));
        }
        if self.kind == JudgmentKind::RawDa && !(0.0..=100.0).contains(&self.score) {
            return Err(format!("raw_da score {} outside [0, 100]", self.score));
        }
        if self.category.is_some() && self.kind != JudgmentKind::Mqm {
            return Err(format!("category given for non-MQM judgment kind {}", self.kind));
        }
        Ok(())
    }

    /// True if this judgment rates the whole hypothesis rather than one error category.
    pub fn is_overall(&self) -> bool {
        matches!(self.category, None | Some(ErrorCategory::Overall))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LanguagePair {
    pub source: String,
    pub target: String,
}

impl LanguagePair {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        LanguagePair {
            source: source.into(),
            target: target.into(),
        }
    }

    pub fn undetermined() -> Self {
        LanguagePair::new("und", "und")
    }

    /// Parses names like `de-en` or `corpus.de-en`; the last dotted component wins.
    pub fn from_name(name: &str) -> Option<Self> {
        let tail = name.rsplit('.').next()?;
        let (src, tgt) = tail.split_once('-')?;
        let ok = |s: &str| !s.is_empty() && s.len() <= 8 && s.chars().all(|c| c.is_ascii_alphabetic());
        (ok(src) && ok(tgt)).then(|| LanguagePair::new(src, tgt))
    }
}

impl fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.source, self.target)
    }
}

/// One segment: the source, an optional reference, and every system's output.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalInstance {
    pub segment_id: String,
    pub source: Text,
    pub reference: Option<Text>,
    pub hypotheses: BTreeMap<String, Text>,
}

/// A validated evaluation corpus.
///
/// Construction goes through [`Corpus::new`], which enforces that segment ids
/// are unique, every segment has a hypothesis, and every judgment points at an
/// existing (segment, system) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    language_pair: LanguagePair,
    instances: Vec<EvalInstance>,
    judgments: Vec<Judgment>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(language_pair: LanguagePair, instances: Vec<EvalInstance>, judgments: Vec<Judgment>) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut index = HashMap::with_capacity(instances.len());
        let mut duplicates = BTreeSet::new();
        for (i, inst) in instances.iter().enumerate() {
            if index.insert(inst.segment_id.clone(), i).is_some() {
                duplicates.insert(inst.segment_id.clone());
            }
        }
        if !duplicates.is_empty() {
            return Err(Error::invariant(
                "duplicate segment ids",
                duplicates.into_iter().collect(),
            ));
        }
        let bare: Vec<String> = instances
            .iter()
            .filter(|i| i.hypotheses.is_empty())
            .map(|i| i.segment_id.clone())
            .collect();
        if !bare.is_empty() {
            return Err(Error::invariant("segments without hypotheses", bare));
        }

        let mut dangling = BTreeSet::new();
        let mut bad_values = Vec::new();
        for j in &judgments {
            match index.get(&j.segment_id) {
                None => {
                    dangling.insert(j.segment_id.clone());
                }
                Some(&i) if !instances[i].hypotheses.contains_key(&j.system_id) => {
                    dangling.insert(j.system_id.clone());
                }
                Some(_) => {}
            }
            if let Err(msg) = j.check() {
                bad_values.push(format!("{}/{}: {msg}", j.segment_id, j.system_id));
            }
        }
        if !dangling.is_empty() {
            return Err(Error::invariant(
                "judgments reference unknown segments or systems",
                dangling.into_iter().collect(),
            ));
        }
        if !bad_values.is_empty() {
            return Err(Error::invariant("invalid judgment values", bad_values));
        }

        Ok(Corpus {
            language_pair,
            instances,
            judgments,
            index,
        })
    }

    pub fn language_pair(&self) -> &LanguagePair {
        &self.language_pair
    }

    pub fn instances(&self) -> &[EvalInstance] {
        &self.instances
    }

    pub fn judgments(&self) -> &[Judgment] {
        &self.judgments
    }

    pub fn instance(&self, segment_id: &str) -> Option<&EvalInstance> {
        self.index.get(segment_id).map(|&i| &self.instances[i])
    }

    pub fn into_parts(self) -> (LanguagePair, Vec<EvalInstance>, Vec<Judgment>) {
        (self.language_pair, self.instances, self.judgments)
    }

    /// All system ids that produced at least one hypothesis, sorted.
    pub fn systems(&self) -> BTreeSet<String> {
        self.instances
            .iter()
            .flat_map(|i| i.hypotheses.keys().cloned())
            .collect()
    }

    /// (segment, system) cells whose hypothesis is empty after tokenization.
    pub fn empty_hypotheses(&self) -> Vec<(String, String)> {
        self.instances
            .iter()
            .flat_map(|i| {
                i.hypotheses
                    .iter()
                    .filter(|(_, t)| t.is_empty())
                    .map(move |(sys, _)| (i.segment_id.clone(), sys.clone()))
            })
            .collect()
    }

    /// The single judgment kind used by this corpus, or an error if kinds are mixed.
    pub fn judgment_kind(&self) -> Result<Option<JudgmentKind>> {
        single_kind(&self.judgments)
    }

    /// Overall human score per (segment, system). See [`overall_scores`].
    pub fn human_scores(&self) -> BTreeMap<(String, String), f64> {
        overall_scores(&self.judgments)
    }

    /// File name and content of each `wmt_tsv` file.
    pub fn to_wmt_tsv_files(&self) -> Result<Vec<(&'static str, String)>> {
        wmt_tsv_files(self)
    }

    pub fn to_jsonl(&self) -> Result<String> {
        jsonl_string(self)
    }

    /// Writes the corpus in the given layout. For `wmt_tsv`, `path` is a directory.
    pub fn write(&self, path: &Path, format: CorpusFormat) -> Result<()> {
        match format {
            CorpusFormat::WmtTsv => write_wmt_tsv(self, path),
            CorpusFormat::Jsonl => write_jsonl(self, path),
        }
    }
}

/// Returns the kind shared by all judgments, erroring if more than one appears.
pub fn single_kind(judgments: &[Judgment]) -> Result<Option<JudgmentKind>> {
    let mut kind = None;
    for j in judgments {
        match kind {
            None => kind = Some(j.kind),
            Some(k) if k != j.kind => {
                return Err(Error::MixedKinds(k.to_string(), j.kind.to_string()));
            }
            Some(_) => {}
        }
    }
    Ok(kind)
}

/// Collapses judgments into one human score per (segment, system).
///
/// Uncategorized and `overall` judgments are averaged. A cell that only has
/// per-category MQM judgments gets their sum, the total (negated) penalty.
/// Values are summed in sorted order so the result does not depend on row
/// order.
pub fn overall_scores(judgments: &[Judgment]) -> BTreeMap<(String, String), f64> {
    let mut overall: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    let mut by_category: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for j in judgments {
        let key = (j.segment_id.clone(), j.system_id.clone());
        if j.is_overall() {
            overall.entry(key).or_default().push(j.score);
        } else {
            by_category.entry(key).or_default().push(j.score);
        }
    }
    let sorted_sum = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.iter().sum::<f64>()
    };
    let mut out = BTreeMap::new();
    for (key, v) in by_category {
        out.insert(key, sorted_sum(v));
    }
    for (key, v) in overall {
        let n = v.len() as f64;
        out.insert(key, sorted_sum(v) / n);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    WmtTsv,
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wmt_tsv" | "wmt-tsv" | "tsv" => Ok(CorpusFormat::WmtTsv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::InvalidArgument(format!("unknown corpus format {other:?}"))),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::WmtTsv => "wmt_tsv",
            CorpusFormat::Jsonl => "jsonl",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub source_policy: TokenPolicy,
    pub target_policy: TokenPolicy,
    /// Overrides the language pair inferred from the file or directory name.
    pub language_pair: Option<LanguagePair>,
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus> {
    load_corpus_with(path, format, &LoadOptions::default())
}

pub fn load_corpus_with(path: &Path, format: CorpusFormat, opts: &LoadOptions) -> Result<Corpus> {
    let language_pair = opts.language_pair.clone().unwrap_or_else(|| {
        path.file_stem()
            .and_then(|s| s.to_str())
            .and_then(LanguagePair::from_name)
            .unwrap_or_else(LanguagePair::undetermined)
    });
    let (instances, judgments) = match format {
        CorpusFormat::WmtTsv => read_wmt_tsv(path, opts)?,
        CorpusFormat::Jsonl => read_jsonl(path, opts)?,
    };
    Corpus::new(language_pair, instances, judgments)
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Data rows of a headered TSV file as (line number, fields).
fn tsv_rows<'a>(path: &Path, content: &'a str, header: &[&str]) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((n, first)) = lines.next() else {
        return Ok(Vec::new());
    };
    let got: Vec<&str> = first.split('\t').collect();
    if got != header {
        return Err(Error::parse(
            path,
            n,
            format!("expected header {:?}, found {:?}", header.join("\t"), first),
        ));
    }
    lines
        .map(|(n, l)| {
            let fields: Vec<&str> = l.split('\t').collect();
            if fields.len() != header.len() {
                Err(Error::parse(
                    path,
                    n,
                    format!("expected {} tab-separated fields, found {}", header.len(), fields.len()),
                ))
            } else {
                Ok((n, fields))
            }
        })
        .collect()
}

fn parse_score(path: &Path, line: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("invalid score {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(path, line, format!("non-finite score {s:?}")));
    }
    Ok(v)
}

fn oriented(kind: JudgmentKind, score: f64) -> f64 {
    match kind {
        JudgmentKind::Mqm => -score,
        _ => score,
    }
}

fn read_wmt_tsv(dir: &Path, opts: &LoadOptions) -> Result<(Vec<EvalInstance>, Vec<Judgment>)> {
    let seg_path = dir.join(SEGMENTS_FILE);
    let seg_content = read_file(&seg_path)?;
    let mut instances: Vec<EvalInstance> = Vec::new();
    let mut seg_index: HashMap<String, usize> = HashMap::new();
    for (n, f) in tsv_rows(&seg_path, &seg_content, &SEGMENTS_HEADER)? {
        let id = f[0].to_owned();
        if id.is_empty() {
            return Err(Error::parse(&seg_path, n, "empty segment id"));
        }
        if seg_index.contains_key(&id) {
            return Err(Error::invariant("duplicate segment ids", vec![id]));
        }
        seg_index.insert(id.clone(), instances.len());
        instances.push(EvalInstance {
            segment_id: id,
            source: Text::new(f[1], opts.source_policy),
            reference: (!f[2].is_empty()).then(|| Text::new(f[2], opts.target_policy)),
            hypotheses: BTreeMap::new(),
        });
    }
    if instances.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let out_path = dir.join(OUTPUTS_FILE);
    let out_content = read_file(&out_path)?;
    let mut unknown = BTreeSet::new();
    for (n, f) in tsv_rows(&out_path, &out_content, &OUTPUTS_HEADER)? {
        let Some(&i) = seg_index.get(f[0]) else {
            unknown.insert(f[0].to_owned());
            continue;
        };
        if f[1].is_empty() {
            return Err(Error::parse(&out_path, n, "empty system id"));
        }
        let text = Text::new(f[2], opts.target_policy);
        if instances[i].hypotheses.insert(f[1].to_owned(), text).is_some() {
            return Err(Error::parse(
                &out_path,
                n,
                format!("duplicate output for segment {} system {}", f[0], f[1]),
            ));
        }
    }
    if !unknown.is_empty() {
        return Err(Error::invariant(
            "outputs reference unknown segments",
            unknown.into_iter().collect(),
        ));
    }

    let jud_path = dir.join(JUDGMENTS_FILE);
    let mut judgments = Vec::new();
    if jud_path.exists() {
        let jud_content = read_file(&jud_path)?;
        for (n, f) in tsv_rows(&jud_path, &jud_content, &JUDGMENTS_HEADER)? {
            let kind: JudgmentKind = f[3]
                .parse()
                .map_err(|e: Error| Error::parse(&jud_path, n, e.to_string()))?;
            let category = if f[4].is_empty() {
                None
            } else {
                Some(
                    f[4].parse::<ErrorCategory>()
                        .map_err(|e| Error::parse(&jud_path, n, e.to_string()))?,
                )
            };
            let score = parse_score(&jud_path, n, f[2])?;
            judgments.push(Judgment {
                segment_id: f[0].to_owned(),
                system_id: f[1].to_owned(),
                score: oriented(kind, score),
                kind,
                category,
            });
        }
    }
    Ok((instances, judgments))
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonInstance {
    segment_id: String,
    source: String,
    reference: Option<String>,
    hypotheses: BTreeMap<String, String>,
    #[serde(default)]
    judgments: Vec<JsonJudgment>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonJudgment {
    system: String,
    score: f64,
    kind: JudgmentKind,
    category: Option<ErrorCategory>,
}

fn read_jsonl(path: &Path, opts: &LoadOptions) -> Result<(Vec<EvalInstance>, Vec<Judgment>)> {
    let content = read_file(path)?;
    let mut instances = Vec::new();
    let mut judgments = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let obj: JsonInstance = serde_json::from_str(line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        for j in obj.judgments {
            if !j.score.is_finite() {
                return Err(Error::parse(path, i + 1, "non-finite score"));
            }
            judgments.push(Judgment {
                segment_id: obj.segment_id.clone(),
                system_id: j.system,
                score: oriented(j.kind, j.score),
                kind: j.kind,
                category: j.category,
            });
        }
        instances.push(EvalInstance {
            source: Text::new(obj.source, opts.source_policy),
            reference: obj
                .reference
                .filter(|r| !r.is_empty())
                .map(|r| Text::new(r, opts.target_policy)),
            hypotheses: obj
                .hypotheses
                .into_iter()
                .map(|(k, v)| (k, Text::new(v, opts.target_policy)))
                .collect(),
            segment_id: obj.segment_id,
        });
    }
    if instances.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok((instances, judgments))
}

fn check_field(field: &str, what: &str) -> Result<()> {
    if field.contains(['\t', '\n', '\r']) {
        Err(Error::InvalidArgument(format!(
            "{what} contains a tab or newline and cannot be written as TSV: {field:?}"
        )))
    } else {
        Ok(())
    }
}

fn write_wmt_tsv(corpus: &Corpus, dir: &Path) -> Result<()> {
    let files = corpus.to_wmt_tsv_files()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, body) in files {
        let p: PathBuf = dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

fn wmt_tsv_files(corpus: &Corpus) -> Result<Vec<(&'static str, String)>> {
    let mut seg = SEGMENTS_HEADER.join("\t") + "\n";
    let mut out = OUTPUTS_HEADER.join("\t") + "\n";
    for inst in &corpus.instances {
        let reference = inst.reference.as_ref().map(Text::raw).unwrap_or("");
        for f in [inst.segment_id.as_str(), inst.source.raw(), reference] {
            check_field(f, "segment field")?;
        }
        seg.push_str(&format!("{}\t{}\t{}\n", inst.segment_id, inst.source.raw(), reference));
        for (sys, hyp) in &inst.hypotheses {
            check_field(sys, "system id")?;
            check_field(hyp.raw(), "hypothesis")?;
            out.push_str(&format!("{}\t{}\t{}\n", inst.segment_id, sys, hyp.raw()));
        }
    }
    let mut jud = JUDGMENTS_HEADER.join("\t") + "\n";
    for j in &corpus.judgments {
        jud.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            j.segment_id,
            j.system_id,
            oriented(j.kind, j.score),
            j.kind,
            j.category.map(|c| c.as_str()).unwrap_or("")
        ));
    }
    Ok(vec![(SEGMENTS_FILE, seg), (OUTPUTS_FILE, out), (JUDGMENTS_FILE, jud)])
}

fn write_jsonl(corpus: &Corpus, path: &Path) -> Result<()> {
    let body = corpus.to_jsonl()?;
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn jsonl_string(corpus: &Corpus) -> Result<String> {
    let mut by_segment: HashMap<&str, Vec<JsonJudgment>> = HashMap::new();
    for j in &corpus.judgments {
        by_segment.entry(&j.segment_id).or_default().push(JsonJudgment {
            system: j.system_id.clone(),
            score: oriented(j.kind, j.score),
            kind: j.kind,
            category: j.category,
        });
    }
    let mut body = String::new();
    for inst in &corpus.instances {
        let obj = JsonInstance {
            segment_id: inst.segment_id.clone(),
            source: inst.source.raw().to_owned(),
            reference: inst.reference.as_ref().map(|r| r.raw().to_owned()),
            hypotheses: inst
                .hypotheses
                .iter()
                .map(|(k, v)| (k.clone(), v.raw().to_owned()))
                .collect(),
            judgments: by_segment.remove(inst.segment_id.as_str()).unwrap_or_default(),
        };
        body.push_str(&serde_json::to_string(&obj).map_err(|e| Error::Numeric(e.to_string()))?);
        body.push('\n');
    }
    Ok(body)
}

/// One (input, output) example for generative training. Both sides are non-empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelPair {
    pub input: Text,
    pub output: Text,
}

impl ParallelPair {
    pub fn new(input: Text, output: Text) -> Option<Self> {
        (!input.is_empty() && !output.is_empty()).then_some(ParallelPair { input, output })
    }
}

#[derive(Debug, Clone)]
pub struct ParallelData {
    pub pairs: Vec<ParallelPair>,
    /// Lines dropped because one side was empty.
    pub skipped: usize,
}

pub fn load_parallel(path: &Path) -> Result<ParallelData> {
    load_parallel_with(path, TokenPolicy::Whitespace, TokenPolicy::Whitespace)
}

pub fn load_parallel_with(path: &Path, input_policy: TokenPolicy, output_policy: TokenPolicy) -> Result<ParallelData> {
    let content = read_file(path)?;
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for (i, line) in content.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected input<TAB>output, found {} fields", fields.len()),
            ));
        }
        let pair = ParallelPair::new(Text::new(fields[0], input_policy), Text::new(fields[1], output_policy));
        match pair {
            Some(p) => pairs.push(p),
            None => skipped += 1,
        }
    }
    if pairs.is_empty() {
        return Err(Error::AllLinesSkipped {
            path: path.to_owned(),
            skipped,
        });
    }
    Ok(ParallelData { pairs, skipped })
}

pub fn write_parallel(pairs: &[ParallelPair], path: &Path) -> Result<()> {
    let body = parallel_to_tsv(pairs)?;
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// `input TAB output` lines, as read by [`load_parallel`].
pub fn parallel_to_tsv(pairs: &[ParallelPair]) -> Result<String> {
    let mut body = String::new();
    for p in pairs {
        check_field(p.input.raw(), "parallel input")?;
        check_field(p.output.raw(), "parallel output")?;
        body.push_str(p.input.raw());
        body.push('\t');
        body.push_str(p.output.raw());
        body.push('\n');
    }
    Ok(body)
}
