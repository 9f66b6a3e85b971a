//! Single-file model format.
//!
//! ```text
//! METRICFORGE-LM v1 <backend>
//! [params]
//! key<TAB>value
//! [vocab]
//! <unk>
//! token
//! [counts]                      (ngram_copy)
//! ctx tokens<TAB>token<TAB>count
//! [weights]                     (log_linear, non-zero entries only)
//! unigram<TAB>token<TAB>value
//! copy<TAB>*<TAB>value
//! bigram<TAB>prev token<TAB>value
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so a save/load
//! cycle reproduces every weight bit for bit.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::ngram::ContextCounts;
use super::{
    LogLinearLm, Model, NGramCopyLm, NGramParams, TokenId, UniformLm, Vocab, BOS, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN,
};
use crate::error::{Error, Result};

pub const HEADER_MAGIC: &str = "METRICFORGE-LM v1";

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&s)
}

pub fn model_to_string(model: &Model) -> String {
    let mut out = format!("{HEADER_MAGIC} {}\n", model.backend_name());
    match model {
        Model::Uniform(m) => {
            out.push_str("[params]\n");
            let _ = writeln!(out, "vocab_size\t{}", super::ConditionalLm::vocab(m).size());
        }
        Model::NGramCopy(m) => {
            let p = m.params();
            let vocab = super::ConditionalLm::vocab(m);
            out.push_str("[params]\n");
            let _ = writeln!(out, "order\t{}", p.order);
            let _ = writeln!(out, "lambda\t{}", p.lambda);
            let _ = writeln!(out, "addk\t{}", p.addk);
            write_vocab(&mut out, vocab);
            out.push_str("[counts]\n");
            for (ctx, cc) in m.counts() {
                let ctx_str: Vec<&str> = ctx.iter().map(|&t| vocab.token(t)).collect();
                for (&next, &n) in &cc.next {
                    let _ = writeln!(out, "{}\t{}\t{}", ctx_str.join(" "), vocab.token(next), n);
                }
            }
        }
        Model::LogLinear(m) => {
            let vocab = super::ConditionalLm::vocab(m);
            write_vocab(&mut out, vocab);
            out.push_str("[weights]\n");
            let w = m.weights();
            let o = vocab.n_outcomes() as TokenId;
            for t in 0..o {
                let v = w[m.unigram_feature(t)];
                if v != 0.0 {
                    let _ = writeln!(out, "unigram\t{}\t{}", vocab.token(t), v);
                }
            }
            let c = w[m.copy_feature()];
            if c != 0.0 {
                let _ = writeln!(out, "copy\t*\t{c}");
            }
            let prevs = std::iter::once(BOS).chain(0..vocab.size() as TokenId);
            for prev in prevs {
                for t in 0..o {
                    let v = w[m.bigram_feature(prev, t)];
                    if v != 0.0 {
                        let _ = writeln!(out, "bigram\t{} {}\t{}", vocab.token(prev), vocab.token(t), v);
                    }
                }
            }
        }
    }
    out
}

fn write_vocab(out: &mut String, vocab: &Vocab) {
    out.push_str("[vocab]\n");
    for t in vocab.tokens() {
        out.push_str(t);
        out.push('\n');
    }
}

fn fmt_err(line: usize, message: impl Into<String>) -> Error {
    Error::ModelFormat {
        line,
        message: message.into(),
    }
}

struct Sections<'a> {
    params: Vec<(usize, &'a str)>,
    vocab: Vec<(usize, &'a str)>,
    counts: Vec<(usize, &'a str)>,
    weights: Vec<(usize, &'a str)>,
}

pub fn parse_model(s: &str) -> Result<Model> {
    let mut lines = s.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| fmt_err(1, "empty model file"))?;
    let backend = header
        .strip_prefix(HEADER_MAGIC)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| fmt_err(1, format!("expected header {HEADER_MAGIC:?}, found {header:?}")))?;

    let mut sections = Sections {
        params: Vec::new(),
        vocab: Vec::new(),
        counts: Vec::new(),
        weights: Vec::new(),
    };
    let mut current: Option<&str> = None;
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            current = Some(&line[1..line.len() - 1]);
            continue;
        }
        let bucket = match current {
            Some("params") => &mut sections.params,
            Some("vocab") => &mut sections.vocab,
            Some("counts") => &mut sections.counts,
            Some("weights") => &mut sections.weights,
            Some(other) => return Err(fmt_err(n, format!("unknown section [{other}]"))),
            None => return Err(fmt_err(n, "content before first section")),
        };
        bucket.push((n, line));
    }

    match backend {
        UniformLm::BACKEND => {
            let params = parse_params(&sections.params)?;
            let size: usize = get_param(&params, "vocab_size")?;
            if size < 1 {
                return Err(fmt_err(0, "vocab_size must be >= 1"));
            }
            Ok(Model::Uniform(UniformLm::new(size)))
        }
        NGramCopyLm::BACKEND => {
            let params = parse_params(&sections.params)?;
            let p = NGramParams {
                order: get_param(&params, "order")?,
                lambda: get_param(&params, "lambda")?,
                addk: get_param(&params, "addk")?,
            };
            p.validate()?;
            let vocab = parse_vocab(&sections.vocab)?;
            let lookup_vocab = vocab.clone();
            let lookup = token_lookup(&lookup_vocab);
            let mut counts: BTreeMap<Vec<TokenId>, ContextCounts> = BTreeMap::new();
            for &(n, line) in &sections.counts {
                let f: Vec<&str> = line.split('\t').collect();
                if f.len() != 3 {
                    return Err(fmt_err(n, "expected context<TAB>token<TAB>count"));
                }
                let ctx: Vec<TokenId> = f[0]
                    .split(' ')
                    .filter(|s| !s.is_empty())
                    .map(|t| lookup(n, t, true))
                    .collect::<Result<_>>()?;
                if ctx.len() != p.order - 1 {
                    return Err(fmt_err(n, format!("context length {} != order - 1", ctx.len())));
                }
                let next = lookup(n, f[1], false)?;
                let c: u64 = f[2].parse().map_err(|_| fmt_err(n, "invalid count"))?;
                let entry = counts.entry(ctx).or_default();
                entry.total += c;
                if entry.next.insert(next, c).is_some() {
                    return Err(fmt_err(n, "duplicate n-gram"));
                }
            }
            Ok(Model::NGramCopy(NGramCopyLm::from_parts(p, vocab, counts)?))
        }
        LogLinearLm::BACKEND => {
            let vocab = parse_vocab(&sections.vocab)?;
            let lookup = token_lookup(&vocab);
            let mut m = LogLinearLm::zeros(vocab.clone());
            for &(n, line) in &sections.weights {
                let f: Vec<&str> = line.split('\t').collect();
                if f.len() != 3 {
                    return Err(fmt_err(n, "expected kind<TAB>key<TAB>value"));
                }
                let v: f64 = f[2].parse().map_err(|_| fmt_err(n, "invalid weight"))?;
                if !v.is_finite() {
                    return Err(fmt_err(n, "non-finite weight"));
                }
                let idx = match f[0] {
                    "unigram" => m.unigram_feature(lookup(n, f[1], false)?),
                    "copy" => m.copy_feature(),
                    "bigram" => {
                        let (prev, next) = f[1]
                            .split_once(' ')
                            .ok_or_else(|| fmt_err(n, "bigram key must be 'prev next'"))?;
                        m.bigram_feature(lookup(n, prev, true)?, lookup(n, next, false)?)
                    }
                    other => return Err(fmt_err(n, format!("unknown weight kind {other:?}"))),
                };
                m.weights_mut()[idx] = v;
            }
            Ok(Model::LogLinear(m))
        }
        other => Err(fmt_err(1, format!("unknown backend {other:?}"))),
    }
}

fn parse_params<'a>(lines: &[(usize, &'a str)]) -> Result<HashMap<&'a str, (usize, &'a str)>> {
    lines
        .iter()
        .map(|&(n, l)| {
            l.split_once('\t')
                .map(|(k, v)| (k, (n, v)))
                .ok_or_else(|| fmt_err(n, "expected key<TAB>value"))
        })
        .collect()
}

fn get_param<T: std::str::FromStr>(params: &HashMap<&str, (usize, &str)>, key: &str) -> Result<T> {
    let &(n, v) = params
        .get(key)
        .ok_or_else(|| fmt_err(0, format!("missing parameter {key}")))?;
    v.parse()
        .map_err(|_| fmt_err(n, format!("invalid value for {key}: {v:?}")))
}

fn parse_vocab(lines: &[(usize, &str)]) -> Result<Vocab> {
    let tokens: Vec<String> = lines.iter().map(|&(_, l)| l.to_owned()).collect();
    match tokens.first() {
        Some(t) if t == UNK_TOKEN => {}
        _ => {
            return Err(fmt_err(
                lines.first().map_or(0, |l| l.0),
                "vocabulary must start with <unk>",
            ))
        }
    }
    let mut seen = std::collections::HashSet::new();
    for (i, t) in tokens.iter().enumerate() {
        if !seen.insert(t) || (i > 0 && matches!(t.as_str(), UNK_TOKEN | BOS_TOKEN | EOS_TOKEN)) {
            return Err(fmt_err(lines[i].0, format!("duplicate or reserved token {t:?}")));
        }
    }
    Ok(Vocab::from_ordered(tokens))
}

fn token_lookup(vocab: &Vocab) -> impl Fn(usize, &str, bool) -> Result<TokenId> + '_ {
    move |line, tok, allow_bos| match tok {
        BOS_TOKEN if allow_bos => Ok(BOS),
        EOS_TOKEN if !allow_bos => Ok(vocab.eos()),
        BOS_TOKEN | EOS_TOKEN => Err(fmt_err(line, format!("{tok} not allowed here"))),
        _ => vocab
            .index
            .get(tok)
            .copied()
            .ok_or_else(|| fmt_err(line, format!("token {tok:?} not in vocabulary"))),
    }
}
