use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use metricforge::corpus::{load_parallel, parallel_to_tsv, Corpus, CorpusFormat, ErrorCategory, ParallelPair};
use metricforge::lm::{load_model, model_to_string, LogLinearLm, Model, NGramParams, Vocab};
use metricforge::metaeval::{
    bootstrap_significance, category_rmse, seg_kendall, system_correlations, top_k_filter, ResultRow,
    SignificanceMatrix, Stat, Statistic,
};
use metricforge::plot::{line_chart, Series};
use metricforge::report::{ReportColumn, ReportTable};
use metricforge::scoring::{score_corpus, score_corpus_bleu, EvalMode, ScoreMatrix};
use metricforge::synth::{synthesize_corpus, synthesize_parallel};
use metricforge::training::{
    augment_directions, build_rank_pairs, fit_discriminative, fit_generative, fit_loglinear_nll, pair_accuracy,
    Backend, LossTrace, RankPair, TrainConfig,
};
use metricforge::Text;

use crate::output::Outputs;
use crate::settings::Settings;
use crate::{CliError, CliResult};

pub const MODEL_FILE: &str = "model.lm";
pub const GEN_TRACE_FILE: &str = "gen_trace.csv";
pub const DIS_TRACE_FILE: &str = "dis_trace.csv";
pub const HELDOUT_FILE: &str = "heldout.tsv";
pub const SCORES_FILE: &str = "scores.tsv";
pub const PARALLEL_FILE: &str = "parallel.tsv";
pub const QUALITY_FILE: &str = "quality.tsv";
pub const REPORT_MD: &str = "report.md";
pub const REPORT_TSV: &str = "report.tsv";
pub const RESULTS_FILE: &str = "results.tsv";
pub const PLOT_FILE: &str = "topk.svg";

pub fn synth(s: &Settings, seed: u64) -> CliResult<Outputs> {
    let syn = synthesize_corpus(seed, s.get("segments")?, s.get("systems")?, s.get("noise")?)?;
    let mut out = Outputs::default();
    let lp = syn.corpus.language_pair().to_string();
    match s
        .get::<CorpusFormat>("format")
        .map_err(|_| CliError::Usage(format!("invalid format {:?}", s.raw("format"))))?
    {
        CorpusFormat::WmtTsv => {
            for (name, body) in syn.corpus.to_wmt_tsv_files()? {
                out.add(format!("{lp}/{name}"), body);
            }
        }
        CorpusFormat::Jsonl => out.add(format!("{lp}.jsonl"), syn.corpus.to_jsonl()?),
    }
    let n_parallel: usize = s.get("parallel")?;
    if n_parallel > 0 {
        out.add(PARALLEL_FILE, parallel_to_tsv(&synthesize_parallel(seed, n_parallel)?)?);
    }
    let mut q = String::from("system_id\tquality\n");
    for (sys, v) in &syn.quality {
        let _ = writeln!(q, "{sys}\t{v}");
    }
    out.add(QUALITY_FILE, q);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Gen,
    Dis,
    Both,
}

fn parse_stage(v: &str) -> CliResult<Stage> {
    match v {
        "gen" => Ok(Stage::Gen),
        "dis" => Ok(Stage::Dis),
        "both" => Ok(Stage::Both),
        other => Err(CliError::Usage(format!(
            "stage must be gen, dis or both, got {other:?}"
        ))),
    }
}

fn parse_backend(s: &Settings) -> CliResult<Backend> {
    match s.raw("backend") {
        "ngram" | "ngram_copy" => Ok(Backend::NGramCopy(NGramParams {
            order: s.get("order")?,
            lambda: s.get("lambda")?,
            addk: s.get("addk")?,
        })),
        "log_linear" | "loglinear" => Ok(Backend::LogLinear),
        other => Err(CliError::Usage(format!(
            "backend must be ngram or log_linear, got {other:?}"
        ))),
    }
}

/// Segment ids held out from training: the last `n` in corpus order.
fn heldout_ids(corpus: &Corpus, n: usize) -> CliResult<BTreeSet<String>> {
    let inst = corpus.instances();
    if n >= inst.len() && n > 0 {
        return Err(CliError::Usage(format!(
            "heldout_segments {n} leaves no training segments out of {}",
            inst.len()
        )));
    }
    Ok(inst[inst.len() - n..].iter().map(|i| i.segment_id.clone()).collect())
}

/// Model file, loss traces and (optionally) held-out pair accuracy.
pub fn train(s: &Settings, seed: u64) -> CliResult<Outputs> {
    let stage = parse_stage(s.raw("stage"))?;
    let backend = parse_backend(s)?;
    let mode: EvalMode = s.get("mode")?;
    if stage != Stage::Gen && backend != Backend::LogLinear {
        return Err(CliError::Usage(
            "discriminative training needs the log_linear backend".into(),
        ));
    }
    let parallel: Option<Vec<ParallelPair>> = match s.path("parallel") {
        Some(p) => Some(load_parallel(&p)?.pairs),
        None => None,
    };
    if stage != Stage::Dis && parallel.is_none() {
        return Err(CliError::Usage("generative training needs --parallel".into()));
    }
    let corpus = s.load_corpus()?;
    if stage != Stage::Gen && corpus.is_none() {
        return Err(CliError::Usage("discriminative training needs --corpus".into()));
    }
    let n_heldout: usize = s.get("heldout_segments")?;

    // rank pairs, split into training and held-out segments
    let (train_pairs, heldout_pairs, train_texts) = match &corpus {
        Some(c) => {
            let held = heldout_ids(c, n_heldout)?;
            let needs_pairs = stage != Stage::Gen || n_heldout > 0;
            if needs_pairs && c.judgments().is_empty() {
                return Err(CliError::Data(
                    "corpus has no human judgments to build rank pairs from".into(),
                ));
            }
            let pairs = build_rank_pairs(c, s.get("threshold")?, s.opt("max_pairs_per_segment")?, seed)?;
            let (h, t): (Vec<RankPair>, Vec<RankPair>) = pairs.into_iter().partition(|p| held.contains(&p.segment_id));
            let texts: Vec<Text> = c
                .instances()
                .iter()
                .filter(|i| !held.contains(&i.segment_id))
                .flat_map(|i| {
                    std::iter::once(i.source.clone())
                        .chain(i.reference.clone())
                        .chain(i.hypotheses.values().cloned())
                })
                .collect();
            (t, h, texts)
        }
        None => (Vec::new(), Vec::new(), Vec::new()),
    };

    let mut gen_cfg = TrainConfig::generative();
    gen_cfg.learning_rate = s.get("gen_learning_rate")?;
    gen_cfg.max_steps = s.get("gen_max_steps")?;
    gen_cfg.seed = seed;
    gen_cfg.mode = mode;
    let mut dis_cfg = TrainConfig::discriminative();
    dis_cfg.learning_rate = s.get("dis_learning_rate")?;
    dis_cfg.max_steps = s.get("dis_max_steps")?;
    dis_cfg.alpha = s.get("alpha")?;
    dis_cfg.seed = seed;
    dis_cfg.mode = mode;

    let mut out = Outputs::default();
    let model: Model = match backend {
        Backend::NGramCopy(_) => {
            let (m, trace) = fit_generative(backend, parallel.as_deref().unwrap_or_default(), &gen_cfg)?;
            out.add(crate::commands::GEN_TRACE_FILE, trace.to_csv());
            m
        }
        Backend::LogLinear => {
            let vocab = Vocab::from_texts(
                parallel
                    .iter()
                    .flatten()
                    .flat_map(|p| [&p.input, &p.output])
                    .chain(train_texts.iter()),
            );
            let mut m = LogLinearLm::zeros(vocab);
            if let Some(pairs) = &parallel {
                if stage != Stage::Dis {
                    let (trained, trace) = fit_loglinear_nll(m, pairs, &gen_cfg)?;
                    out.add(GEN_TRACE_FILE, trace.to_csv());
                    m = trained;
                }
            }
            if stage != Stage::Gen {
                let examples = augment_directions(&train_pairs, mode, dis_cfg.alpha)?;
                if examples.is_empty() {
                    return Err(metricforge::Error::EmptyPairs.into());
                }
                let (trained, trace): (LogLinearLm, LossTrace) = fit_discriminative(m, &examples, &dis_cfg)?;
                out.add(DIS_TRACE_FILE, trace.to_csv());
                m = trained;
            }
            Model::LogLinear(m)
        }
    };
    if n_heldout > 0 {
        let acc = pair_accuracy(&model, &heldout_pairs, mode)?;
        out.add(
            HELDOUT_FILE,
            format!("pairs\taccuracy\n{}\t{acc}\n", heldout_pairs.len()),
        );
    }
    out.add(MODEL_FILE, model_to_string(&model));
    Ok(out)
}

/// Reads the accuracy written by [`train`] into `heldout.tsv`.
pub fn heldout_accuracy(out: &Outputs) -> Option<f64> {
    out.text(HELDOUT_FILE)?.lines().nth(1)?.split('\t').nth(1)?.parse().ok()
}

pub fn score(s: &Settings, _seed: u64) -> CliResult<Outputs> {
    let model = load_model(&s.require_path("model")?)?;
    let corpus = s
        .load_corpus()?
        .ok_or_else(|| CliError::Usage("score needs --corpus".into()))?;
    let mode: EvalMode = s.get("mode")?;
    let name = s.raw("name");
    if name.is_empty() || name.contains(['\t', '\n']) {
        return Err(CliError::Usage(format!("invalid metric name {name:?}")));
    }
    let mut scores = score_corpus(&model, &corpus, mode, name)?;
    match s.raw("baseline") {
        "none" | "" => {}
        "sentbleu" => scores.merge(score_corpus_bleu(&corpus, "sentbleu")?)?,
        other => return Err(CliError::Usage(format!("unknown baseline {other:?}"))),
    }
    let mut out = Outputs::default();
    out.add(SCORES_FILE, scores.to_tsv());
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalStat {
    SegK,
    SysP,
    SysK,
    Rmse,
}

impl EvalStat {
    pub fn name(self) -> &'static str {
        match self {
            EvalStat::SegK => "seg-k",
            EvalStat::SysP => "sys-p",
            EvalStat::SysK => "sys-k",
            EvalStat::Rmse => "rmse",
        }
    }

    fn bootstrap(self) -> Option<Statistic> {
        match self {
            EvalStat::SegK => Some(Statistic::SegK),
            EvalStat::SysP => Some(Statistic::SysP),
            EvalStat::SysK => Some(Statistic::SysK),
            EvalStat::Rmse => None,
        }
    }
}

pub fn parse_stats(v: &str) -> CliResult<Vec<EvalStat>> {
    Ok(match v {
        "all" => vec![EvalStat::SegK, EvalStat::SysP, EvalStat::SysK, EvalStat::Rmse],
        "seg-k" | "seg_k" => vec![EvalStat::SegK],
        "sys-p" | "sys_p" => vec![EvalStat::SysP],
        "sys-k" | "sys_k" => vec![EvalStat::SysK],
        "rmse" => vec![EvalStat::Rmse],
        other => return Err(CliError::Usage(format!("unknown statistic {other:?}"))),
    })
}

/// One statistic for one metric, with its unit count.
pub fn compute_stat(
    stat: EvalStat,
    corpus: &Corpus,
    scores: &ScoreMatrix,
    metric: &str,
    pairs: &[RankPair],
    category: ErrorCategory,
) -> CliResult<(Stat, usize)> {
    Ok(match stat {
        EvalStat::SegK => {
            let r = seg_kendall(scores, metric, pairs)?;
            (Stat::Value(r.tau), r.concordant + r.discordant)
        }
        EvalStat::SysP => {
            let r = system_correlations(scores, metric, corpus.judgments())?;
            (r.pearson, r.n_systems)
        }
        EvalStat::SysK => {
            let r = system_correlations(scores, metric, corpus.judgments())?;
            (r.kendall, r.n_systems)
        }
        EvalStat::Rmse => {
            let r = category_rmse(scores, metric, corpus.judgments(), category)?;
            (r.rmse, r.n)
        }
    })
}

pub fn evaluate(s: &Settings, seed: u64) -> CliResult<Outputs> {
    let corpus = s
        .load_corpus()?
        .ok_or_else(|| CliError::Usage("evaluate needs --corpus".into()))?;
    let score_paths = s.list("scores");
    if score_paths.is_empty() {
        return Err(CliError::Usage("evaluate needs at least one --scores file".into()));
    }
    let mut scores = ScoreMatrix::new();
    for p in &score_paths {
        scores.merge(ScoreMatrix::load(std::path::Path::new(p))?)?;
    }
    let metrics: Vec<String> = match s.list("metrics") {
        m if m.is_empty() => scores.metrics().into_iter().collect(),
        m => m,
    };
    let stats = parse_stats(s.raw("stat"))?;
    let category: ErrorCategory = s.get("category")?;
    let threshold: f64 = s.get("threshold")?;
    let iterations: usize = s.get("significance")?;
    if iterations > 0 && iterations < 100 {
        return Err(CliError::Usage(format!(
            "significance needs at least 100 iterations, got {iterations}"
        )));
    }
    if iterations > 0 && metrics.len() < 2 {
        return Err(CliError::Usage("significance needs at least two metrics".into()));
    }
    let unsupervised: BTreeSet<String> = s.list("unsupervised").into_iter().collect();

    let (corpus, scores) = match s.opt::<usize>("top_k")? {
        Some(k) => top_k_filter(&corpus, &scores, k)?,
        None => (corpus, scores),
    };
    let pairs = build_rank_pairs(&corpus, threshold, None, seed)?;
    let lp = corpus.language_pair().to_string();

    let mut columns = Vec::new();
    let mut rows = Vec::new();
    let mut out = Outputs::default();
    for &stat in &stats {
        let mut values = Vec::with_capacity(metrics.len());
        for m in &metrics {
            let (v, n) = compute_stat(stat, &corpus, &scores, m, &pairs, category)?;
            values.push(v);
            rows.push(ResultRow {
                metric: m.clone(),
                statistic: stat.name().to_owned(),
                key: if stat == EvalStat::Rmse {
                    category.to_string()
                } else {
                    lp.clone()
                },
                value: v,
                n,
            });
        }
        let significance: Option<SignificanceMatrix> = match stat.bootstrap() {
            Some(b) if iterations > 0 => {
                let sig = bootstrap_significance(&scores, &metrics, &pairs, corpus.judgments(), iterations, seed, b)?;
                out.add(format!("significance_{}.tsv", stat.name()), sig.to_tsv());
                Some(sig)
            }
            _ => None,
        };
        columns.push(ReportColumn {
            name: if stat == EvalStat::Rmse {
                format!("rmse:{category}")
            } else {
                stat.name().to_owned()
            },
            lower_is_better: stat == EvalStat::Rmse,
            values,
            significance,
        });
    }
    let table = ReportTable::build(metrics.clone(), columns, &unsupervised)?;
    out.add(REPORT_MD, table.to_markdown());
    out.add(REPORT_TSV, table.to_tsv());
    let mut results = String::from(ResultRow::HEADER);
    results.push('\n');
    for r in &rows {
        results.push_str(&r.to_tsv_line());
        results.push('\n');
    }
    out.add(RESULTS_FILE, results);

    if s.flag("plot")? {
        out.add(
            PLOT_FILE,
            top_k_plot(&corpus, &scores, &metrics, stats[0], threshold, category, seed)?,
        );
    }
    Ok(out)
}

/// Statistic against the number of top systems kept, from 2 up to all.
fn top_k_plot(
    corpus: &Corpus,
    scores: &ScoreMatrix,
    metrics: &[String],
    stat: EvalStat,
    threshold: f64,
    category: ErrorCategory,
    seed: u64,
) -> CliResult<String> {
    let n = corpus.systems().len();
    let mut series: BTreeMap<&String, Vec<(f64, f64)>> = metrics.iter().map(|m| (m, Vec::new())).collect();
    for k in 2..=n {
        let (c, sc) = top_k_filter(corpus, scores, k)?;
        let pairs = build_rank_pairs(&c, threshold, None, seed)?;
        for m in metrics {
            // undefined points (too few pairs, constant vectors) are left out
            let v = compute_stat(stat, &c, &sc, m, &pairs, category)
                .ok()
                .and_then(|(v, _)| v.value())
                .unwrap_or(f64::NAN);
            series.get_mut(m).expect("all metrics present").push((k as f64, v));
        }
    }
    let series: Vec<Series> = series
        .into_iter()
        .map(|(m, points)| Series {
            name: m.clone(),
            points,
        })
        .collect();
    Ok(line_chart(
        &format!("{} by top-k systems", stat.name()),
        "k",
        stat.name(),
        &series,
    ))
}
