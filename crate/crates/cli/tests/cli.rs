use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use metricforge::corpus::{load_corpus, CorpusFormat};
use metricforge::lm::load_model;
use metricforge::metaeval::seg_kendall;
use metricforge::scoring::{score_corpus, EvalMode, ScoreMatrix};
use metricforge::training::build_rank_pairs;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn mf(args: &[&str], threads: Option<&str>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_metricforge"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("METRICFORGE_THREADS", t);
    }
    let o = cmd.output().expect("binary runs");
    Run {
        code: o.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
    }
}

fn ok(args: &[&str]) -> Run {
    let r = mf(args, None);
    assert_eq!(r.code, 0, "{args:?}\n{}", r.stderr);
    r
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// synth -> ngram model, on a small corpus.
struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let f = Fixture { dir };
        ok(&[
            "synth",
            "--seed",
            "3",
            "--segments",
            "20",
            "--systems",
            "4",
            "--parallel",
            "100",
            "--out",
            s(&f.p("syn")),
        ]);
        ok(&[
            "train",
            "--backend",
            "ngram",
            "--parallel",
            s(&f.p("syn/parallel.tsv")),
            "--out",
            s(&f.p("ng")),
        ]);
        f
    }

    fn p(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn corpus(&self) -> PathBuf {
        self.p("syn/xx-en")
    }

    fn score(&self, out: &str, extra: &[&str]) -> PathBuf {
        let model = self.p("ng/model.lm");
        let c = self.corpus();
        let mut args = vec!["score", "--model", s(&model), "--corpus", s(&c)];
        let o = self.p(out);
        args.extend(["--out", s(&o)]);
        args.extend(extra);
        ok(&args);
        o
    }
}

#[test]
fn score_rows_cover_every_cell_three_times() {
    let f = Fixture::new();
    let o = f.score("sc", &[]);
    let body = fs::read_to_string(o.join("scores.tsv")).unwrap();
    assert_eq!(body.lines().count(), 1 + 20 * 4 * 3);
    let m = ScoreMatrix::load(&o.join("scores.tsv")).unwrap();
    let names: BTreeSet<String> = ["t5score", "t5score.p", "t5score.r"].map(String::from).into();
    assert_eq!(m.metrics(), names);

    let b = f.score("sb", &["--baseline", "sentbleu", "--name", "x"]);
    let m = ScoreMatrix::load(&b.join("scores.tsv")).unwrap();
    assert_eq!(m.len(), 20 * 4 * 4);
    assert!(m.metrics().contains("sentbleu"));
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let f = Fixture::new();
    let mut bodies = Vec::new();
    for (i, t) in ["1", "4"].iter().enumerate() {
        let out = f.p(&format!("r{i}"));
        let r = mf(
            &[
                "score",
                "--model",
                s(&f.p("ng/model.lm")),
                "--corpus",
                s(&f.corpus()),
                "--out",
                s(&out),
            ],
            Some(t),
        );
        assert_eq!(r.code, 0, "{}", r.stderr);
        bodies.push(fs::read(out.join("scores.tsv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn reloaded_model_scores_identically() {
    let f = Fixture::new();
    let o = f.score("sc", &[]);
    let from_cli = ScoreMatrix::load(&o.join("scores.tsv")).unwrap();
    let model = load_model(&f.p("ng/model.lm")).unwrap();
    let corpus = load_corpus(&f.corpus(), CorpusFormat::WmtTsv).unwrap();
    let direct = score_corpus(&model, &corpus, EvalMode::ReferenceBased, "t5score").unwrap();
    assert_eq!(from_cli, direct);
}

fn reference_free(f: &Fixture) -> PathBuf {
    let dir = f.p("nref/yy-en");
    fs::create_dir_all(&dir).unwrap();
    let seg = fs::read_to_string(f.corpus().join("segments.tsv")).unwrap();
    let mut lines = seg.lines();
    let mut body = format!("{}\n", lines.next().unwrap());
    for l in lines {
        let cols: Vec<&str> = l.split('\t').collect();
        body += &format!("{}\t{}\t\n", cols[0], cols[1]);
    }
    fs::write(dir.join("segments.tsv"), body).unwrap();
    fs::copy(f.corpus().join("outputs.tsv"), dir.join("outputs.tsv")).unwrap();
    dir
}

#[test]
fn source_mode_scores_a_reference_free_corpus() {
    let f = Fixture::new();
    let c = reference_free(&f);
    let model = f.p("ng/model.lm");
    let out = f.p("src");
    ok(&[
        "score",
        "--model",
        s(&model),
        "--corpus",
        s(&c),
        "--mode",
        "source",
        "--out",
        s(&out),
    ]);
    let m = ScoreMatrix::load(&out.join("scores.tsv")).unwrap();
    assert_eq!(m.len(), 20 * 4 * 3);

    let bad = f.p("refmode");
    let r = mf(
        &["score", "--model", s(&model), "--corpus", s(&c), "--out", s(&bad)],
        None,
    );
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(!bad.join("scores.tsv").exists());

    // discriminative training needs judgments
    let r = mf(
        &[
            "train",
            "--stage",
            "both",
            "--parallel",
            s(&f.p("syn/parallel.tsv")),
            "--corpus",
            s(&c),
            "--mode",
            "source",
            "--out",
            s(&f.p("t")),
        ],
        None,
    );
    assert_eq!(r.code, 3, "{}", r.stderr);
}

#[test]
fn exit_codes() {
    let f = Fixture::new();
    assert_eq!(mf(&["synth", "--bogus"], None).code, 2);
    assert_eq!(mf(&["synth"], None).code, 2);
    assert_eq!(mf(&["synth", "--segments", "0", "--out", s(&f.p("z"))], None).code, 2);
    assert_eq!(
        mf(
            &[
                "score",
                "--model",
                "/nonexistent.lm",
                "--corpus",
                s(&f.corpus()),
                "--out",
                s(&f.p("z"))
            ],
            None
        )
        .code,
        3
    );
    let r = mf(
        &[
            "train",
            "--backend",
            "ngram",
            "--stage",
            "dis",
            "--corpus",
            s(&f.corpus()),
            "--out",
            s(&f.p("z")),
        ],
        None,
    );
    assert_eq!(r.code, 2);
    assert_eq!(mf(&["train", "--stage", "both", "--out", s(&f.p("z"))], None).code, 2);
    let r = mf(
        &[
            "evaluate",
            "--scores",
            s(&f.p("nope.tsv")),
            "--corpus",
            s(&f.corpus()),
            "--out",
            s(&f.p("z")),
        ],
        None,
    );
    assert_eq!(r.code, 3);
    assert!(!f.p("z").join("manifest.json").exists());
}

fn results(out: &Path) -> BTreeSet<String> {
    fs::read_to_string(out.join("results.tsv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(String::from)
        .collect()
}

#[test]
fn stat_all_is_the_union_of_single_stats() {
    let f = Fixture::new();
    let sc = f.score("sc", &["--baseline", "sentbleu"]);
    let (sc, c) = (sc.join("scores.tsv"), f.corpus());
    let base = ["evaluate", "--scores", s(&sc), "--corpus", s(&c)];
    let all = f.p("all");
    ok(&[&base[..], &["--out", s(&all)]].concat());
    let mut union = BTreeSet::new();
    for stat in ["seg-k", "sys-p", "sys-k", "rmse"] {
        let o = f.p(stat);
        ok(&[&base[..], &["--stat", stat, "--out", s(&o)]].concat());
        union.extend(results(&o));
    }
    assert_eq!(results(&all), union);
    assert_eq!(union.len(), 4 * 4);
}

#[test]
fn seg_k_row_matches_library() {
    let f = Fixture::new();
    let sc = f.score("sc", &[]);
    let out = f.p("ev");
    ok(&[
        "evaluate",
        "--scores",
        s(&sc.join("scores.tsv")),
        "--corpus",
        s(&f.corpus()),
        "--stat",
        "seg-k",
        "--metrics",
        "t5score",
        "--out",
        s(&out),
    ]);
    let corpus = load_corpus(&f.corpus(), CorpusFormat::WmtTsv).unwrap();
    let scores = ScoreMatrix::load(&sc.join("scores.tsv")).unwrap();
    let pairs = build_rank_pairs(&corpus, 25.0, None, 0).unwrap();
    let k = seg_kendall(&scores, "t5score", &pairs).unwrap();
    let rows = results(&out);
    let row = rows.iter().next().unwrap();
    let cols: Vec<&str> = row.split('\t').collect();
    assert_eq!(cols[..3], ["t5score", "seg-k", "xx-en"]);
    assert_eq!(cols[3].parse::<f64>().unwrap(), k.tau);
    assert_eq!(cols[4].parse::<usize>().unwrap(), pairs.len());
}

fn write_scores(path: &Path, rows: impl IntoIterator<Item = (String, String, &'static str, f64)>) {
    let mut m = ScoreMatrix::new();
    for (seg, sys, metric, v) in rows {
        m.insert(&seg, &sys, metric, v).unwrap();
    }
    fs::write(path, m.to_tsv()).unwrap();
}

fn flags(out: &Path, column: &str) -> Vec<(String, String)> {
    fs::read_to_string(out.join("report.tsv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split('\t').map(String::from).collect::<Vec<_>>())
        .filter(|c| c[1] == column)
        .map(|c| (c[0].clone(), c[3].clone()))
        .collect()
}

#[test]
fn significance_flags() {
    let f = Fixture::new();
    let corpus = load_corpus(&f.corpus(), CorpusFormat::WmtTsv).unwrap();
    let human = corpus.human_scores();
    let path = f.p("two.tsv");
    write_scores(
        &path,
        human.iter().flat_map(|((seg, sys), &h)| {
            // "noise" is a fixed scrambling of the cell index, unrelated to quality
            let noise = ((seg.len() * 31 + sys.bytes().map(|b| b as usize).sum::<usize>() * 17) % 13) as f64;
            [
                (seg.clone(), sys.clone(), "human", h),
                (seg.clone(), sys.clone(), "noise", noise),
            ]
        }),
    );
    let out = f.p("sig");
    ok(&[
        "evaluate",
        "--scores",
        s(&path),
        "--corpus",
        s(&f.corpus()),
        "--stat",
        "seg-k",
        "--significance",
        "1000",
        "--threshold",
        "0",
        "--unsupervised",
        "noise",
        "--out",
        s(&out),
    ]);
    let fl = flags(&out, "seg-k");
    assert_eq!(fl[0].0, "human");
    assert!(fl[0].1.contains("best_overall") && fl[0].1.contains("not_outperformed_any"));
    assert_eq!(fl[1].0, "noise");
    assert!(fl[1].1.contains("best_unsupervised"));
    assert!(!fl[1].1.contains("not_outperformed_any"));

    let same = f.p("same.tsv");
    write_scores(
        &same,
        human
            .iter()
            .flat_map(|((seg, sys), &h)| [(seg.clone(), sys.clone(), "a", h), (seg.clone(), sys.clone(), "b", h)]),
    );
    let out = f.p("same");
    ok(&[
        "evaluate",
        "--scores",
        s(&same),
        "--corpus",
        s(&f.corpus()),
        "--stat",
        "seg-k",
        "--significance",
        "200",
        "--out",
        s(&out),
    ]);
    for (_, fl) in flags(&out, "seg-k") {
        assert!(fl.contains("not_outperformed_any"), "{fl}");
    }
    let r = mf(
        &[
            "evaluate",
            "--scores",
            s(&same),
            "--corpus",
            s(&f.corpus()),
            "--significance",
            "50",
            "--out",
            s(&f.p("x")),
        ],
        None,
    );
    assert_eq!(r.code, 2);
}

#[test]
fn replay_reproduces_and_detects_changed_inputs() {
    let f = Fixture::new();
    let sc = f.score("sc", &[]);
    let r = ok(&["replay", s(&sc.join("manifest.json")), "--out", s(&f.p("again"))]);
    assert!(r.stdout.contains("\"command\": \"score\""));
    for name in ["scores.tsv", "manifest.json"] {
        assert_eq!(
            fs::read(sc.join(name)).unwrap(),
            fs::read(f.p("again").join(name)).unwrap()
        );
    }
    fs::write(f.corpus().join("outputs.tsv"), "segment_id\tsystem_id\thypothesis\n").unwrap();
    let r = mf(
        &["replay", s(&sc.join("manifest.json")), "--out", s(&f.p("changed"))],
        None,
    );
    assert_eq!(r.code, 3);
}

#[test]
fn flags_override_config_file() {
    let f = Fixture::new();
    let cfg = f.p("synth.cfg");
    fs::write(&cfg, "# small run\nsegments = 5\nsystems = 3\nparallel = 0\nseed = 9\n").unwrap();
    let out = f.p("cfg");
    ok(&["synth", "--config", s(&cfg), "--systems", "2", "--out", s(&out)]);
    let corpus = load_corpus(&out.join("xx-en"), CorpusFormat::WmtTsv).unwrap();
    assert_eq!(corpus.instances().len(), 5);
    assert_eq!(corpus.systems().len(), 2);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 9);
    assert_eq!(m["config"]["systems"], "2");

    fs::write(&cfg, "segments = 5\nsegments = 6\n").unwrap();
    assert_eq!(
        mf(&["synth", "--config", s(&cfg), "--out", s(&f.p("dup"))], None).code,
        2
    );
}
