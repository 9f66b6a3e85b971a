//! Acceptance suite: one PASS/FAIL line per criterion, with wall time.
//! Exits non-zero if any criterion fails.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use metricforge::corpus::{load_corpus, CorpusFormat, ErrorCategory};
use metricforge::lm::{sequence_avg_logprob, UniformLm};
use metricforge::metaeval::{
    bootstrap_significance, category_rmse, kendall_tau_b, seg_kendall, system_correlations, Stat, Statistic,
};
use metricforge::scoring::{sentence_bleu, t5score, ScoreMatrix};
use metricforge::synth::synthesize_corpus;
use metricforge::training::{
    build_rank_pairs, grad_check, grad_check_avg_logprob, Conditioned, DirectedExample, Direction, GradCheck,
};
use metricforge::Text;
use metricforge_cli::commands::{heldout_accuracy, HELDOUT_FILE};
use metricforge_cli::{execute, replay, run, Command, Settings};
use oracles::{random_instance, random_loglinear, random_text, RandomInstance, METRIC};
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UNIFORM_TOL: f64 = 1e-12;
const F_TOL: f64 = 1e-15;
const FD_TOL: f64 = 1e-5;
const FD_STEP: f64 = 1e-5;
const ORACLE_TOL: f64 = 1e-12;
const INVARIANCE_TOL: f64 = 1e-9;
const SIGNIFICANCE: f64 = 0.05;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_uniform_and_f() -> Result<String, String> {
    let m = UniformLm::new(9);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let c = random_text(&mut rng, 9, 0, 8);
        let t = random_text(&mut rng, 9, 1, 8);
        let got = sequence_avg_logprob(&m, &c, &t).map_err(|e| e.to_string())?;
        worst = worst.max((got - 0.1f64.ln()).abs());
    }
    ensure(worst <= UNIFORM_TOL, || format!("uniform error {worst:e}"))?;
    let mut worst_f = 0.0f64;
    for _ in 0..1000 {
        let v = rng.random_range(1..=12);
        let model = random_loglinear(&mut rng, v);
        let a = random_text(&mut rng, v, 1, 6);
        let h = random_text(&mut rng, v, 1, 6);
        let s = t5score(&model, &a, &h).map_err(|e| e.to_string())?;
        worst_f = worst_f.max((s.f - (s.precision + s.recall) / 2.0).abs());
    }
    ensure(worst_f <= F_TOL, || format!("F error {worst_f:e}"))?;
    Ok(format!("uniform err {worst:.1e}, F err {worst_f:.1e} over 1000 draws"))
}

fn c2_finite_differences() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut avg, mut hinge) = (0.0f64, 0.0f64);
    for i in 0..200 {
        let v = rng.random_range(1..=12);
        let m = random_loglinear(&mut rng, v);
        let side = |rng: &mut ChaCha8Rng| Conditioned {
            condition: random_text(rng, v, 1, 6),
            target: random_text(rng, v, 1, 6),
        };
        let better = side(&mut rng);
        let worse = side(&mut rng);
        avg = avg.max(grad_check_avg_logprob(&m, &better, FD_STEP).map_err(|e| e.to_string())?);
        let ex = DirectedExample {
            direction: if i % 2 == 0 {
                Direction::Forward
            } else {
                Direction::Flipped
            },
            better,
            worse,
            margin: 100.0,
        };
        match grad_check(&m, &ex, FD_STEP).map_err(|e| e.to_string())? {
            GradCheck::Active { max_relative_error, .. } => hinge = hinge.max(max_relative_error),
            GradCheck::Inactive { .. } => return Err(format!("instance {i}: hinge inactive at margin 100")),
        }
    }
    ensure(avg <= FD_TOL && hinge <= FD_TOL, || {
        format!("avg {avg:e}, hinge {hinge:e}")
    })?;
    Ok(format!("max rel err: avg-logprob {avg:.1e}, hinge {hinge:.1e}"))
}

fn diff(got: Stat, want: Option<f64>) -> Result<f64, String> {
    match (got, want) {
        (Stat::Value(x), Some(y)) => Ok((x - y).abs()),
        (Stat::Degenerate, None) => Ok(0.0),
        (g, w) => Err(format!("{g:?} vs oracle {w:?}")),
    }
}

fn c3_statistic_oracles() -> Result<String, String> {
    let mut worst = 0.0f64;
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let systems = rng.random_range(2..=5);
        let segments = rng.random_range(1..=20 / systems);
        let inst = random_instance(&mut rng, segments, systems);
        let e = |m: String| format!("instance {seed}: {m}");

        let pairs = build_rank_pairs(&inst.corpus, 25.0, None, 0).map_err(|x| e(x.to_string()))?;
        let expect = inst.pairs(25.0);
        ensure(pairs.len() == expect.len(), || e("pair count".into()))?;
        if !expect.is_empty() {
            let k = seg_kendall(&inst.scores, METRIC, &pairs).map_err(|x| e(x.to_string()))?;
            worst = worst.max((k.tau - oracles::seg_k(&expect)).abs());
        }
        let (m, h) = inst.system_means();
        let sys = system_correlations(&inst.scores, METRIC, inst.corpus.judgments()).map_err(|x| e(x.to_string()))?;
        worst = worst.max(diff(sys.pearson, oracles::pearson(&m, &h)).map_err(e)?);
        worst = worst.max(diff(sys.kendall, oracles::kendall_tau_b(&m, &h)).map_err(e)?);

        let (cm, ch) = inst.cells();
        let r = category_rmse(&inst.scores, METRIC, inst.corpus.judgments(), ErrorCategory::Overall)
            .map_err(|x| e(x.to_string()))?;
        let want = oracles::pearson(&cm, &ch).map(|_| oracles::normalized_rmse(&cm, &ch));
        worst = worst.max(diff(r.rmse, want).map_err(e)?);
    }
    ensure(worst <= ORACLE_TOL, || format!("max abs err {worst:e}"))?;
    Ok(format!(
        "seg-k, pearson, tau-b, rmse: max abs err {worst:.1e} over 500 instances"
    ))
}

fn c4_bootstrap() -> Result<String, String> {
    let mut wins = 0;
    let mut identical_ok = true;
    for seed in 0..100u64 {
        let s = synthesize_corpus(seed, 100, 6, 5.0).map_err(|e| e.to_string())?;
        let mut pairs = build_rank_pairs(&s.corpus, 25.0, None, 0).map_err(|e| e.to_string())?;
        ensure(pairs.len() >= 500, || {
            format!("seed {seed}: only {} pairs", pairs.len())
        })?;
        pairs.truncate(500);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
        let mut scores = ScoreMatrix::new();
        for ((seg, sys), h) in s.corpus.human_scores() {
            for (name, v) in [("human", h), ("copy", h), ("noise", rng.random::<f64>())] {
                scores.insert(&seg, &sys, name, v).map_err(|e| e.to_string())?;
            }
        }
        let metrics: Vec<String> = ["human", "copy", "noise"].map(String::from).into();
        let sig = bootstrap_significance(&scores, &metrics, &pairs, &[], 1000, seed, Statistic::SegK)
            .map_err(|e| e.to_string())?;
        identical_ok &= sig.p_values[0][1] == 1.0 && sig.p_values[1][0] == 1.0;
        if sig.p_values[0][2] < SIGNIFICANCE {
            wins += 1;
        }
    }
    ensure(identical_ok, || "identical metrics gave p != 1".into())?;
    ensure(wins >= 95, || format!("human beat noise in {wins}/100 seeds"))?;
    Ok(format!(
        "identical p = 1; human vs noise p < {SIGNIFICANCE} in {wins}/100 seeds"
    ))
}

fn settings(command: Command, kv: &[(&str, &str)]) -> Result<Settings, String> {
    let mut s = Settings::defaults(command);
    for (k, v) in kv {
        s.set(k, *v).map_err(|e| e.to_string())?;
    }
    Ok(s)
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn c5_end_to_end_ranking() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let syn = dir.path().join("syn");
    let e = |x: metricforge_cli::CliError| x.to_string();
    execute(Command::Synth, &settings(Command::Synth, &[])?, 7, &syn).map_err(e)?;
    let parallel = path_str(&syn.join("parallel.tsv"));
    let corpus = path_str(&syn.join("xx-en"));

    let ng = dir.path().join("ng");
    execute(
        Command::Train,
        &settings(Command::Train, &[("backend", "ngram"), ("parallel", &parallel)])?,
        7,
        &ng,
    )
    .map_err(e)?;
    let sc = run(
        Command::Score,
        &settings(
            Command::Score,
            &[("model", &path_str(&ng.join("model.lm"))), ("corpus", &corpus)],
        )?,
        7,
    )
    .map_err(e)?;
    let scores = ScoreMatrix::from_tsv(Path::new("scores.tsv"), sc.text("scores.tsv").unwrap_or_default())
        .map_err(|x| x.to_string())?;
    let c = load_corpus(&syn.join("xx-en"), CorpusFormat::WmtTsv).map_err(|x| x.to_string())?;
    let kendall = system_correlations(&scores, "t5score", c.judgments())
        .map_err(|x| x.to_string())?
        .kendall
        .value()
        .ok_or("degenerate system kendall")?;
    ensure(kendall >= 0.6, || format!("ngram system kendall {kendall}"))?;

    let mut acc = Vec::new();
    for stage in ["gen", "dis", "both"] {
        let s = settings(
            Command::Train,
            &[
                ("stage", stage),
                ("parallel", &parallel),
                ("corpus", &corpus),
                ("heldout_segments", "100"),
            ],
        )?;
        let out = run(Command::Train, &s, 7).map_err(e)?;
        acc.push(heldout_accuracy(&out).ok_or(format!("no {HELDOUT_FILE}"))?);
    }
    let (g, d, b) = (acc[0], acc[1], acc[2]);
    ensure(b >= g && b >= d && (b > g || b > d), || {
        format!("held-out accuracy gen {g:.4}, dis {d:.4}, both {b:.4}")
    })?;
    Ok(format!(
        "ngram sys kendall {kendall:.3}; held-out gen {g:.4} dis {d:.4} both {b:.4}"
    ))
}

fn transformed(inst: &RandomInstance, f: impl Fn(f64) -> f64) -> ScoreMatrix {
    let mut s = ScoreMatrix::new();
    for ((seg, sys, m), v) in inst.scores.iter() {
        s.insert(seg, sys, m, f(v)).unwrap();
    }
    s
}

fn instance(seed: u64) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let systems = rng.random_range(2..=5);
    let segments = rng.random_range(1..=20 / systems);
    random_instance(&mut rng, segments, systems)
}

fn same_stat(a: Stat, b: Stat) -> Result<(), TestCaseError> {
    match (a, b) {
        (Stat::Value(x), Stat::Value(y)) if (x - y).abs() <= INVARIANCE_TOL => Ok(()),
        (Stat::Degenerate, Stat::Degenerate) => Ok(()),
        _ => Err(TestCaseError::fail(format!("{a:?} vs {b:?}"))),
    }
}

fn c6_invariances() -> Result<String, String> {
    let mut runner = TestRunner::new(Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    });
    let mut names = Vec::new();
    let mut check = |name: &'static str, r: Result<(), String>| {
        names.push(name);
        r.map_err(|e| format!("{name}: {e}"))
    };
    let seeds = 0u64..1_000_000;

    check(
        "seg-k monotone",
        runner
            .run(&(seeds.clone(), 0.1f64..5.0), |(seed, a)| {
                let inst = instance(seed);
                let pairs = build_rank_pairs(&inst.corpus, 25.0, None, 0).unwrap();
                if pairs.is_empty() {
                    return Ok(());
                }
                let base = seg_kendall(&inst.scores, METRIC, &pairs).unwrap();
                let mapped = seg_kendall(&transformed(&inst, |v| (a * v).exp()), METRIC, &pairs).unwrap();
                if base == mapped {
                    Ok(())
                } else {
                    Err(TestCaseError::fail(format!("{base:?} vs {mapped:?}")))
                }
            })
            .map_err(|e| e.to_string()),
    )?;
    check(
        "sys pearson affine",
        runner
            .run(&(seeds.clone(), 0.1f64..10.0, -50.0f64..50.0), |(seed, a, b)| {
                let inst = instance(seed);
                let j = inst.corpus.judgments();
                let x = system_correlations(&inst.scores, METRIC, j).unwrap().pearson;
                let y = system_correlations(&transformed(&inst, |v| a * v + b), METRIC, j)
                    .unwrap()
                    .pearson;
                same_stat(x, y)
            })
            .map_err(|e| e.to_string()),
    )?;
    check(
        "tau-b monotone",
        runner
            .run(&(seeds.clone(), 2usize..=20), |(seed, n)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-4..4) as f64).collect();
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..4) as f64).collect();
                let fx: Vec<f64> = x.iter().map(|v| v.powi(3) + 2.0 * v).collect();
                same_stat(kendall_tau_b(&x, &y), kendall_tau_b(&fx, &y))
            })
            .map_err(|e| e.to_string()),
    )?;
    check(
        "rmse affine",
        runner
            .run(&(seeds.clone(), 0.1f64..10.0, -50.0f64..50.0), |(seed, a, b)| {
                let inst = instance(seed);
                let j = inst.corpus.judgments();
                let x = category_rmse(&inst.scores, METRIC, j, ErrorCategory::Overall)
                    .unwrap()
                    .rmse;
                let y = category_rmse(&transformed(&inst, |v| a * v + b), METRIC, j, ErrorCategory::Overall)
                    .unwrap()
                    .rmse;
                same_stat(x, y)
            })
            .map_err(|e| e.to_string()),
    )?;
    check(
        "F symmetric",
        runner
            .run(&seeds.clone(), |seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let v = rng.random_range(1..=12);
                let m = random_loglinear(&mut rng, v);
                let a = random_text(&mut rng, v, 1, 6);
                let h = random_text(&mut rng, v, 1, 6);
                let (x, y) = (t5score(&m, &a, &h).unwrap(), t5score(&m, &h, &a).unwrap());
                if x.f == y.f && x.precision == y.recall {
                    Ok(())
                } else {
                    Err(TestCaseError::fail(format!("{x:?} vs {y:?}")))
                }
            })
            .map_err(|e| e.to_string()),
    )?;
    check(
        "bleu renaming",
        runner
            .run(&seeds, |seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let h = random_text(&mut rng, 6, 0, 8);
                let r = random_text(&mut rng, 6, 1, 8);
                let rename = |t: &Text| {
                    Text::whitespace(
                        t.tokens()
                            .iter()
                            .map(|w| format!("{w}_x"))
                            .collect::<Vec<_>>()
                            .join(" "),
                    )
                };
                if sentence_bleu(&h, &r).unwrap() == sentence_bleu(&rename(&h), &rename(&r)).unwrap() {
                    Ok(())
                } else {
                    Err(TestCaseError::fail("bleu changed under renaming"))
                }
            })
            .map_err(|e| e.to_string()),
    )?;
    Ok(format!("200 cases each: {}", names.join(", ")))
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn c7_replay() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |r: &str| dir.path().join(r);
    let e = |x: metricforge_cli::CliError| x.to_string();
    let syn = p("syn");
    execute(
        Command::Synth,
        &settings(
            Command::Synth,
            &[("segments", "60"), ("systems", "4"), ("parallel", "200")],
        )?,
        5,
        &syn,
    )
    .map_err(e)?;
    let corpus = path_str(&syn.join("xx-en"));
    execute(
        Command::Train,
        &settings(
            Command::Train,
            &[
                ("stage", "both"),
                ("parallel", &path_str(&syn.join("parallel.tsv"))),
                ("corpus", &corpus),
                ("heldout_segments", "10"),
                ("gen_max_steps", "300"),
                ("dis_max_steps", "300"),
            ],
        )?,
        5,
        &p("train"),
    )
    .map_err(e)?;
    execute(
        Command::Score,
        &settings(
            Command::Score,
            &[
                ("model", &path_str(&p("train/model.lm"))),
                ("corpus", &corpus),
                ("baseline", "sentbleu"),
            ],
        )?,
        5,
        &p("score"),
    )
    .map_err(e)?;
    execute(
        Command::Evaluate,
        &settings(
            Command::Evaluate,
            &[
                ("scores", &path_str(&p("score/scores.tsv"))),
                ("corpus", &corpus),
                ("significance", "200"),
                ("plot", "true"),
                ("unsupervised", "sentbleu"),
            ],
        )?,
        5,
        &p("evaluate"),
    )
    .map_err(e)?;

    let mut n_files = 0;
    for stage in ["syn", "train", "score", "evaluate"] {
        let again = p(&format!("{stage}.replay"));
        replay(&p(stage).join("manifest.json"), &again).map_err(e)?;
        let (a, b) = (files(&p(stage)), files(&again));
        ensure(a == b, || format!("{stage}: replay differs"))?;
        n_files += a.len();
    }
    Ok(format!(
        "synth, train, score, evaluate replayed byte-identically ({n_files} files)"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check, Duration); 7] = [
        (
            "uniform value and F = (P+R)/2",
            c1_uniform_and_f,
            Duration::from_secs(1),
        ),
        (
            "finite-difference gradients",
            c2_finite_differences,
            Duration::from_secs(30),
        ),
        (
            "statistics against brute-force oracles",
            c3_statistic_oracles,
            Duration::from_secs(10),
        ),
        ("paired bootstrap calibration", c4_bootstrap, Duration::from_secs(60)),
        (
            "synthetic end-to-end ranking",
            c5_end_to_end_ranking,
            Duration::from_secs(120),
        ),
        ("invariance properties", c6_invariances, Duration::from_secs(10)),
        ("byte-identical replay", c7_replay, Duration::from_secs(60)),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let took = start.elapsed();
        let result = result.and_then(|detail| {
            if took <= budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; over the {budget:?} budget"))
            }
        });
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {}: {tag} {name} [{:.2}s] {detail}",
            i + 1,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {}/7 passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
