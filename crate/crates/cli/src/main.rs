use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use metricforge_cli::{execute, replay, CliError, Command, Settings, EXIT_USAGE};

#[derive(Parser)]
#[command(
    name = "metricforge",
    version,
    about = "Score text with conditional log-probability metrics and meta-evaluate them"
)]
struct Cli {
    /// key = value file with command settings; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic judged corpus and paraphrase data
    Synth(SynthArgs),
    /// Train a model generatively, discriminatively or both
    Train(TrainArgs),
    /// Score every hypothesis of a corpus
    Score(ScoreArgs),
    /// Correlate metric scores with human judgments
    Evaluate(EvaluateArgs),
    /// Re-run a command from its manifest.json
    Replay(ReplayArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    segments: Option<usize>,
    #[arg(long)]
    systems: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    /// Number of paraphrase pairs, 0 for none
    #[arg(long)]
    parallel: Option<usize>,
    /// wmt_tsv or jsonl
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    /// ngram or log_linear
    #[arg(long)]
    backend: Option<String>,
    /// gen, dis or both
    #[arg(long)]
    stage: Option<String>,
    /// input<TAB>output file for generative training
    #[arg(long)]
    parallel: Option<PathBuf>,
    /// Judged corpus for discriminative training
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    corpus_format: Option<String>,
    /// reference or source
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Minimum human-score difference for a rank pair
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    max_pairs_per_segment: Option<usize>,
    /// Trailing segments kept out of training and used for pair accuracy
    #[arg(long)]
    heldout_segments: Option<usize>,
    #[arg(long)]
    gen_learning_rate: Option<f64>,
    #[arg(long)]
    gen_max_steps: Option<usize>,
    #[arg(long)]
    dis_learning_rate: Option<f64>,
    #[arg(long)]
    dis_max_steps: Option<usize>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    addk: Option<f64>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    corpus_format: Option<String>,
    /// reference or source
    #[arg(long)]
    mode: Option<String>,
    /// Metric name; precision and recall get .p and .r suffixes
    #[arg(long)]
    name: Option<String>,
    /// none or sentbleu
    #[arg(long)]
    baseline: Option<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Score file; repeat for several
    #[arg(long)]
    scores: Vec<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    corpus_format: Option<String>,
    /// seg-k, sys-p, sys-k, rmse or all
    #[arg(long)]
    stat: Option<String>,
    /// Comma-separated metric names (default: every metric in the score files)
    #[arg(long)]
    metrics: Option<String>,
    #[arg(long)]
    top_k: Option<usize>,
    /// Error category for rmse
    #[arg(long)]
    category: Option<String>,
    /// Bootstrap iterations for pairwise significance, 0 for none
    #[arg(long)]
    significance: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Comma-separated metrics that count as unsupervised
    #[arg(long)]
    unsupervised: Option<String>,
    /// Also write a statistic-versus-k SVG
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct ReplayArgs {
    manifest: PathBuf,
}

fn pairs<T: ToString>(v: &[(&'static str, Option<T>)]) -> Vec<(&'static str, String)> {
    v.iter()
        .filter_map(|(k, x)| x.as_ref().map(|x| (*k, x.to_string())))
        .collect()
}

fn path(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.display().to_string())
}

fn flag_settings(cmd: &Cmd) -> (Command, Vec<(&'static str, String)>) {
    match cmd {
        Cmd::Synth(a) => (
            Command::Synth,
            [
                pairs(&[
                    ("segments", a.segments),
                    ("systems", a.systems),
                    ("parallel", a.parallel),
                ]),
                pairs(&[("noise", a.noise)]),
                pairs(&[("format", a.format.clone())]),
            ]
            .concat(),
        ),
        Cmd::Train(a) => (
            Command::Train,
            [
                pairs(&[
                    ("backend", a.backend.clone()),
                    ("stage", a.stage.clone()),
                    ("parallel", path(&a.parallel)),
                    ("corpus", path(&a.corpus)),
                    ("corpus_format", a.corpus_format.clone()),
                    ("mode", a.mode.clone()),
                ]),
                pairs(&[
                    ("alpha", a.alpha),
                    ("threshold", a.threshold),
                    ("gen_learning_rate", a.gen_learning_rate),
                    ("dis_learning_rate", a.dis_learning_rate),
                    ("lambda", a.lambda),
                    ("addk", a.addk),
                ]),
                pairs(&[
                    ("max_pairs_per_segment", a.max_pairs_per_segment),
                    ("heldout_segments", a.heldout_segments),
                    ("gen_max_steps", a.gen_max_steps),
                    ("dis_max_steps", a.dis_max_steps),
                    ("order", a.order),
                ]),
            ]
            .concat(),
        ),
        Cmd::Score(a) => (
            Command::Score,
            pairs(&[
                ("model", path(&a.model)),
                ("corpus", path(&a.corpus)),
                ("corpus_format", a.corpus_format.clone()),
                ("mode", a.mode.clone()),
                ("name", a.name.clone()),
                ("baseline", a.baseline.clone()),
            ]),
        ),
        Cmd::Evaluate(a) => {
            let scores = (!a.scores.is_empty()).then(|| {
                a.scores
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            });
            (
                Command::Evaluate,
                [
                    pairs(&[
                        ("scores", scores),
                        ("corpus", path(&a.corpus)),
                        ("corpus_format", a.corpus_format.clone()),
                        ("stat", a.stat.clone()),
                        ("metrics", a.metrics.clone()),
                        ("category", a.category.clone()),
                        ("unsupervised", a.unsupervised.clone()),
                        ("plot", a.plot.then(|| "true".to_owned())),
                    ]),
                    pairs(&[("threshold", a.threshold)]),
                    pairs(&[("top_k", a.top_k), ("significance", a.significance)]),
                ]
                .concat(),
            )
        }
        Cmd::Replay(_) => unreachable!("replay has no settings"),
    }
}

fn set_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("METRICFORGE_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("METRICFORGE_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn real_main(cli: Cli) -> Result<(), CliError> {
    set_threads()?;
    let out = cli
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("--out DIR is required".into()))?;
    let manifest = match &cli.command {
        Cmd::Replay(a) => replay(&a.manifest, &out)?,
        cmd => {
            let (command, flags) = flag_settings(cmd);
            let mut settings = Settings::defaults(command);
            let mut seed = 0;
            if let Some(cfg) = &cli.config {
                if let Some(s) = settings.apply_config_file(cfg)? {
                    seed = s;
                }
            }
            for (k, v) in flags {
                settings.set(k, v)?;
            }
            execute(command, &settings, cli.seed.unwrap_or(seed), &out)?
        }
    };
    print!("{}", manifest.to_json());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("metricforge: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
