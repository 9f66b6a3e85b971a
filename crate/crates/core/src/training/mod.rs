//! Generative and discriminative training of the trainable backends.

mod config;
mod discriminative;
mod rank;

use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{parse_key_values, KeyValues};
pub use discriminative::{
    fit_discriminative, grad_check, grad_check_avg_logprob, hinge_gradient, hinge_loss, pair_accuracy, GradCheck,
    DEFAULT_DIS_LEARNING_RATE, GRAD_CHECK_FLOOR,
};
pub use rank::{augment_directions, build_rank_pairs, Conditioned, DirectedExample, Direction, RankPair};

use crate::corpus::ParallelPair;
use crate::error::{Error, Result};
use crate::lm::{GradBuffer, LogLinearLm, Model, NGramCopyLm, NGramParams, Vocab};
use crate::scoring::EvalMode;

pub const DEFAULT_GEN_LEARNING_RATE: f64 = 0.1;
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_MAX_STEPS: usize = 2000;
/// Default raw-DA difference required to form a rank pair.
pub const DEFAULT_DARR_THRESHOLD: f64 = 25.0;

/// Optimizer and objective settings shared by both training stages.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Weight of the score-difference margin in the hinge loss.
    pub alpha: f64,
    pub learning_rate: f64,
    /// Number of per-example SGD updates.
    pub max_steps: usize,
    pub seed: u64,
    pub mode: EvalMode,
}

impl TrainConfig {
    pub fn generative() -> Self {
        TrainConfig {
            alpha: DEFAULT_ALPHA,
            learning_rate: DEFAULT_GEN_LEARNING_RATE,
            max_steps: DEFAULT_MAX_STEPS,
            seed: 0,
            mode: EvalMode::ReferenceBased,
        }
    }

    pub fn discriminative() -> Self {
        TrainConfig {
            learning_rate: DEFAULT_DIS_LEARNING_RATE,
            ..Self::generative()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    /// Sets one field from its config-file spelling.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("invalid value for {key}: {value:?}")))
        }
        match key {
            "alpha" => self.alpha = num(key, value)?,
            "learning_rate" => self.learning_rate = num(key, value)?,
            "max_steps" => self.max_steps = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "mode" => self.mode = value.parse()?,
            other => return Err(Error::InvalidArgument(format!("unknown training key {other:?}"))),
        }
        Ok(())
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("alpha", self.alpha.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("max_steps", self.max_steps.to_string()),
            ("seed", self.seed.to_string()),
            ("mode", self.mode.to_string()),
        ]
    }
}

/// (step, loss) points recorded during training.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossTrace {
    pub points: Vec<(usize, f64)>,
}

impl LossTrace {
    pub fn push(&mut self, step: usize, loss: f64) {
        self.points.push((step, loss));
    }

    pub fn first(&self) -> Option<f64> {
        self.points.first().map(|p| p.1)
    }

    pub fn last(&self) -> Option<f64> {
        self.points.last().map(|p| p.1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,loss\n");
        for (s, l) in &self.points {
            let _ = writeln!(out, "{s},{l}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    NGramCopy(NGramParams),
    LogLinear,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::NGramCopy(_) => NGramCopyLm::BACKEND,
            Backend::LogLinear => LogLinearLm::BACKEND,
        }
    }
}

/// Mean over pairs of the per-token negative log-likelihood of the output given the input.
pub fn mean_nll<M: crate::lm::ConditionalLm + ?Sized>(model: &M, pairs: &[ParallelPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyExamples);
    }
    let mut total = 0.0;
    for p in pairs {
        total -= crate::lm::sequence_avg_logprob(model, &p.input, &p.output)?;
    }
    Ok(total / pairs.len() as f64)
}

/// Fits a backend on parallel data by maximum likelihood.
///
/// The n-gram backend is closed-form counting (the learning rate is unused);
/// its trace holds the resulting mean NLL at step 0. The log-linear backend
/// starts from zero weights over the vocabulary of `pairs` and runs
/// `max_steps` per-example SGD updates in seeded shuffled order, recording the
/// mean NLL over all pairs before training and after every epoch.
pub fn fit_generative(backend: Backend, pairs: &[ParallelPair], config: &TrainConfig) -> Result<(Model, LossTrace)> {
    if pairs.is_empty() {
        return Err(Error::EmptyExamples);
    }
    config.validate()?;
    match backend {
        Backend::NGramCopy(params) => {
            let m = NGramCopyLm::fit(pairs, params)?;
            let mut trace = LossTrace::default();
            trace.push(0, mean_nll(&m, pairs)?);
            Ok((Model::NGramCopy(m), trace))
        }
        Backend::LogLinear => {
            let vocab = Vocab::from_texts(pairs.iter().flat_map(|p| [&p.input, &p.output]));
            let (m, trace) = fit_loglinear_nll(LogLinearLm::zeros(vocab), pairs, config)?;
            Ok((Model::LogLinear(m), trace))
        }
    }
}

/// Continues maximum-likelihood SGD from an existing log-linear model.
pub fn fit_loglinear_nll(
    mut model: LogLinearLm,
    pairs: &[ParallelPair],
    config: &TrainConfig,
) -> Result<(LogLinearLm, LossTrace)> {
    if pairs.is_empty() {
        return Err(Error::EmptyExamples);
    }
    config.validate()?;
    let vocab = crate::lm::ConditionalLm::vocab(&model).clone();
    let encoded: Vec<(Vec<u32>, Vec<u32>)> = pairs
        .iter()
        .map(|p| (vocab.encode(&p.input), vocab.encode(&p.output)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let mut buf = GradBuffer::default();
    let mut trace = LossTrace::default();
    trace.push(0, mean_nll(&model, pairs)?);

    let mut step = 0;
    while step < config.max_steps {
        order.shuffle(&mut rng);
        for &i in &order {
            if step == config.max_steps {
                break;
            }
            let (cond, tgt) = &encoded[i];
            model.accumulate(cond, tgt, 1.0 / (tgt.len() + 1) as f64, &mut buf);
            model.apply(&mut buf, config.learning_rate);
            step += 1;
        }
        model.check_finite()?;
        trace.push(step, mean_nll(&model, pairs)?);
    }
    Ok((model, trace))
}
