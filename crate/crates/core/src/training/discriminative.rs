//! Contrastive margin training of the log-linear backend.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Conditioned, DirectedExample, LossTrace, RankPair, TrainConfig};
use crate::error::{Error, Result};
use crate::lm::{ConditionalLm, GradBuffer, LogLinearLm, TokenId};
use crate::scoring::{t5score, EvalMode, FLOOR_SCORE};

pub const DEFAULT_DIS_LEARNING_RATE: f64 = 0.05;

/// Denominator floor for relative errors, so coordinates whose gradient is
/// essentially zero are judged on absolute error instead.
pub const GRAD_CHECK_FLOOR: f64 = 1e-4;

/// `max(0, f_worse - f_better + margin)`.
pub fn hinge_loss(f_better: f64, f_worse: f64, margin: f64) -> f64 {
    (f_worse - f_better + margin).max(0.0)
}

struct Encoded {
    better: (Vec<TokenId>, Vec<TokenId>),
    worse: (Vec<TokenId>, Vec<TokenId>),
    margin: f64,
}

fn encode(model: &LogLinearLm, ex: &DirectedExample) -> Encoded {
    let v = model.vocab();
    let side = |c: &Conditioned| (v.encode(&c.condition), v.encode(&c.target));
    Encoded {
        better: side(&ex.better),
        worse: side(&ex.worse),
        margin: ex.margin,
    }
}

/// Average log-probability; an empty target scores the floor.
fn f(model: &LogLinearLm, (cond, tgt): &(Vec<TokenId>, Vec<TokenId>)) -> f64 {
    if tgt.is_empty() {
        FLOOR_SCORE
    } else {
        model.sequence_logprob_ids(cond, tgt) / (tgt.len() + 1) as f64
    }
}

fn example_loss(model: &LogLinearLm, e: &Encoded) -> f64 {
    hinge_loss(f(model, &e.better), f(model, &e.worse), e.margin)
}

fn mean_loss(model: &LogLinearLm, enc: &[Encoded]) -> f64 {
    enc.iter().map(|e| example_loss(model, e)).sum::<f64>() / enc.len() as f64
}

/// Adds `sign * grad f` into `buf`. Empty targets contribute nothing.
fn push_grad(model: &LogLinearLm, (cond, tgt): &(Vec<TokenId>, Vec<TokenId>), sign: f64, buf: &mut GradBuffer) {
    if !tgt.is_empty() {
        model.accumulate(cond, tgt, sign / (tgt.len() + 1) as f64, buf);
    }
}

/// Per-example SGD on the hinge loss for `config.max_steps` steps, in seeded
/// shuffled epochs. Active examples move the weights by
/// `lr * (grad f(better) - grad f(worse))`; inactive ones leave them untouched.
/// The trace holds the mean hinge loss over all examples before training and
/// after every epoch.
pub fn fit_discriminative(
    mut model: LogLinearLm,
    examples: &[DirectedExample],
    config: &TrainConfig,
) -> Result<(LogLinearLm, LossTrace)> {
    if examples.is_empty() {
        return Err(Error::EmptyExamples);
    }
    config.validate()?;
    let enc: Vec<Encoded> = examples.iter().map(|e| encode(&model, e)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..enc.len()).collect();
    let mut buf = GradBuffer::default();
    let mut trace = LossTrace::default();
    trace.push(0, mean_loss(&model, &enc));

    let mut step = 0;
    while step < config.max_steps {
        order.shuffle(&mut rng);
        for &i in &order {
            if step == config.max_steps {
                break;
            }
            step += 1;
            let e = &enc[i];
            if example_loss(&model, e) > 0.0 {
                push_grad(&model, &e.better, 1.0, &mut buf);
                push_grad(&model, &e.worse, -1.0, &mut buf);
                model.apply(&mut buf, config.learning_rate);
            }
        }
        model.check_finite()?;
        trace.push(step, mean_loss(&model, &enc));
    }
    Ok((model, trace))
}

/// Outcome of comparing the analytic hinge gradient with finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradCheck {
    Active {
        max_relative_error: f64,
        max_abs_error: f64,
    },
    /// The hinge is flat at these weights; `zero_gradient` says whether the
    /// analytic gradient is exactly the zero vector.
    Inactive { zero_gradient: bool },
}

/// Analytic gradient of the hinge loss (zero when inactive).
pub fn hinge_gradient(model: &LogLinearLm, example: &DirectedExample) -> Vec<f64> {
    let e = encode(model, example);
    let mut g = vec![0.0; model.n_features()];
    if example_loss(model, &e) > 0.0 {
        // loss = f(worse) - f(better) + margin
        for ((cond, tgt), sign) in [(&e.worse, 1.0), (&e.better, -1.0)] {
            if !tgt.is_empty() {
                model.logprob_and_grad(cond, tgt, sign / (tgt.len() + 1) as f64, Some(&mut g));
            }
        }
    }
    g
}

fn relative_errors(analytic: &[f64], numeric: &[f64]) -> (f64, f64) {
    let mut rel = 0.0f64;
    let mut abs = 0.0f64;
    for (a, n) in analytic.iter().zip(numeric) {
        let d = (a - n).abs();
        abs = abs.max(d);
        rel = rel.max(d / a.abs().max(n.abs()).max(GRAD_CHECK_FLOOR));
    }
    (rel, abs)
}

fn central_differences(model: &LogLinearLm, h: f64, mut loss: impl FnMut(&LogLinearLm) -> f64) -> Vec<f64> {
    let mut m = model.clone();
    (0..m.n_features())
        .map(|i| {
            let w = m.weights()[i];
            m.weights_mut()[i] = w + h;
            let up = loss(&m);
            m.weights_mut()[i] = w - h;
            let down = loss(&m);
            m.weights_mut()[i] = w;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Compares the hinge gradient against central finite differences with step `h`.
pub fn grad_check(model: &LogLinearLm, example: &DirectedExample, h: f64) -> Result<GradCheck> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {h}")));
    }
    let e = encode(model, example);
    let analytic = hinge_gradient(model, example);
    if example_loss(model, &e) <= 0.0 {
        return Ok(GradCheck::Inactive {
            zero_gradient: analytic.iter().all(|&g| g == 0.0),
        });
    }
    // the active branch is linear in f, so differentiate it without the max
    let numeric = central_differences(model, h, |m| f(m, &e.worse) - f(m, &e.better) + e.margin);
    let (max_relative_error, max_abs_error) = relative_errors(&analytic, &numeric);
    Ok(GradCheck::Active {
        max_relative_error,
        max_abs_error,
    })
}

/// Max relative error between the analytic gradient of the average
/// log-probability and central finite differences.
pub fn grad_check_avg_logprob(model: &LogLinearLm, example: &Conditioned, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {h}")));
    }
    let analytic = model.grad_avg_logprob(&example.condition, &example.target)?;
    let v = model.vocab();
    let side = (v.encode(&example.condition), v.encode(&example.target));
    let numeric = central_differences(model, h, |m| f(m, &side));
    Ok(relative_errors(&analytic, &numeric).0)
}

/// Fraction of pairs whose better hypothesis gets a strictly higher F score.
pub fn pair_accuracy<M: ConditionalLm + ?Sized>(model: &M, pairs: &[RankPair], mode: EvalMode) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairs);
    }
    let mut correct = 0usize;
    for p in pairs {
        let anchor = p.anchor(mode).ok_or_else(|| Error::MissingReference {
            segments: vec![p.segment_id.clone()],
        })?;
        let b = t5score(model, anchor, &p.better)?.f;
        let w = t5score(model, anchor, &p.worse)?.f;
        if b > w {
            correct += 1;
        }
    }
    Ok(correct as f64 / pairs.len() as f64)
}
