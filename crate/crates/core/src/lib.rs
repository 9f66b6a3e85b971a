//! Text generation evaluation by conditional log-probability.
//!
//! A hypothesis is scored by how probable a conditional language model finds
//! it given the reference or source (precision), how probable it finds the
//! reference or source given the hypothesis (recall), and the mean of the two
//! (F). The crate provides:
//!
//! * [`corpus`] and [`synth`]: evaluation corpora, loaders and a seeded synthetic generator;
//! * [`lm`]: the conditional model interface and three backends;
//! * [`scoring`]: the directional metric and a smoothed sentence-BLEU baseline;
//! * [`training`]: generative (NLL) and discriminative (contrastive hinge) training;
//! * [`metaeval`]: segment and system correlations, paired bootstrap, RMSE and top-k analysis;
//! * [`report`]: report tables with significance flags, and [`plot`] for SVG curves.

pub mod corpus;
pub mod error;
pub mod lm;
pub mod metaeval;
pub mod plot;
pub mod report;
pub mod scoring;
pub mod synth;
pub mod text;
pub mod training;

pub use error::{Error, Result};
pub use text::{Text, TokenPolicy};
