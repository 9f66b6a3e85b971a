//! Seeded synthetic corpora with a planted quality signal.
//!
//! References come from a small phrase grammar. Every system gets a latent
//! quality in [0, 1]; its hypotheses are the reference with token edits applied
//! at a rate proportional to one minus that quality, and its human scores are
//! `100 * quality` plus Gaussian noise.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{Corpus, EvalInstance, Judgment, JudgmentKind, LanguagePair, ParallelPair};
use crate::error::{Error, Result};
use crate::text::Text;

/// Per-token edit probability for a system of quality zero.
pub const MAX_EDIT_RATE: f64 = 0.6;

const DETERMINERS: &[&str] = &["the", "a", "every", "some", "this", "that", "my", "our", "their", "one"];
const PRONOUNS: &[&str] = &["she", "he", "they", "we", "you", "it"];
const PREPOSITIONS: &[&str] = &[
    "in", "on", "near", "under", "behind", "with", "without", "beside", "above", "across", "through", "around",
];
const ADJECTIVES: &[&str] = &[
    "small", "large", "old", "young", "green", "red", "blue", "quiet", "loud", "bright", "dark", "happy", "sad",
    "quick", "slow", "warm", "cold", "heavy", "light", "clever", "brave", "gentle", "strange", "famous", "tired",
    "busy", "empty", "full", "clean", "dirty", "soft", "hard", "sweet", "bitter", "tall", "short", "narrow", "wide",
    "ancient", "modern",
];
const NOUNS: &[&str] = &[
    "cat",
    "dog",
    "bird",
    "horse",
    "farmer",
    "teacher",
    "child",
    "doctor",
    "river",
    "mountain",
    "city",
    "village",
    "house",
    "garden",
    "table",
    "window",
    "door",
    "book",
    "letter",
    "song",
    "road",
    "bridge",
    "forest",
    "field",
    "boat",
    "train",
    "market",
    "school",
    "kitchen",
    "island",
    "lamp",
    "chair",
    "apple",
    "bread",
    "coffee",
    "friend",
    "neighbor",
    "king",
    "queen",
    "soldier",
    "painter",
    "writer",
    "student",
    "baker",
    "sailor",
    "storm",
    "morning",
    "evening",
    "winter",
    "summer",
    "letterbox",
    "tower",
    "castle",
    "wall",
    "stone",
    "flower",
    "tree",
    "cloud",
    "moon",
    "sun",
];
const VERBS: &[&str] = &[
    "sees",
    "finds",
    "likes",
    "carries",
    "watches",
    "builds",
    "opens",
    "closes",
    "paints",
    "reads",
    "writes",
    "sells",
    "buys",
    "follows",
    "visits",
    "remembers",
    "forgets",
    "cleans",
    "moves",
    "holds",
    "answers",
    "calls",
    "helps",
    "meets",
    "leaves",
    "keeps",
    "brings",
    "takes",
    "chooses",
    "admires",
    "describes",
    "protects",
    "ignores",
    "greets",
    "repairs",
    "measures",
    "counts",
    "hides",
    "shows",
    "loves",
];
const ADVERBS: &[&str] = &[
    "quickly",
    "slowly",
    "quietly",
    "often",
    "rarely",
    "today",
    "yesterday",
    "again",
    "carefully",
    "happily",
    "sadly",
    "early",
    "late",
    "always",
    "never",
    "together",
    "alone",
    "gladly",
    "suddenly",
    "politely",
];
const CONJUNCTIONS: &[&str] = &["and", "but", "while", "because"];

#[derive(Clone, Copy)]
enum Slot {
    Det,
    Pron,
    Prep,
    Adj,
    Noun,
    Verb,
    Adv,
    Conj,
}

impl Slot {
    fn words(self) -> &'static [&'static str] {
        match self {
            Slot::Det => DETERMINERS,
            Slot::Pron => PRONOUNS,
            Slot::Prep => PREPOSITIONS,
            Slot::Adj => ADJECTIVES,
            Slot::Noun => NOUNS,
            Slot::Verb => VERBS,
            Slot::Adv => ADVERBS,
            Slot::Conj => CONJUNCTIONS,
        }
    }

    fn paraphrasable(self) -> bool {
        matches!(self, Slot::Adj | Slot::Adv)
    }
}

use Slot::*;

const TEMPLATES: &[&[Slot]] = &[
    &[Det, Adj, Noun, Verb, Det, Noun],
    &[Det, Noun, Verb, Adv],
    &[Det, Adj, Noun, Verb, Prep, Det, Adj, Noun],
    &[Det, Noun, Prep, Det, Noun, Verb, Det, Noun, Adv],
    &[Det, Noun, Verb, Det, Noun, Conj, Pron, Verb, Adv],
    &[Pron, Verb, Det, Adj, Noun, Prep, Det, Noun],
    &[Adv, Det, Adj, Noun, Verb, Det, Adj, Noun],
];

/// Every word the grammar can produce, in a fixed order.
pub fn vocabulary() -> Vec<&'static str> {
    [
        DETERMINERS,
        PRONOUNS,
        PREPOSITIONS,
        ADJECTIVES,
        NOUNS,
        VERBS,
        ADVERBS,
        CONJUNCTIONS,
    ]
    .concat()
}

fn sentence(rng: &mut impl Rng) -> Vec<(Slot, &'static str)> {
    let template = TEMPLATES.choose(rng).expect("templates non-empty");
    template
        .iter()
        .map(|&slot| (slot, *slot.words().choose(rng).expect("word lists non-empty")))
        .collect()
}

/// Pseudo source-language rendering: each word spelled backwards.
fn to_source(words: &[&str]) -> String {
    words
        .iter()
        .map(|w| w.chars().rev().collect::<String>())
        .collect::<Vec<_>>()
        .join(" ")
}

fn corrupt(reference: &[&'static str], edit_rate: f64, vocab: &[&'static str], rng: &mut impl Rng) -> String {
    let mut out: Vec<&str> = Vec::with_capacity(reference.len() + 2);
    for &tok in reference {
        if rng.random_bool(edit_rate) {
            match rng.random_range(0..3) {
                0 => out.push(vocab.choose(rng).expect("vocab")),
                1 => {}
                _ => {
                    out.push(tok);
                    out.push(vocab.choose(rng).expect("vocab"));
                }
            }
        } else {
            out.push(tok);
        }
    }
    if out.is_empty() {
        out.push(vocab.choose(rng).expect("vocab"));
    }
    out.join(" ")
}

/// A synthetic corpus together with the qualities planted in it.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    /// Latent quality per system id.
    pub quality: BTreeMap<String, f64>,
}

impl SyntheticCorpus {
    /// System ids ordered from highest to lowest planted quality.
    pub fn systems_by_quality(&self) -> Vec<String> {
        let mut v: Vec<(&String, f64)> = self.quality.iter().map(|(k, &q)| (k, q)).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v.into_iter().map(|(k, _)| k.clone()).collect()
    }
}

pub fn system_id(i: usize) -> String {
    format!("sys{:02}", i + 1)
}

pub fn segment_id(i: usize) -> String {
    format!("seg{:04}", i + 1)
}

/// Builds a seeded synthetic corpus.
///
/// Qualities are stratified so that adjacent systems differ by at least
/// `0.5 / n_systems`, then shuffled across system ids.
pub fn synthesize_corpus(seed: u64, n_segments: usize, n_systems: usize, noise: f64) -> Result<SyntheticCorpus> {
    if n_segments < 1 {
        return Err(Error::InvalidArgument("n_segments must be at least 1".into()));
    }
    if n_systems < 2 {
        return Err(Error::InvalidArgument("n_systems must be at least 2".into()));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise must be finite and >= 0, got {noise}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = vocabulary();

    let mut qualities: Vec<f64> = (0..n_systems)
        .map(|k| (k as f64 + 0.25 + 0.5 * rng.random::<f64>()) / n_systems as f64)
        .collect();
    qualities.shuffle(&mut rng);
    let quality: BTreeMap<String, f64> = qualities.iter().enumerate().map(|(i, &q)| (system_id(i), q)).collect();

    let gauss = Normal::new(0.0, noise).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut instances = Vec::with_capacity(n_segments);
    let mut judgments = Vec::with_capacity(n_segments * n_systems);
    for s in 0..n_segments {
        let words: Vec<&'static str> = sentence(&mut rng).into_iter().map(|(_, w)| w).collect();
        let seg = segment_id(s);
        let mut hypotheses = BTreeMap::new();
        for (i, &q) in qualities.iter().enumerate() {
            let hyp = corrupt(&words, MAX_EDIT_RATE * (1.0 - q), &vocab, &mut rng);
            hypotheses.insert(system_id(i), Text::whitespace(hyp));
            let m = (100.0 * q + gauss.sample(&mut rng)).clamp(0.0, 100.0);
            judgments.push(Judgment {
                segment_id: seg.clone(),
                system_id: system_id(i),
                score: m,
                kind: JudgmentKind::RawDa,
                category: None,
            });
        }
        instances.push(EvalInstance {
            segment_id: seg,
            source: Text::whitespace(to_source(&words)),
            reference: Some(Text::whitespace(words.join(" "))),
            hypotheses,
        });
    }
    let corpus = Corpus::new(LanguagePair::new("xx", "en"), instances, judgments)?;
    Ok(SyntheticCorpus { corpus, quality })
}

/// Seeded paraphrase pairs from the same grammar: the output is the input with
/// some adjectives and adverbs swapped for others of the same class.
pub fn synthesize_parallel(seed: u64, n_pairs: usize) -> Result<Vec<ParallelPair>> {
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("n_pairs must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a_5a5a);
    let mut pairs = Vec::with_capacity(n_pairs);
    for _ in 0..n_pairs {
        let sent = sentence(&mut rng);
        let input: Vec<&str> = sent.iter().map(|&(_, w)| w).collect();
        let output: Vec<&str> = sent
            .iter()
            .map(|&(slot, w)| {
                if slot.paraphrasable() && rng.random_bool(0.2) {
                    slot.words().choose(&mut rng).expect("word lists non-empty")
                } else {
                    w
                }
            })
            .collect();
        pairs.push(
            ParallelPair::new(Text::whitespace(input.join(" ")), Text::whitespace(output.join(" ")))
                .expect("grammar sentences are non-empty"),
        );
    }
    Ok(pairs)
}
