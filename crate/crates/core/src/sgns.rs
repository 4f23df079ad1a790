//! Skip-gram with negative sampling (SGNS) for training in-domain embeddings.
//!
//! The parameter matrices are shared between worker threads without locking
//! (asynchronous SGD). Each component is an `AtomicU32` holding `f32` bits
//! and accessed with relaxed ordering, so concurrent updates may be lost but
//! never torn. With `workers == 1` and a fixed seed, output is bit-identical
//! across runs.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};
use std::thread;

use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::embeddings::VectorStore;
use crate::error::{Error, Result};

/// Learning rate never decays below `initial_lr * LR_FLOOR`.
const LR_FLOOR: f64 = 1e-4;
const NEG_POWER: f64 = 0.75;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainerConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub min_count: usize,
    pub subsample_threshold: f64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            dim: 200,
            window: 5,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            min_count: 5,
            subsample_threshold: 1e-3,
            seed: 1,
            workers: 1,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("dim", self.dim),
            ("window", self.window),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
            ("min_count", self.min_count),
            ("workers", self.workers),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be at least 1")));
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::Config("initial_lr must be positive".into()));
        }
        if !(self.subsample_threshold >= 0.0 && self.subsample_threshold.is_finite()) {
            return Err(Error::Config("subsample_threshold must be >= 0".into()));
        }
        Ok(())
    }
}

/// Training vocabulary: words sorted by descending count (ties lexicographic).
#[derive(Clone, Debug)]
pub struct Vocab {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total_tokens: u64,
    discard_prob: Vec<f64>,
}

impl Vocab {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn count(&self, word: &str) -> Option<u64> {
        self.index_of(word).map(|i| self.counts[i])
    }

    /// Occurrences of retained words.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Probability that one occurrence of `word` is dropped during training.
    pub fn discard_prob(&self, word: &str) -> Option<f64> {
        self.index_of(word).map(|i| self.discard_prob[i])
    }

    /// Unnormalized negative-sampling weights, `count^0.75`, in index order.
    pub fn negative_weights(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| (c as f64).powf(NEG_POWER)).collect()
    }
}

/// Counts token norms, drops rare words and computes word2vec-style
/// subsampling probabilities.
pub fn build_vocab(corpus: &Corpus, config: &TrainerConfig) -> Result<Vocab> {
    if corpus.token_count() == 0 {
        return Err(Error::Empty("cannot build a vocabulary from an empty corpus".into()));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for token in corpus.iter().flat_map(|s| &s.tokens) {
        *counts.entry(token.norm.as_str()).or_default() += 1;
    }
    let mut entries: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= config.min_count as u64)
        .collect();
    if entries.is_empty() {
        return Err(Error::Empty(format!(
            "no word occurs at least {} times",
            config.min_count
        )));
    }
    entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let total_tokens: u64 = entries.iter().map(|&(_, c)| c).sum();
    let threshold = config.subsample_threshold * total_tokens as f64;
    let discard_prob = entries
        .iter()
        .map(|&(_, c)| {
            if threshold <= 0.0 {
                return 0.0;
            }
            let c = c as f64;
            let keep = ((c / threshold).sqrt() + 1.0) * threshold / c;
            (1.0 - keep).clamp(0.0, 1.0)
        })
        .collect();

    let words: Vec<String> = entries.iter().map(|&(w, _)| w.to_string()).collect();
    let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    Ok(Vocab {
        words,
        counts: entries.iter().map(|&(_, c)| c).collect(),
        index,
        total_tokens,
        discard_prob,
    })
}

/// Per-epoch diagnostics from a training run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingStats {
    /// Mean SGNS objective per (center, context) pair, one entry per epoch:
    /// `log σ(u·v) + Σ_neg log σ(−u·v_neg)` evaluated before each update.
    pub epoch_objective: Vec<f64>,
    pub pairs_per_epoch: Vec<u64>,
}

struct SharedMatrix {
    data: Vec<AtomicU32>,
    dim: usize,
}

impl SharedMatrix {
    fn new(rows: usize, dim: usize, mut init: impl FnMut() -> f32) -> Self {
        SharedMatrix {
            data: (0..rows * dim).map(|_| AtomicU32::new(init().to_bits())).collect(),
            dim,
        }
    }

    fn row(&self, i: usize) -> &[AtomicU32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn into_array(self, rows: usize) -> Array2<f64> {
        let values = self
            .data
            .into_iter()
            .map(|a| f32::from_bits(a.into_inner()) as f64)
            .collect();
        Array2::from_shape_vec((rows, self.dim), values).expect("shape is rows * dim")
    }
}

#[inline]
fn load(a: &AtomicU32) -> f32 {
    f32::from_bits(a.load(Ordering::Relaxed))
}

#[inline]
fn store(a: &AtomicU32, v: f32) {
    a.store(v.to_bits(), Ordering::Relaxed);
}

fn dot(a: &[AtomicU32], b: &[AtomicU32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| load(x) * load(y)).sum()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `log σ(x)`, stable for large |x|.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

struct Trainer<'a> {
    config: &'a TrainerConfig,
    discard_prob: &'a [f64],
    negatives: WeightedIndex<f64>,
    input: SharedMatrix,
    output: SharedMatrix,
    processed: AtomicU64,
    total_work: f64,
}

#[derive(Default)]
struct ShardResult {
    objective: f64,
    pairs: u64,
}

impl Trainer<'_> {
    fn learning_rate(&self) -> f32 {
        let done = self.processed.load(Ordering::Relaxed) as f64;
        let frac = (1.0 - done / (self.total_work + 1.0)).max(LR_FLOOR);
        (self.config.initial_lr * frac) as f32
    }

    fn run_shard(&self, sentences: &[Vec<u32>], rng: &mut ChaCha8Rng) -> ShardResult {
        let dim = self.config.dim;
        let mut result = ShardResult::default();
        let mut grad = vec![0f32; dim];
        let mut kept = Vec::new();

        for sentence in sentences {
            kept.clear();
            kept.extend(sentence.iter().copied().filter(|&w| {
                let p = self.discard_prob[w as usize];
                p <= 0.0 || rng.random::<f64>() >= p
            }));
            let lr = self.learning_rate();

            for (pos, &center) in kept.iter().enumerate() {
                let radius = rng.random_range(1..=self.config.window);
                let lo = pos.saturating_sub(radius);
                let hi = (pos + radius).min(kept.len() - 1);
                let center_vec = self.input.row(center as usize);

                for (ctx_pos, &context) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                    if ctx_pos == pos {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let mut objective = 0.0;

                    for k in 0..=self.config.negatives {
                        let (target, label) = if k == 0 {
                            (context as usize, 1.0)
                        } else {
                            let t = self.negatives.sample(rng);
                            if t == context as usize {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let target_vec = self.output.row(target);
                        let f = dot(center_vec, target_vec) as f64;
                        objective += if label > 0.0 { log_sigmoid(f) } else { log_sigmoid(-f) };
                        let g = ((label - sigmoid(f)) as f32) * lr;
                        for ((gi, c), t) in grad.iter_mut().zip(center_vec).zip(target_vec) {
                            let tv = load(t);
                            *gi += g * tv;
                            store(t, tv + g * load(c));
                        }
                    }
                    for (c, gi) in center_vec.iter().zip(&grad) {
                        store(c, load(c) + gi);
                    }
                    result.objective += objective;
                    result.pairs += 1;
                }
            }
            self.processed.fetch_add(sentence.len() as u64, Ordering::Relaxed);
        }
        result
    }
}

fn shard_seed(seed: u64, epoch: usize, worker: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ ((epoch as u64) << 32 | worker as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Trains SGNS embeddings and returns the input-side vectors.
pub fn train(corpus: &Corpus, config: &TrainerConfig) -> Result<VectorStore> {
    train_with_stats(corpus, config).map(|(store, _)| store)
}

pub fn train_with_stats(corpus: &Corpus, config: &TrainerConfig) -> Result<(VectorStore, TrainingStats)> {
    config.validate()?;
    let vocab = build_vocab(corpus, config)?;
    let encoded: Vec<Vec<u32>> = corpus
        .iter()
        .map(|s| {
            s.tokens
                .iter()
                .filter_map(|t| vocab.index_of(&t.norm).map(|i| i as u32))
                .collect::<Vec<u32>>()
        })
        .filter(|s| !s.is_empty())
        .collect();

    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dim = config.dim;
    let input = SharedMatrix::new(vocab.len(), dim, || (init_rng.random::<f32>() - 0.5) / dim as f32);
    let output = SharedMatrix::new(vocab.len(), dim, || 0.0);
    let negatives = WeightedIndex::new(vocab.negative_weights())
        .map_err(|e| Error::Config(format!("negative sampling table: {e}")))?;

    let trainer = Trainer {
        config,
        discard_prob: &vocab.discard_prob,
        negatives,
        input,
        output,
        processed: AtomicU64::new(0),
        total_work: (config.epochs as u64 * vocab.total_tokens) as f64,
    };

    let workers = config.workers.min(encoded.len().max(1));
    let shard_len = encoded.len().div_ceil(workers).max(1);
    let mut stats = TrainingStats::default();

    for epoch in 0..config.epochs {
        let results: Vec<ShardResult> = if workers == 1 {
            let mut rng = ChaCha8Rng::seed_from_u64(shard_seed(config.seed, epoch, 0));
            vec![trainer.run_shard(&encoded, &mut rng)]
        } else {
            thread::scope(|scope| {
                let handles: Vec<_> = encoded
                    .chunks(shard_len)
                    .enumerate()
                    .map(|(worker, shard)| {
                        let trainer = &trainer;
                        scope.spawn(move || {
                            let mut rng = ChaCha8Rng::seed_from_u64(shard_seed(config.seed, epoch, worker));
                            trainer.run_shard(shard, &mut rng)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .collect()
            })
        };
        let pairs: u64 = results.iter().map(|r| r.pairs).sum();
        let objective: f64 = results.iter().map(|r| r.objective).sum();
        stats.pairs_per_epoch.push(pairs);
        stats
            .epoch_objective
            .push(if pairs > 0 { objective / pairs as f64 } else { 0.0 });
        log::debug!(
            "epoch {}: {} pairs, mean objective {:.4}",
            epoch + 1,
            pairs,
            stats.epoch_objective[epoch]
        );
    }

    let matrix = trainer.input.into_array(vocab.len());
    let store = VectorStore::from_rows(vocab.words.clone(), matrix)?;
    Ok((store, stats))
}
