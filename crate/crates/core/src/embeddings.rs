//! Bilingual skip-gram embeddings with negative sampling, from scratch.
//!
//! Tokens are single characters: both scripts use atomic symbols, so there
//! is nothing to segment. Source and target sentences are interleaved as
//! independent training lines; no cross-lingual objective is added, and no
//! frequent-token subsampling is applied. Training is single-threaded with
//! a fixed update order, so a seed pins the resulting table bit for bit.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::SentencePair;
use crate::error::{Error, Result};
use crate::util::{derive_seed, derive_seed2};

/// Token inventory with frequency counts and the unigram noise
/// distribution (counts^0.75, normalized).
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    index: HashMap<char, usize>,
    tokens: Vec<char>,
    counts: Vec<u64>,
    noise: Vec<f64>,
}

impl Vocab {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: char) -> Option<usize> {
        self.index.get(&token).copied()
    }

    pub fn token(&self, index: usize) -> Option<char> {
        self.tokens.get(index).copied()
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts[index]
    }

    /// Noise probability of each token.
    pub fn noise_distribution(&self) -> &[f64] {
        &self.noise
    }
}

/// Count characters, drop those below `min_count`, and assign dense indices
/// (descending count, ties by codepoint).
pub fn build_vocab(sentences: &[String], min_count: u64) -> Vocab {
    let mut counts: HashMap<char, u64> = HashMap::new();
    for sentence in sentences {
        for c in sentence.chars() {
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(char, u64)> = counts
        .into_iter()
        .filter(|&(_, n)| n >= min_count)
        .collect();
    kept.sort_by_key(|&(c, n)| (std::cmp::Reverse(n), c));

    let tokens: Vec<char> = kept.iter().map(|&(c, _)| c).collect();
    let counts: Vec<u64> = kept.iter().map(|&(_, n)| n).collect();
    let index = tokens.iter().enumerate().map(|(i, &c)| (c, i)).collect();

    let weights: Vec<f64> = counts.iter().map(|&n| (n as f64).powf(0.75)).collect();
    let total: f64 = weights.iter().sum();
    let noise = if total > 0.0 {
        weights.iter().map(|w| w / total).collect()
    } else {
        Vec::new()
    };
    Vocab {
        index,
        tokens,
        counts,
        noise,
    }
}

/// Input and output (context) vector blocks, V×D each.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub input: Vec<Vec<f64>>,
    pub output: Vec<Vec<f64>>,
}

impl EmbeddingTable {
    /// Seeded init: input vectors uniform in [-0.5/D, 0.5/D], output zeros.
    pub fn init(vocab_size: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 0.5 / dim as f64;
        let input = (0..vocab_size)
            .map(|_| (0..dim).map(|_| rng.gen_range(-bound..bound)).collect())
            .collect();
        let output = vec![vec![0.0; dim]; vocab_size];
        EmbeddingTable {
            dim,
            input,
            output,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.input.len()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// SGNS loss for one (center, context, negatives) triple:
/// `-ln σ(u_ctx·v_c) - Σ_neg ln σ(-u_neg·v_c)`.
pub fn sgns_loss(table: &EmbeddingTable, center: usize, context: usize, negatives: &[usize]) -> f64 {
    let v = &table.input[center];
    let mut loss = -sigmoid(dot(&table.output[context], v)).ln();
    for &neg in negatives {
        loss -= sigmoid(-dot(&table.output[neg], v)).ln();
    }
    loss
}

/// One SGNS gradient step. Touches only the center's input row and the
/// context/negative output rows; returns the loss at the pre-update point.
pub fn sgns_step(
    table: &mut EmbeddingTable,
    center: usize,
    context: usize,
    negatives: &[usize],
    lr: f64,
) -> Result<f64> {
    let v_count = table.vocab_size();
    for &idx in [center, context].iter().chain(negatives) {
        if idx >= v_count {
            return Err(Error::Argument(format!(
                "token index {idx} out of range for vocabulary of {v_count}"
            )));
        }
    }

    let v = table.input[center].clone();
    let mut v_grad = vec![0.0; table.dim];
    let mut loss = 0.0;

    // positive term
    let s = sigmoid(dot(&table.output[context], &v));
    loss -= s.ln();
    let g = s - 1.0;
    for d in 0..table.dim {
        v_grad[d] += g * table.output[context][d];
    }
    let ctx_grad: Vec<f64> = v.iter().map(|&x| g * x).collect();

    // negative terms, gradients all taken at the pre-update point
    let mut neg_grads: Vec<(usize, Vec<f64>)> = Vec::with_capacity(negatives.len());
    for &neg in negatives {
        let s = sigmoid(dot(&table.output[neg], &v));
        loss -= (1.0 - s).ln();
        for d in 0..table.dim {
            v_grad[d] += s * table.output[neg][d];
        }
        neg_grads.push((neg, v.iter().map(|&x| s * x).collect()));
    }

    for d in 0..table.dim {
        table.output[context][d] -= lr * ctx_grad[d];
    }
    for (neg, grad) in neg_grads {
        for d in 0..table.dim {
            table.output[neg][d] -= lr * grad[d];
        }
    }
    for d in 0..table.dim {
        table.input[center][d] -= lr * v_grad[d];
    }
    Ok(loss)
}

/// Training hyperparameters. Defaults follow the canonical recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub min_count: u64,
    pub negatives: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dim: 300,
            window: 10,
            min_count: 5,
            negatives: 10,
            epochs: 20,
            lr: 0.05,
            seed: 0,
        }
    }
}

/// A trained table plus its vocabulary and per-epoch mean losses.
#[derive(Debug, Clone)]
pub struct TrainedEmbeddings {
    pub table: EmbeddingTable,
    pub vocab: Vocab,
    pub epoch_losses: Vec<f64>,
}

struct NoiseSampler {
    cumulative: Vec<f64>,
}

impl NoiseSampler {
    fn new(noise: &[f64]) -> Self {
        let mut cumulative = Vec::with_capacity(noise.len());
        let mut acc = 0.0;
        for &p in noise {
            acc += p;
            cumulative.push(acc);
        }
        NoiseSampler { cumulative }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let x: f64 = rng.gen();
        match self
            .cumulative
            .binary_search_by(|p| p.partial_cmp(&x).unwrap())
        {
            Ok(i) | Err(i) => i.min(self.cumulative.len() - 1),
        }
    }
}

/// Train skip-gram with negative sampling over raw sentence lines.
///
/// Deterministic given the seed: sentences stream in corpus order every
/// epoch, updates are single-threaded, and the learning rate decays
/// linearly from `lr` to `1e-4 * lr` over the full run. Negative draws
/// that hit the positive context token are discarded.
pub fn train_skipgram(corpus: &[String], config: &SkipGramConfig) -> Result<TrainedEmbeddings> {
    let vocab = build_vocab(corpus, config.min_count);
    if vocab.is_empty() {
        return Err(Error::Argument(
            "corpus yields an empty vocabulary at this min_count".into(),
        ));
    }
    if config.lr <= 0.0 {
        return Err(Error::Argument("learning rate must be positive".into()));
    }

    let encoded: Vec<Vec<usize>> = corpus
        .iter()
        .map(|s| s.chars().filter_map(|c| vocab.index_of(c)).collect())
        .filter(|t: &Vec<usize>| t.len() >= 2)
        .collect();

    let pairs_per_epoch: usize = encoded
        .iter()
        .map(|tokens| {
            (0..tokens.len())
                .map(|i| {
                    let lo = i.saturating_sub(config.window);
                    let hi = (i + config.window).min(tokens.len() - 1);
                    hi - lo
                })
                .sum::<usize>()
        })
        .sum();
    let total_steps = (pairs_per_epoch * config.epochs).max(1);

    let mut table = EmbeddingTable::init(vocab.len(), config.dim, derive_seed(config.seed, 0));
    let sampler = NoiseSampler::new(vocab.noise_distribution());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 1));

    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut step = 0usize;
    for _ in 0..config.epochs {
        let mut epoch_loss = 0.0;
        let mut epoch_pairs = 0usize;
        for tokens in &encoded {
            for center_pos in 0..tokens.len() {
                let lo = center_pos.saturating_sub(config.window);
                let hi = (center_pos + config.window).min(tokens.len() - 1);
                for ctx_pos in lo..=hi {
                    if ctx_pos == center_pos {
                        continue;
                    }
                    let center = tokens[center_pos];
                    let context = tokens[ctx_pos];
                    let progress = step as f64 / total_steps as f64;
                    let lr = config.lr * (1.0 - progress * (1.0 - 1e-4));
                    step += 1;

                    let negatives: Vec<usize> = (0..config.negatives)
                        .map(|_| sampler.draw(&mut rng))
                        .filter(|&n| n != context)
                        .collect();
                    epoch_loss += sgns_step(&mut table, center, context, &negatives, lr)?;
                    epoch_pairs += 1;
                }
            }
        }
        epoch_losses.push(if epoch_pairs > 0 {
            epoch_loss / epoch_pairs as f64
        } else {
            0.0
        });
    }

    Ok(TrainedEmbeddings {
        table,
        vocab,
        epoch_losses,
    })
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}

/// Top-k neighbors of `token` by cosine similarity over input vectors,
/// descending; the token itself is excluded and ties break by index.
pub fn nearest_neighbors(
    table: &EmbeddingTable,
    vocab: &Vocab,
    token: char,
    k: usize,
) -> Result<Vec<(char, f64)>> {
    let idx = vocab
        .index_of(token)
        .ok_or_else(|| Error::Argument(format!("token {token:?} is not in the vocabulary")))?;
    if k >= vocab.len() {
        return Err(Error::Argument(format!(
            "k must be smaller than the vocabulary size {}",
            vocab.len()
        )));
    }
    let query = &table.input[idx];
    let mut scored: Vec<(usize, f64)> = (0..vocab.len())
        .filter(|&i| i != idx)
        .map(|i| (i, cosine(query, &table.input[i])))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(i, s)| (vocab.token(i).unwrap(), s))
        .collect())
}

/// Interleave both sides of a parallel corpus as independent lines and
/// shuffle them (seeded). Empty targets (failed pairs) are skipped.
pub fn bilingual_lines(pairs: &[SentencePair], seed: u64) -> Vec<String> {
    let mut lines: Vec<String> = Vec::with_capacity(pairs.len() * 2);
    for pair in pairs {
        if !pair.source.is_empty() {
            lines.push(pair.source.clone());
        }
        if !pair.target.is_empty() {
            lines.push(pair.target.clone());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed2(seed, 0xb111, 0));
    lines.shuffle(&mut rng);
    lines
}

/// Standard word-vector text format: `V D` header, then one line per
/// token: the token and D space-separated input-vector components.
pub fn vectors_to_string(table: &EmbeddingTable, vocab: &Vocab) -> String {
    let mut out = format!("{} {}\n", vocab.len(), table.dim);
    for i in 0..vocab.len() {
        out.push(vocab.token(i).unwrap());
        for x in &table.input[i] {
            out.push_str(&format!(" {x}"));
        }
        out.push('\n');
    }
    out
}

pub fn save_vectors(
    table: &EmbeddingTable,
    vocab: &Vocab,
    path: &std::path::Path,
) -> Result<()> {
    crate::util::atomic_write(path, &vectors_to_string(table, vocab))?;
    Ok(())
}
