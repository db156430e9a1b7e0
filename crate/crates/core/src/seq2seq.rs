//! Character-level encoder-decoder MT with manual backpropagation, plus the
//! incremental-dataset experiment runner.
//!
//! Single-layer GRU encoder and decoder, teacher-forced cross-entropy, plain
//! gradient descent with global-norm clipping. Dot-product attention is a
//! config flag; the default is the plain fixed-length bottleneck. Everything
//! is f64 and single-threaded per run, so a seed pins the parameters
//! bit for bit; the experiment runner parallelizes across independent
//! (size, seed) cells only.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::SentencePair;
use crate::error::{Error, Result};
use crate::eval::{evaluate_suite, EvalResult};
use crate::util::{derive_seed, derive_seed2};

pub const BOS: usize = 0;
pub const EOS: usize = 1;
pub const PAD: usize = 2;
pub const UNK: usize = 3;
const RESERVED: usize = 4;

/// Character vocabulary with the four reserved tokens at fixed indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqVocab {
    index: HashMap<char, usize>,
    chars: Vec<char>,
}

impl SeqVocab {
    /// Collect every character (sorted by codepoint for determinism).
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let set: BTreeSet<char> = texts.into_iter().flat_map(|t| t.chars()).collect();
        let chars: Vec<char> = set.into_iter().collect();
        let index = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i + RESERVED))
            .collect();
        SeqVocab { index, chars }
    }

    pub fn size(&self) -> usize {
        RESERVED + self.chars.len()
    }

    /// Character tokens; unknown characters map to UNK.
    pub fn encode(&self, text: &str) -> Vec<usize> {
        text.chars()
            .map(|c| self.index.get(&c).copied().unwrap_or(UNK))
            .collect()
    }

    pub fn token_char(&self, index: usize) -> Option<char> {
        if index >= RESERVED {
            self.chars.get(index - RESERVED).copied()
        } else {
            None
        }
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    fn uniform(rows: usize, cols: usize, bound: f64, rng: &mut ChaCha8Rng) -> Self {
        Mat {
            rows,
            cols,
            data: (0..rows * cols).map(|_| rng.gen_range(-bound..bound)).collect(),
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// y = M x
    fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// x = Mᵀ y
    fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            if yi != 0.0 {
                for (o, &m) in out.iter_mut().zip(self.row(i)) {
                    *o += yi * m;
                }
            }
        }
        out
    }

    /// M += y xᵀ
    fn add_outer(&mut self, y: &[f64], x: &[f64]) {
        for i in 0..self.rows {
            let yi = y[i];
            if yi != 0.0 {
                for (m, &xj) in self.row_mut(i).iter_mut().zip(x) {
                    *m += yi * xj;
                }
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(out: &mut [f64], scale: f64, x: &[f64]) {
    for (o, &v) in out.iter_mut().zip(x) {
        *o += scale * v;
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Gated recurrent cell parameters. W: H×E, U: H×H, b: H.
#[derive(Debug, Clone, PartialEq)]
pub struct GruCell {
    pub w_z: Mat,
    pub u_z: Mat,
    pub b_z: Vec<f64>,
    pub w_r: Mat,
    pub u_r: Mat,
    pub b_r: Vec<f64>,
    pub w_c: Mat,
    pub u_c: Mat,
    pub b_c: Vec<f64>,
}

impl GruCell {
    fn init(embed_dim: usize, hidden_dim: usize, bound: f64, rng: &mut ChaCha8Rng) -> Self {
        GruCell {
            w_z: Mat::uniform(hidden_dim, embed_dim, bound, rng),
            u_z: Mat::uniform(hidden_dim, hidden_dim, bound, rng),
            b_z: vec![0.0; hidden_dim],
            w_r: Mat::uniform(hidden_dim, embed_dim, bound, rng),
            u_r: Mat::uniform(hidden_dim, hidden_dim, bound, rng),
            b_r: vec![0.0; hidden_dim],
            w_c: Mat::uniform(hidden_dim, embed_dim, bound, rng),
            u_c: Mat::uniform(hidden_dim, hidden_dim, bound, rng),
            b_c: vec![0.0; hidden_dim],
        }
    }

    fn zeros(embed_dim: usize, hidden_dim: usize) -> Self {
        GruCell {
            w_z: Mat::zeros(hidden_dim, embed_dim),
            u_z: Mat::zeros(hidden_dim, hidden_dim),
            b_z: vec![0.0; hidden_dim],
            w_r: Mat::zeros(hidden_dim, embed_dim),
            u_r: Mat::zeros(hidden_dim, hidden_dim),
            b_r: vec![0.0; hidden_dim],
            w_c: Mat::zeros(hidden_dim, embed_dim),
            u_c: Mat::zeros(hidden_dim, hidden_dim),
            b_c: vec![0.0; hidden_dim],
        }
    }
}

struct GruStepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    rh: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
}

fn gru_forward(cell: &GruCell, x: &[f64], h_prev: &[f64]) -> GruStepCache {
    let hidden = h_prev.len();
    let mut z = cell.w_z.matvec(x);
    axpy_vec(&mut z, &cell.u_z.matvec(h_prev));
    for (v, b) in z.iter_mut().zip(&cell.b_z) {
        *v = sigmoid(*v + b);
    }
    let mut r = cell.w_r.matvec(x);
    axpy_vec(&mut r, &cell.u_r.matvec(h_prev));
    for (v, b) in r.iter_mut().zip(&cell.b_r) {
        *v = sigmoid(*v + b);
    }
    let rh: Vec<f64> = r.iter().zip(h_prev).map(|(a, b)| a * b).collect();
    let mut c = cell.w_c.matvec(x);
    axpy_vec(&mut c, &cell.u_c.matvec(&rh));
    for (v, b) in c.iter_mut().zip(&cell.b_c) {
        *v = (*v + b).tanh();
    }
    let mut h = vec![0.0; hidden];
    for i in 0..hidden {
        h[i] = (1.0 - z[i]) * h_prev[i] + z[i] * c[i];
    }
    GruStepCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        z,
        r,
        rh,
        c,
        h,
    }
}

fn axpy_vec(out: &mut [f64], x: &[f64]) {
    for (o, &v) in out.iter_mut().zip(x) {
        *o += v;
    }
}

/// Backward through one GRU step; returns (dh_prev, dx).
fn gru_backward(
    cell: &GruCell,
    grads: &mut GruCell,
    cache: &GruStepCache,
    dh: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let hidden = dh.len();
    let mut dz = vec![0.0; hidden];
    let mut dc = vec![0.0; hidden];
    let mut dh_prev = vec![0.0; hidden];
    for i in 0..hidden {
        dz[i] = dh[i] * (cache.c[i] - cache.h_prev[i]);
        dc[i] = dh[i] * cache.z[i];
        dh_prev[i] = dh[i] * (1.0 - cache.z[i]);
    }

    let da_c: Vec<f64> = dc
        .iter()
        .zip(&cache.c)
        .map(|(&d, &c)| d * (1.0 - c * c))
        .collect();
    grads.w_c.add_outer(&da_c, &cache.x);
    grads.u_c.add_outer(&da_c, &cache.rh);
    axpy_vec(&mut grads.b_c, &da_c);
    let d_rh = cell.u_c.matvec_t(&da_c);
    let dr: Vec<f64> = d_rh.iter().zip(&cache.h_prev).map(|(a, b)| a * b).collect();
    for i in 0..hidden {
        dh_prev[i] += d_rh[i] * cache.r[i];
    }

    let da_r: Vec<f64> = dr
        .iter()
        .zip(&cache.r)
        .map(|(&d, &r)| d * r * (1.0 - r))
        .collect();
    grads.w_r.add_outer(&da_r, &cache.x);
    grads.u_r.add_outer(&da_r, &cache.h_prev);
    axpy_vec(&mut grads.b_r, &da_r);
    axpy_vec(&mut dh_prev, &cell.u_r.matvec_t(&da_r));

    let da_z: Vec<f64> = dz
        .iter()
        .zip(&cache.z)
        .map(|(&d, &z)| d * z * (1.0 - z))
        .collect();
    grads.w_z.add_outer(&da_z, &cache.x);
    grads.u_z.add_outer(&da_z, &cache.h_prev);
    axpy_vec(&mut grads.b_z, &da_z);
    axpy_vec(&mut dh_prev, &cell.u_z.matvec_t(&da_z));

    let mut dx = cell.w_z.matvec_t(&da_z);
    axpy_vec(&mut dx, &cell.w_r.matvec_t(&da_r));
    axpy_vec(&mut dx, &cell.w_c.matvec_t(&da_c));
    (dh_prev, dx)
}

/// Model dimensions and the attention switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub attention: bool,
}

/// All trainable blocks plus the vocabularies they are tied to.
#[derive(Debug, Clone, PartialEq)]
pub struct Seq2SeqParams {
    pub config: ModelConfig,
    pub src_vocab: SeqVocab,
    pub tgt_vocab: SeqVocab,
    pub src_embed: Mat,
    pub tgt_embed: Mat,
    pub encoder: GruCell,
    pub decoder: GruCell,
    /// Output projection, |V_tgt|×H. Zero-initialized so the initial
    /// output distribution is exactly uniform.
    pub w_out: Mat,
    pub b_out: Vec<f64>,
}

impl Seq2SeqParams {
    pub fn init(src_vocab: SeqVocab, tgt_vocab: SeqVocab, config: ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 0.1;
        let src_embed = Mat::uniform(src_vocab.size(), config.embed_dim, bound, &mut rng);
        let tgt_embed = Mat::uniform(tgt_vocab.size(), config.embed_dim, bound, &mut rng);
        let encoder = GruCell::init(config.embed_dim, config.hidden_dim, bound, &mut rng);
        let decoder = GruCell::init(config.embed_dim, config.hidden_dim, bound, &mut rng);
        let w_out = Mat::zeros(tgt_vocab.size(), config.hidden_dim);
        let b_out = vec![0.0; tgt_vocab.size()];
        Seq2SeqParams {
            config,
            src_vocab,
            tgt_vocab,
            src_embed,
            tgt_embed,
            encoder,
            decoder,
            w_out,
            b_out,
        }
    }

    fn blocks_mut(&mut self) -> Vec<&mut Vec<f64>> {
        vec![
            &mut self.src_embed.data,
            &mut self.tgt_embed.data,
            &mut self.encoder.w_z.data,
            &mut self.encoder.u_z.data,
            &mut self.encoder.b_z,
            &mut self.encoder.w_r.data,
            &mut self.encoder.u_r.data,
            &mut self.encoder.b_r,
            &mut self.encoder.w_c.data,
            &mut self.encoder.u_c.data,
            &mut self.encoder.b_c,
            &mut self.decoder.w_z.data,
            &mut self.decoder.u_z.data,
            &mut self.decoder.b_z,
            &mut self.decoder.w_r.data,
            &mut self.decoder.u_r.data,
            &mut self.decoder.b_r,
            &mut self.decoder.w_c.data,
            &mut self.decoder.u_c.data,
            &mut self.decoder.b_c,
            &mut self.w_out.data,
            &mut self.b_out,
        ]
    }
}

/// Gradient blocks, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub src_embed: Mat,
    pub tgt_embed: Mat,
    pub encoder: GruCell,
    pub decoder: GruCell,
    pub w_out: Mat,
    pub b_out: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(params: &Seq2SeqParams) -> Self {
        let e = params.config.embed_dim;
        let h = params.config.hidden_dim;
        Gradients {
            src_embed: Mat::zeros(params.src_vocab.size(), e),
            tgt_embed: Mat::zeros(params.tgt_vocab.size(), e),
            encoder: GruCell::zeros(e, h),
            decoder: GruCell::zeros(e, h),
            w_out: Mat::zeros(params.tgt_vocab.size(), h),
            b_out: vec![0.0; params.tgt_vocab.size()],
        }
    }

    fn blocks(&self) -> Vec<&Vec<f64>> {
        vec![
            &self.src_embed.data,
            &self.tgt_embed.data,
            &self.encoder.w_z.data,
            &self.encoder.u_z.data,
            &self.encoder.b_z,
            &self.encoder.w_r.data,
            &self.encoder.u_r.data,
            &self.encoder.b_r,
            &self.encoder.w_c.data,
            &self.encoder.u_c.data,
            &self.encoder.b_c,
            &self.decoder.w_z.data,
            &self.decoder.u_z.data,
            &self.decoder.b_z,
            &self.decoder.w_r.data,
            &self.decoder.u_r.data,
            &self.decoder.b_r,
            &self.decoder.w_c.data,
            &self.decoder.u_c.data,
            &self.decoder.b_c,
            &self.w_out.data,
            &self.b_out,
        ]
    }

    fn blocks_mut(&mut self) -> Vec<&mut Vec<f64>> {
        vec![
            &mut self.src_embed.data,
            &mut self.tgt_embed.data,
            &mut self.encoder.w_z.data,
            &mut self.encoder.u_z.data,
            &mut self.encoder.b_z,
            &mut self.encoder.w_r.data,
            &mut self.encoder.u_r.data,
            &mut self.encoder.b_r,
            &mut self.encoder.w_c.data,
            &mut self.encoder.u_c.data,
            &mut self.encoder.b_c,
            &mut self.decoder.w_z.data,
            &mut self.decoder.u_z.data,
            &mut self.decoder.b_z,
            &mut self.decoder.w_r.data,
            &mut self.decoder.u_r.data,
            &mut self.decoder.b_r,
            &mut self.decoder.w_c.data,
            &mut self.decoder.u_c.data,
            &mut self.decoder.b_c,
            &mut self.w_out.data,
            &mut self.b_out,
        ]
    }

    pub fn global_norm(&self) -> f64 {
        self.blocks()
            .iter()
            .flat_map(|b| b.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for block in self.blocks_mut() {
            for x in block.iter_mut() {
                *x *= factor;
            }
        }
    }
}

/// `params -= lr * grads`
pub fn apply_gradients(params: &mut Seq2SeqParams, grads: &Gradients, lr: f64) {
    for (p, g) in params.blocks_mut().into_iter().zip(grads.blocks()) {
        for (pv, gv) in p.iter_mut().zip(g.iter()) {
            *pv -= lr * gv;
        }
    }
}

/// Pad token sequences to the batch max with PAD.
pub fn pad_batch(mut batch: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let max = batch.iter().map(Vec::len).max().unwrap_or(0);
    for seq in batch.iter_mut() {
        seq.resize(max, PAD);
    }
    batch
}

/// Encode sources and pad.
pub fn encode_sources(vocab: &SeqVocab, texts: &[&str]) -> Vec<Vec<usize>> {
    pad_batch(texts.iter().map(|t| vocab.encode(t)).collect())
}

/// Encode targets wrapped in BOS/EOS, then pad.
pub fn encode_targets(vocab: &SeqVocab, texts: &[&str]) -> Vec<Vec<usize>> {
    pad_batch(
        texts
            .iter()
            .map(|t| {
                let mut seq = vec![BOS];
                seq.extend(vocab.encode(t));
                seq.push(EOS);
                seq
            })
            .collect(),
    )
}

fn effective_len(seq: &[usize]) -> usize {
    seq.iter().position(|&t| t == PAD).unwrap_or(seq.len())
}

fn check_tokens(batch: &[Vec<usize>], vocab_size: usize, side: &str) -> Result<()> {
    for seq in batch {
        for &tok in seq {
            if tok >= vocab_size {
                return Err(Error::Argument(format!(
                    "{side} token index {tok} out of range for vocabulary of {vocab_size}"
                )));
            }
        }
    }
    Ok(())
}

/// Teacher-forced cross-entropy over one padded batch, averaged over
/// non-PAD target tokens, plus gradients for every parameter block. PAD
/// positions contribute nothing to either.
pub fn forward_loss(
    params: &Seq2SeqParams,
    src_batch: &[Vec<usize>],
    tgt_batch: &[Vec<usize>],
) -> Result<(f64, Gradients)> {
    if src_batch.len() != tgt_batch.len() {
        return Err(Error::Argument(format!(
            "batch size mismatch: {} sources vs {} targets",
            src_batch.len(),
            tgt_batch.len()
        )));
    }
    check_tokens(src_batch, params.src_vocab.size(), "source")?;
    check_tokens(tgt_batch, params.tgt_vocab.size(), "target")?;

    let hidden = params.config.hidden_dim;
    let mut grads = Gradients::zeros_like(params);

    // token-mean scaling needs the total up front
    let total_tokens: usize = tgt_batch
        .iter()
        .map(|t| effective_len(&t[1..].to_vec()))
        .sum();
    if total_tokens == 0 {
        return Ok((0.0, grads));
    }
    let scale = 1.0 / total_tokens as f64;
    let mut loss_sum = 0.0;

    for (src, tgt) in src_batch.iter().zip(tgt_batch) {
        let src_len = effective_len(src);
        let expected = &tgt[1..];
        let steps = effective_len(expected);
        if steps == 0 {
            continue;
        }

        // encoder
        let mut enc_caches: Vec<GruStepCache> = Vec::with_capacity(src_len);
        let mut h = vec![0.0; hidden];
        for &tok in &src[..src_len] {
            let cache = gru_forward(&params.encoder, params.src_embed.row(tok), &h);
            h = cache.h.clone();
            enc_caches.push(cache);
        }
        let enc_final = h.clone();

        // decoder, teacher-forced
        struct DecStep {
            cache: GruStepCache,
            combined: Vec<f64>,
            probs: Vec<f64>,
            expected: usize,
            in_tok: usize,
            alpha: Vec<f64>,
        }
        let mut dec_steps: Vec<DecStep> = Vec::with_capacity(steps);
        let mut h = enc_final.clone();
        for t in 0..steps {
            let in_tok = tgt[t];
            let cache = gru_forward(&params.decoder, params.tgt_embed.row(in_tok), &h);
            h = cache.h.clone();

            let (combined, alpha) = if params.config.attention && !enc_caches.is_empty() {
                let scores: Vec<f64> =
                    enc_caches.iter().map(|e| dot(&h, &e.h)).collect();
                let alpha = softmax(&scores);
                let mut ctx = vec![0.0; hidden];
                for (a, e) in alpha.iter().zip(&enc_caches) {
                    axpy(&mut ctx, *a, &e.h);
                }
                axpy_vec(&mut ctx, &h);
                (ctx, alpha)
            } else {
                (h.clone(), Vec::new())
            };

            let mut logits = params.w_out.matvec(&combined);
            axpy_vec(&mut logits, &params.b_out);
            let probs = softmax(&logits);
            let expected_tok = expected[t];
            loss_sum += log_sum_exp(&logits) - logits[expected_tok];
            dec_steps.push(DecStep {
                cache,
                combined,
                probs,
                expected: expected_tok,
                in_tok,
                alpha,
            });
        }

        // backward through the decoder
        let mut denc: Vec<Vec<f64>> = vec![vec![0.0; hidden]; enc_caches.len()];
        let mut dh = vec![0.0; hidden];
        for step in dec_steps.iter().rev() {
            let mut dlogits = step.probs.clone();
            dlogits[step.expected] -= 1.0;
            for v in dlogits.iter_mut() {
                *v *= scale;
            }
            grads.w_out.add_outer(&dlogits, &step.combined);
            axpy_vec(&mut grads.b_out, &dlogits);
            let dcombined = params.w_out.matvec_t(&dlogits);

            if params.config.attention && !enc_caches.is_empty() {
                // combined = h + Σ α_s enc_s with α = softmax(h·enc_s)
                axpy_vec(&mut dh, &dcombined);
                let dctx = &dcombined;
                let dalpha: Vec<f64> = enc_caches.iter().map(|e| dot(dctx, &e.h)).collect();
                for (s, e) in enc_caches.iter().enumerate() {
                    axpy(&mut denc[s], step.alpha[s], dctx);
                    let _ = e;
                }
                let inner: f64 = step
                    .alpha
                    .iter()
                    .zip(&dalpha)
                    .map(|(a, d)| a * d)
                    .sum();
                let dscores: Vec<f64> = step
                    .alpha
                    .iter()
                    .zip(&dalpha)
                    .map(|(a, d)| a * (d - inner))
                    .collect();
                for (s, e) in enc_caches.iter().enumerate() {
                    axpy(&mut dh, dscores[s], &e.h);
                    axpy(&mut denc[s], dscores[s], &step.cache.h);
                }
            } else {
                axpy_vec(&mut dh, &dcombined);
            }

            let (dh_prev, dx) = gru_backward(&params.decoder, &mut grads.decoder, &step.cache, &dh);
            axpy_vec(grads.tgt_embed.row_mut(step.in_tok), &dx);
            dh = dh_prev;
        }

        // dh now holds the gradient w.r.t. the encoder's final state
        for (s, cache) in enc_caches.iter().enumerate().rev() {
            axpy_vec(&mut dh, &denc[s]);
            let (dh_prev, dx) = gru_backward(&params.encoder, &mut grads.encoder, cache, &dh);
            axpy_vec(grads.src_embed.row_mut(src[s]), &dx);
            dh = dh_prev;
        }
    }

    Ok((loss_sum * scale, grads))
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub lr: f64,
    pub clip: f64,
    pub attention: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 3,
            epochs: 15,
            embed_dim: 32,
            hidden_dim: 64,
            lr: 0.05,
            clip: 5.0,
            attention: false,
            seed: 0,
        }
    }
}

/// A finished run: config, per-epoch mean losses, and the trained model.
#[derive(Debug, Clone)]
pub struct TrainRun {
    pub config: TrainConfig,
    pub epoch_losses: Vec<f64>,
    pub params: Seq2SeqParams,
}

/// Train from scratch on parallel pairs. Deterministic per seed: epoch
/// shuffles, init, and update order are all derived from it.
pub fn train_mt(pairs: &[SentencePair], config: &TrainConfig) -> Result<TrainRun> {
    if pairs.is_empty() {
        return Err(Error::Argument("training set is empty".into()));
    }
    let src_vocab = SeqVocab::build(pairs.iter().map(|p| p.source.as_str()));
    let tgt_vocab = SeqVocab::build(pairs.iter().map(|p| p.target.as_str()));
    let model_config = ModelConfig {
        embed_dim: config.embed_dim,
        hidden_dim: config.hidden_dim,
        attention: config.attention,
    };
    let mut params = Seq2SeqParams::init(
        src_vocab,
        tgt_vocab,
        model_config,
        derive_seed(config.seed, 0),
    );

    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    for epoch in 0..config.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed2(config.seed, 1, epoch as u64));
        order.shuffle(&mut rng);

        let mut loss_weighted = 0.0;
        let mut tokens_total = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let sources: Vec<&str> = chunk.iter().map(|&i| pairs[i].source.as_str()).collect();
            let targets: Vec<&str> = chunk.iter().map(|&i| pairs[i].target.as_str()).collect();
            let src_batch = encode_sources(&params.src_vocab, &sources);
            let tgt_batch = encode_targets(&params.tgt_vocab, &targets);
            let batch_tokens: usize = tgt_batch
                .iter()
                .map(|t| effective_len(&t[1..].to_vec()))
                .sum();
            let (loss, mut grads) = forward_loss(&params, &src_batch, &tgt_batch)?;
            let norm = grads.global_norm();
            if norm > config.clip {
                grads.scale(config.clip / norm);
            }
            apply_gradients(&mut params, &grads, config.lr);
            loss_weighted += loss * batch_tokens as f64;
            tokens_total += batch_tokens;
        }
        epoch_losses.push(if tokens_total > 0 {
            loss_weighted / tokens_total as f64
        } else {
            0.0
        });
    }

    Ok(TrainRun {
        config: *config,
        epoch_losses,
        params,
    })
}

/// Argmax decoding from BOS until EOS or `source length + 5` tokens.
/// Unknown source characters map to UNK; BOS/PAD are never emitted, and an
/// emitted UNK renders as U+FFFD.
pub fn greedy_decode(params: &Seq2SeqParams, source: &str) -> String {
    let src = params.src_vocab.encode(source);
    let hidden = params.config.hidden_dim;
    let mut h = vec![0.0; hidden];
    let mut enc_states: Vec<Vec<f64>> = Vec::with_capacity(src.len());
    for &tok in &src {
        let cache = gru_forward(&params.encoder, params.src_embed.row(tok), &h);
        h = cache.h;
        enc_states.push(h.clone());
    }

    let cap = src.len() + 5;
    let mut out = String::new();
    let mut token = BOS;
    for _ in 0..cap {
        let cache = gru_forward(&params.decoder, params.tgt_embed.row(token), &h);
        h = cache.h;
        let combined = if params.config.attention && !enc_states.is_empty() {
            let scores: Vec<f64> = enc_states.iter().map(|e| dot(&h, e)).collect();
            let alpha = softmax(&scores);
            let mut ctx = vec![0.0; hidden];
            for (a, e) in alpha.iter().zip(&enc_states) {
                axpy(&mut ctx, *a, e);
            }
            axpy_vec(&mut ctx, &h);
            ctx
        } else {
            h.clone()
        };
        let mut logits = params.w_out.matvec(&combined);
        axpy_vec(&mut logits, &params.b_out);
        logits[BOS] = f64::NEG_INFINITY;
        logits[PAD] = f64::NEG_INFINITY;
        let next = argmax(&logits);
        if next == EOS {
            break;
        }
        out.push(params.tgt_vocab.token_char(next).unwrap_or('\u{FFFD}'));
        token = next;
    }
    out
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Teacher-forced token accuracy over non-PAD target positions.
pub fn token_accuracy(params: &Seq2SeqParams, pairs: &[SentencePair]) -> f64 {
    let mut correct = 0usize;
    let mut total = 0usize;
    let hidden = params.config.hidden_dim;
    for pair in pairs {
        let src = params.src_vocab.encode(&pair.source);
        let mut tgt = vec![BOS];
        tgt.extend(params.tgt_vocab.encode(&pair.target));
        tgt.push(EOS);

        let mut h = vec![0.0; hidden];
        let mut enc_states = Vec::with_capacity(src.len());
        for &tok in &src {
            let cache = gru_forward(&params.encoder, params.src_embed.row(tok), &h);
            h = cache.h;
            enc_states.push(h.clone());
        }
        for t in 0..tgt.len() - 1 {
            let cache = gru_forward(&params.decoder, params.tgt_embed.row(tgt[t]), &h);
            h = cache.h;
            let combined = if params.config.attention && !enc_states.is_empty() {
                let scores: Vec<f64> = enc_states.iter().map(|e| dot(&h, e)).collect();
                let alpha = softmax(&scores);
                let mut ctx = vec![0.0; hidden];
                for (a, e) in alpha.iter().zip(&enc_states) {
                    axpy(&mut ctx, *a, e);
                }
                axpy_vec(&mut ctx, &h);
                ctx
            } else {
                h.clone()
            };
            let mut logits = params.w_out.matvec(&combined);
            axpy_vec(&mut logits, &params.b_out);
            if argmax(&logits) == tgt[t + 1] {
                correct += 1;
            }
            total += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

const MODEL_MAGIC: &[u8; 8] = b"NSMT0001";

/// Serialize the model: magic, dims, vocabularies (codepoints), then the
/// parameter blocks as little-endian f64, row-major.
pub fn model_to_bytes(params: &Seq2SeqParams) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&(params.config.attention as u32).to_le_bytes());
    out.extend_from_slice(&(params.config.embed_dim as u32).to_le_bytes());
    out.extend_from_slice(&(params.config.hidden_dim as u32).to_le_bytes());
    for vocab in [&params.src_vocab, &params.tgt_vocab] {
        out.extend_from_slice(&(vocab.chars.len() as u32).to_le_bytes());
        for &c in &vocab.chars {
            out.extend_from_slice(&(c as u32).to_le_bytes());
        }
    }
    let mut clone = params.clone();
    for block in clone.blocks_mut() {
        for x in block.iter() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn save_model(params: &Seq2SeqParams, path: &Path) -> Result<()> {
    let bytes = model_to_bytes(params);
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, &bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<Seq2SeqParams> {
    let mut cursor = 0usize;
    let take = |cursor: &mut usize, n: usize| -> Result<&[u8]> {
        let slice = bytes
            .get(*cursor..*cursor + n)
            .ok_or_else(|| Error::Validation("model file truncated".into()))?;
        *cursor += n;
        Ok(slice)
    };
    let read_u32 = |cursor: &mut usize| -> Result<u32> {
        Ok(u32::from_le_bytes(take(cursor, 4)?.try_into().unwrap()))
    };

    if take(&mut cursor, 8)? != MODEL_MAGIC {
        return Err(Error::Validation("not a model checkpoint".into()));
    }
    let attention = read_u32(&mut cursor)? != 0;
    let embed_dim = read_u32(&mut cursor)? as usize;
    let hidden_dim = read_u32(&mut cursor)? as usize;
    let mut vocabs = Vec::with_capacity(2);
    for _ in 0..2 {
        let len = read_u32(&mut cursor)? as usize;
        let mut chars = Vec::with_capacity(len);
        for _ in 0..len {
            let cp = read_u32(&mut cursor)?;
            chars.push(
                char::from_u32(cp)
                    .ok_or_else(|| Error::Validation(format!("bad codepoint U+{cp:04X}")))?,
            );
        }
        let index = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i + RESERVED))
            .collect();
        vocabs.push(SeqVocab { index, chars });
    }
    let tgt_vocab = vocabs.pop().unwrap();
    let src_vocab = vocabs.pop().unwrap();

    let config = ModelConfig {
        embed_dim,
        hidden_dim,
        attention,
    };
    let mut params = Seq2SeqParams::init(src_vocab, tgt_vocab, config, 0);
    for block in params.blocks_mut() {
        for x in block.iter_mut() {
            *x = f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap());
        }
    }
    if cursor != bytes.len() {
        return Err(Error::Validation("trailing bytes in model file".into()));
    }
    Ok(params)
}

pub fn load_model(path: &Path) -> Result<Seq2SeqParams> {
    model_from_bytes(&std::fs::read(path)?)
}

/// One experiment cell: train size, seed, and the resulting metric suite.
#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub train_size: usize,
    pub seed: u64,
    pub result: EvalResult,
}

/// Rows in (size, seed) order.
#[derive(Debug, Clone)]
pub struct ExperimentTable {
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentTable {
    /// Metric-table column order, then the seed.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "train_data\tbleu1\tbleu2\tbleu3\tmeteor\trouge1\trouge2\trougeL\tseed\n",
        );
        for row in &self.rows {
            let r = &row.result;
            out.push_str(&format!(
                "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}\n",
                row.train_size,
                r.bleu[0],
                r.bleu[1],
                r.bleu[2],
                r.meteor,
                r.rouge1,
                r.rouge2,
                r.rouge_l,
                row.seed
            ));
        }
        out
    }

    pub fn bleu1(&self, train_size: usize, seed: u64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.train_size == train_size && r.seed == seed)
            .map(|r| r.result.bleu[0])
    }
}

/// Train-from-scratch at every (size, seed) cell and evaluate on the fixed
/// test set. Training subsets are prefixes of gold followed by the silver
/// rounds flattened in round order; the test set must be disjoint from the
/// largest subset. Cells run in parallel; results are deterministic per
/// seed regardless of scheduling.
pub fn incremental_experiment(
    gold_train: &[SentencePair],
    silver_by_round: &[Vec<SentencePair>],
    sizes: &[usize],
    test: &[SentencePair],
    seeds: &[u64],
    config: &TrainConfig,
) -> Result<ExperimentTable> {
    if sizes.is_empty() || seeds.is_empty() {
        return Err(Error::Argument("sizes and seeds must be non-empty".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("sizes must be strictly ascending".into()));
    }
    if test.is_empty() {
        return Err(Error::Argument("test set is empty".into()));
    }
    let mut pool: Vec<SentencePair> = gold_train.to_vec();
    for round in silver_by_round {
        pool.extend(round.iter().cloned());
    }
    let max_size = *sizes.last().unwrap();
    if max_size > pool.len() {
        return Err(Error::Argument(format!(
            "size {max_size} exceeds the {} available training pairs",
            pool.len()
        )));
    }
    let test_keys: std::collections::HashSet<(&str, &str)> = test
        .iter()
        .map(|p| (p.source.as_str(), p.target.as_str()))
        .collect();
    for pair in &pool[..max_size] {
        if test_keys.contains(&(pair.source.as_str(), pair.target.as_str())) {
            return Err(Error::Argument(format!(
                "training subset overlaps the test set at {:?}",
                pair.source
            )));
        }
    }

    let references: Vec<String> = test.iter().map(|p| p.target.clone()).collect();
    let cells: Vec<(usize, u64)> = sizes
        .iter()
        .flat_map(|&size| seeds.iter().map(move |&seed| (size, seed)))
        .collect();

    let rows: Result<Vec<ExperimentRow>> = cells
        .par_iter()
        .map(|&(size, seed)| {
            let mut cell_config = *config;
            cell_config.seed = seed;
            let run = train_mt(&pool[..size], &cell_config)?;
            let predictions: Vec<String> = test
                .iter()
                .map(|p| greedy_decode(&run.params, &p.source))
                .collect();
            Ok(ExperimentRow {
                train_size: size,
                seed,
                result: evaluate_suite(&predictions, &references)?,
            })
        })
        .collect();

    Ok(ExperimentTable { rows: rows? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Status;

    fn toy_vocabs() -> (SeqVocab, SeqVocab) {
        // vocab size 6: four reserved + two characters
        (SeqVocab::build(["ab"]), SeqVocab::build(["xy"]))
    }

    #[test]
    fn vocab_reserves_special_indices() {
        let vocab = SeqVocab::build(["ba", "ab"]);
        assert_eq!(vocab.size(), 6);
        assert_eq!(vocab.encode("ab"), vec![4, 5]);
        assert_eq!(vocab.encode("aq"), vec![4, UNK]);
        assert_eq!(vocab.token_char(4), Some('a'));
        assert_eq!(vocab.token_char(BOS), None);
    }

    #[test]
    fn target_encoding_wraps_and_pads() {
        let vocab = SeqVocab::build(["ab"]);
        let batch = encode_targets(&vocab, &["ab", ""]);
        assert_eq!(batch[0], vec![BOS, 4, 5, EOS]);
        assert_eq!(batch[1], vec![BOS, EOS, PAD, PAD]);
    }

    fn random_params(seed: u64, attention: bool) -> Seq2SeqParams {
        let (src, tgt) = toy_vocabs();
        let config = ModelConfig {
            embed_dim: 4,
            hidden_dim: 4,
            attention,
        };
        let mut params = Seq2SeqParams::init(src, tgt, config, seed);
        // break the zero init of the output layer so its gradient check is
        // not trivially zero
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 77));
        for x in params.w_out.data.iter_mut() {
            *x = rng.gen_range(-0.3..0.3);
        }
        for x in params.b_out.iter_mut() {
            *x = rng.gen_range(-0.3..0.3);
        }
        params
    }

    fn fd_relative_error(params: &Seq2SeqParams) -> f64 {
        let src_batch = encode_sources(&params.src_vocab, &["ab", "ba", "a"]);
        let tgt_batch = encode_targets(&params.tgt_vocab, &["xy", "y", "yx"]);
        let (_, analytic) = forward_loss(params, &src_batch, &tgt_batch).unwrap();

        let eps = 1e-4;
        let mut work = params.clone();
        let n_blocks = work.blocks_mut().len();
        let mut numeric_all = Vec::new();
        let mut analytic_all = Vec::new();
        for b in 0..n_blocks {
            let len = work.blocks_mut()[b].len();
            for i in 0..len {
                let original = work.blocks_mut()[b][i];
                work.blocks_mut()[b][i] = original + eps;
                let (plus, _) = forward_loss(&work, &src_batch, &tgt_batch).unwrap();
                work.blocks_mut()[b][i] = original - eps;
                let (minus, _) = forward_loss(&work, &src_batch, &tgt_batch).unwrap();
                work.blocks_mut()[b][i] = original;
                numeric_all.push((plus - minus) / (2.0 * eps));
                analytic_all.push(analytic.blocks()[b][i]);
            }
        }
        let diff: f64 = numeric_all
            .iter()
            .zip(&analytic_all)
            .map(|(n, a)| (n - a) * (n - a))
            .sum::<f64>()
            .sqrt();
        let norm = analytic_all
            .iter()
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
            .max(numeric_all.iter().map(|n| n * n).sum::<f64>().sqrt());
        diff / norm.max(1e-12)
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..20 {
            let rel = fd_relative_error(&random_params(seed, false));
            assert!(rel < 1e-3, "seed {seed}: relative error {rel}");
        }
    }

    #[test]
    fn attention_gradients_match_finite_differences() {
        for seed in 0..10 {
            let rel = fd_relative_error(&random_params(seed, true));
            assert!(rel < 1e-3, "seed {seed}: relative error {rel}");
        }
    }

    #[test]
    fn all_pad_target_gives_zero_loss_and_gradients() {
        let params = random_params(3, false);
        let src_batch = encode_sources(&params.src_vocab, &["ab"]);
        let tgt_batch = vec![vec![PAD, PAD, PAD]];
        let (loss, grads) = forward_loss(&params, &src_batch, &tgt_batch).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(grads.global_norm(), 0.0);
    }

    #[test]
    fn uniform_init_loss_is_log_vocab() {
        let (src, tgt) = toy_vocabs();
        let config = ModelConfig {
            embed_dim: 4,
            hidden_dim: 4,
            attention: false,
        };
        // zero output layer → exactly uniform distribution
        let params = Seq2SeqParams::init(src, tgt, config, 9);
        let src_batch = encode_sources(&params.src_vocab, &["ab", "b"]);
        let tgt_batch = encode_targets(&params.tgt_vocab, &["xy", "x"]);
        let (loss, _) = forward_loss(&params, &src_batch, &tgt_batch).unwrap();
        let expected = (params.tgt_vocab.size() as f64).ln();
        assert!(
            (loss - expected).abs() / expected < 0.01,
            "loss {loss} vs ln|V| {expected}"
        );
    }

    #[test]
    fn out_of_range_token_is_an_argument_error() {
        let params = random_params(0, false);
        assert!(forward_loss(&params, &[vec![99]], &[vec![BOS, EOS]]).is_err());
        assert!(forward_loss(&params, &[vec![4]], &[vec![BOS, 99, EOS]]).is_err());
        assert!(forward_loss(&params, &[vec![4], vec![5]], &[vec![BOS, EOS]]).is_err());
    }

    #[test]
    fn batch_loss_is_permutation_invariant() {
        let params = random_params(5, false);
        let (a, _) = forward_loss(
            &params,
            &encode_sources(&params.src_vocab, &["ab", "ba", "b"]),
            &encode_targets(&params.tgt_vocab, &["xy", "yy", "x"]),
        )
        .unwrap();
        let (b, _) = forward_loss(
            &params,
            &encode_sources(&params.src_vocab, &["b", "ab", "ba"]),
            &encode_targets(&params.tgt_vocab, &["x", "xy", "yy"]),
        )
        .unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    fn toy_pairs() -> Vec<SentencePair> {
        // ten distinct short pairs over small alphabets
        let sources = ["abc", "cba", "aab", "bca", "cab", "abb", "bac", "ccb", "baa", "acc"];
        let targets = ["xyz", "zyx", "xxy", "yzx", "zxy", "xyy", "yxz", "zzy", "yxx", "xzz"];
        sources
            .iter()
            .zip(&targets)
            .map(|(s, t)| SentencePair::gold(*s, *t))
            .collect()
    }

    #[test]
    fn training_is_deterministic_and_loss_improves() {
        let pairs = toy_pairs();
        let config = TrainConfig {
            epochs: 15,
            embed_dim: 16,
            hidden_dim: 24,
            seed: 2,
            ..TrainConfig::default()
        };
        let a = train_mt(&pairs, &config).unwrap();
        let b = train_mt(&pairs, &config).unwrap();
        assert_eq!(a.epoch_losses, b.epoch_losses);
        assert_eq!(a.params, b.params);
        assert_eq!(a.epoch_losses.len(), 15);
        assert!(a.epoch_losses[14] < a.epoch_losses[0]);
    }

    #[test]
    fn empty_training_set_is_an_argument_error() {
        assert!(train_mt(&[], &TrainConfig::default()).is_err());
    }

    #[test]
    fn overfit_toy_corpus_and_decode_it_back() {
        let pairs = toy_pairs();
        // memorization run: plain SGD needs a hotter learning rate than the
        // full-corpus default to flatten ten pairs inside 500 epochs
        let config = TrainConfig {
            epochs: 500,
            embed_dim: 24,
            hidden_dim: 48,
            batch_size: 3,
            lr: 0.5,
            seed: 4,
            ..TrainConfig::default()
        };
        let run = train_mt(&pairs, &config).unwrap();
        let accuracy = token_accuracy(&run.params, &pairs);
        assert!(accuracy >= 0.99, "teacher-forced accuracy {accuracy}");
        for pair in &pairs {
            assert_eq!(greedy_decode(&run.params, &pair.source), pair.target);
        }
    }

    #[test]
    fn decode_respects_length_cap_and_empty_source() {
        let params = random_params(8, false);
        let out = greedy_decode(&params, "");
        assert!(out.chars().count() <= 5);
        let out = greedy_decode(&params, "ab");
        assert!(out.chars().count() <= 7);
    }

    #[test]
    fn decode_is_a_pure_function() {
        let params = random_params(8, true);
        assert_eq!(greedy_decode(&params, "ab"), greedy_decode(&params, "ab"));
    }

    #[test]
    fn model_round_trips_through_bytes() {
        let pairs = toy_pairs();
        let config = TrainConfig {
            epochs: 2,
            embed_dim: 8,
            hidden_dim: 12,
            seed: 6,
            ..TrainConfig::default()
        };
        let run = train_mt(&pairs, &config).unwrap();
        let bytes = model_to_bytes(&run.params);
        let loaded = model_from_bytes(&bytes).unwrap();
        assert_eq!(loaded, run.params);
        assert!(model_from_bytes(&bytes[..bytes.len() - 3]).is_err());
        assert!(model_from_bytes(b"garbage!").is_err());
    }

    #[test]
    fn experiment_rejects_bad_inputs() {
        let pairs = toy_pairs();
        let test = vec![SentencePair::gold("zzz", "yyy")];
        let config = TrainConfig {
            epochs: 1,
            embed_dim: 4,
            hidden_dim: 4,
            ..TrainConfig::default()
        };
        // descending sizes
        assert!(incremental_experiment(&pairs, &[], &[5, 3], &test, &[1], &config).is_err());
        // size beyond pool
        assert!(incremental_experiment(&pairs, &[], &[99], &test, &[1], &config).is_err());
        // overlap with test
        let overlap = vec![pairs[0].clone()];
        assert!(incremental_experiment(&pairs, &[], &[3], &overlap, &[1], &config).is_err());
    }

    #[test]
    fn experiment_emits_one_row_per_cell() {
        let pairs = toy_pairs();
        let silver = vec![vec![
            SentencePair::silver("cab", "zxy", 1, Status::Validated),
            SentencePair::silver("acb", "xzy", 1, Status::Validated),
        ]];
        let test = vec![SentencePair::gold("bb", "yy"), SentencePair::gold("ca", "zx")];
        let config = TrainConfig {
            epochs: 2,
            embed_dim: 8,
            hidden_dim: 8,
            ..TrainConfig::default()
        };
        let table =
            incremental_experiment(&pairs, &silver, &[6, 12], &test, &[1, 2], &config).unwrap();
        assert_eq!(table.rows.len(), 4);
        assert_eq!(
            table.rows.iter().map(|r| (r.train_size, r.seed)).collect::<Vec<_>>(),
            vec![(6, 1), (6, 2), (12, 1), (12, 2)]
        );
        let tsv = table.to_tsv();
        assert!(tsv.starts_with("train_data\tbleu1"));
        assert_eq!(tsv.lines().count(), 5);

        // rerun with identical seeds → identical file
        let again =
            incremental_experiment(&pairs, &silver, &[6, 12], &test, &[1, 2], &config).unwrap();
        assert_eq!(tsv, again.to_tsv());
    }
}
