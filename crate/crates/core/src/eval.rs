//! Character-level translation metrics: strict accuracy, BLEU-1/2/3,
//! METEOR, and ROUGE-1/2/L.
//!
//! Characters are the only well-defined token for this script pair (the
//! generation pipeline enforces one target character per source character),
//! so every metric tokenizes into Unicode scalars. Corpus scores are
//! arithmetic means of per-sentence scores.

use crate::error::{Error, Result};

/// All metrics for one prediction/reference corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    /// Fraction of predictions identical to their reference.
    pub exact_match_rate: f64,
    /// Mean per-pair positional match rate (matched / max(len_p, len_r)).
    pub mean_char_accuracy: f64,
    /// Cumulative BLEU-1..BLEU-3.
    pub bleu: [f64; 3],
    pub meteor: f64,
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
}

impl EvalResult {
    /// Column order: the standard metric table order, then the two
    /// accuracy columns.
    pub fn tsv_header() -> &'static str {
        "bleu1\tbleu2\tbleu3\tmeteor\trouge1\trouge2\trougeL\texact_match\tchar_accuracy"
    }

    pub fn tsv_row(&self) -> String {
        format!(
            "{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            self.bleu[0],
            self.bleu[1],
            self.bleu[2],
            self.meteor,
            self.rouge1,
            self.rouge2,
            self.rouge_l,
            self.exact_match_rate,
            self.mean_char_accuracy
        )
    }

    /// Key-value lines for machine consumption.
    pub fn kv_report(&self) -> String {
        format!(
            "bleu1={}\nbleu2={}\nbleu3={}\nmeteor={}\nrouge1={}\nrouge2={}\nrougeL={}\nexact_match={}\nchar_accuracy={}\n",
            self.bleu[0],
            self.bleu[1],
            self.bleu[2],
            self.meteor,
            self.rouge1,
            self.rouge2,
            self.rouge_l,
            self.exact_match_rate,
            self.mean_char_accuracy
        )
    }
}

fn check_aligned(predictions: &[String], references: &[String]) -> Result<()> {
    if predictions.is_empty() {
        return Err(Error::Argument("empty prediction set".into()));
    }
    if predictions.len() != references.len() {
        return Err(Error::Argument(format!(
            "{} predictions vs {} references",
            predictions.len(),
            references.len()
        )));
    }
    Ok(())
}

/// Fraction of pairs where the prediction equals the reference exactly.
pub fn exact_match_accuracy(predictions: &[String], references: &[String]) -> Result<f64> {
    check_aligned(predictions, references)?;
    let hits = predictions
        .iter()
        .zip(references)
        .filter(|(p, r)| p == r)
        .count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// Mean positional character accuracy. Per pair: positions where the two
/// strings agree, divided by the longer length. An empty prediction against
/// a non-empty reference scores 0; two empty strings score 1.
pub fn mean_char_accuracy(predictions: &[String], references: &[String]) -> Result<f64> {
    check_aligned(predictions, references)?;
    let total: f64 = predictions
        .iter()
        .zip(references)
        .map(|(p, r)| char_accuracy(p, r))
        .sum();
    Ok(total / predictions.len() as f64)
}

fn char_accuracy(prediction: &str, reference: &str) -> f64 {
    let p: Vec<char> = prediction.chars().collect();
    let r: Vec<char> = reference.chars().collect();
    let denom = p.len().max(r.len());
    if denom == 0 {
        return 1.0;
    }
    let matched = p.iter().zip(&r).filter(|(a, b)| a == b).count();
    matched as f64 / denom as f64
}

fn ngram_counts(tokens: &[char], n: usize) -> std::collections::HashMap<&[char], usize> {
    let mut map = std::collections::HashMap::new();
    if n > 0 && tokens.len() >= n {
        for window in tokens.windows(n) {
            *map.entry(window).or_insert(0) += 1;
        }
    }
    map
}

/// Cumulative character BLEU-n: geometric mean of modified n-gram
/// precisions for orders 1..n (uniform weights) times the brevity penalty
/// `exp(1 - r/c)` when the candidate is shorter than the closest reference.
/// Orders ≥ 2 get add-one smoothing on both numerator and denominator.
pub fn bleu_n(prediction: &str, references: &[&str], n: usize) -> f64 {
    assert!((1..=3).contains(&n), "BLEU order must be 1..=3");
    let pred: Vec<char> = prediction.chars().collect();
    if pred.is_empty() || references.is_empty() {
        return 0.0;
    }
    let refs: Vec<Vec<char>> = references.iter().map(|r| r.chars().collect()).collect();

    let c = pred.len();
    // closest reference length; ties prefer the shorter reference
    let r = refs
        .iter()
        .map(|r| r.len())
        .min_by_key(|&l| (l.abs_diff(c), l))
        .unwrap();
    let bp = if c < r {
        (1.0 - r as f64 / c as f64).exp()
    } else {
        1.0
    };

    let mut log_sum = 0.0;
    for k in 1..=n {
        let pred_grams = ngram_counts(&pred, k);
        let mut matched = 0usize;
        let mut total = 0usize;
        for (gram, &count) in &pred_grams {
            total += count;
            let best_ref = refs
                .iter()
                .map(|r| ngram_counts(r, k).get(gram).copied().unwrap_or(0))
                .max()
                .unwrap_or(0);
            matched += count.min(best_ref);
        }
        let precision = if k >= 2 {
            (matched + 1) as f64 / (total + 1) as f64
        } else if total == 0 {
            0.0
        } else {
            matched as f64 / total as f64
        };
        if precision == 0.0 {
            return 0.0;
        }
        log_sum += precision.ln();
    }
    bp * (log_sum / n as f64).exp()
}

/// Character METEOR with exact-match alignment only.
///
/// Alignment is greedy left to right over the prediction: each character
/// first tries the reference position immediately after the previous match
/// (extending the current chunk), otherwise takes the earliest unused
/// matching position. With m matches in `ch` chunks:
/// `P = m/len(pred)`, `R = m/len(ref)`, `F = 10PR/(R + 9P)`,
/// `score = F * (1 - 0.5 * (ch/m)^3)`; 0 when there are no matches.
pub fn meteor(prediction: &str, reference: &str) -> f64 {
    let pred: Vec<char> = prediction.chars().collect();
    let refc: Vec<char> = reference.chars().collect();
    let matches = align_greedy(&pred, &refc);
    let m = matches.len();
    if m == 0 {
        return 0.0;
    }
    let precision = m as f64 / pred.len() as f64;
    let recall = m as f64 / refc.len() as f64;
    let f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let chunks = count_chunks(&matches);
    let penalty = 0.5 * (chunks as f64 / m as f64).powi(3);
    f_mean * (1.0 - penalty)
}

fn align_greedy(pred: &[char], reference: &[char]) -> Vec<(usize, usize)> {
    let mut used = vec![false; reference.len()];
    let mut matches = Vec::new();
    let mut prev: Option<usize> = None;
    for (i, &c) in pred.iter().enumerate() {
        let continuation = prev
            .map(|j| j + 1)
            .filter(|&j| j < reference.len() && !used[j] && reference[j] == c);
        let j = continuation
            .or_else(|| (0..reference.len()).find(|&j| !used[j] && reference[j] == c));
        if let Some(j) = j {
            used[j] = true;
            matches.push((i, j));
            prev = Some(j);
        }
    }
    matches
}

fn count_chunks(matches: &[(usize, usize)]) -> usize {
    if matches.is_empty() {
        return 0;
    }
    let mut chunks = 1;
    for pair in matches.windows(2) {
        let (i0, j0) = pair[0];
        let (i1, j1) = pair[1];
        if i1 != i0 + 1 || j1 != j0 + 1 {
            chunks += 1;
        }
    }
    chunks
}

/// ROUGE-N: F1 over the n-gram multiset overlap.
pub fn rouge_n(prediction: &str, reference: &str, n: usize) -> f64 {
    assert!(n >= 1, "ROUGE order must be at least 1");
    let pred: Vec<char> = prediction.chars().collect();
    let refc: Vec<char> = reference.chars().collect();
    let pred_total = pred.len().saturating_sub(n - 1);
    let ref_total = refc.len().saturating_sub(n - 1);
    if pred_total == 0 || ref_total == 0 {
        return 0.0;
    }
    let pred_grams = ngram_counts(&pred, n);
    let ref_grams = ngram_counts(&refc, n);
    let overlap: usize = pred_grams
        .iter()
        .map(|(gram, &count)| count.min(ref_grams.get(gram).copied().unwrap_or(0)))
        .sum();
    f1(
        overlap as f64 / pred_total as f64,
        overlap as f64 / ref_total as f64,
    )
}

/// ROUGE-L: F1 built from the longest common subsequence.
pub fn rouge_l(prediction: &str, reference: &str) -> f64 {
    let pred: Vec<char> = prediction.chars().collect();
    let refc: Vec<char> = reference.chars().collect();
    if pred.is_empty() || refc.is_empty() {
        return 0.0;
    }
    let lcs = lcs_len(&pred, &refc) as f64;
    f1(lcs / pred.len() as f64, lcs / refc.len() as f64)
}

fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn lcs_len(a: &[char], b: &[char]) -> usize {
    // single-row DP over b
    let mut row = vec![0usize; b.len() + 1];
    for &ca in a {
        let mut diag = 0;
        for (j, &cb) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if ca == cb {
                diag + 1
            } else {
                row[j + 1].max(row[j])
            };
            diag = up;
        }
    }
    row[b.len()]
}

/// Run the full metric suite; corpus scores are per-sentence means.
pub fn evaluate_suite(predictions: &[String], references: &[String]) -> Result<EvalResult> {
    check_aligned(predictions, references)?;
    let n = predictions.len() as f64;
    let mut bleu = [0.0; 3];
    let mut met = 0.0;
    let mut r1 = 0.0;
    let mut r2 = 0.0;
    let mut rl = 0.0;
    for (p, r) in predictions.iter().zip(references) {
        for (k, slot) in bleu.iter_mut().enumerate() {
            *slot += bleu_n(p, &[r.as_str()], k + 1);
        }
        met += meteor(p, r);
        r1 += rouge_n(p, r, 1);
        r2 += rouge_n(p, r, 2);
        rl += rouge_l(p, r);
    }
    Ok(EvalResult {
        exact_match_rate: exact_match_accuracy(predictions, references)?,
        mean_char_accuracy: mean_char_accuracy(predictions, references)?,
        bleu: bleu.map(|b| b / n),
        meteor: met / n,
        rouge1: r1 / n,
        rouge2: r2 / n,
        rouge_l: rl / n,
    })
}

/// Suite scores split by source-sentence length.
#[derive(Debug, Clone)]
pub struct StratifiedEval {
    /// Sentences with source length ≤ boundary.
    pub short: Option<(usize, EvalResult)>,
    /// Sentences with source length > boundary.
    pub long: Option<(usize, EvalResult)>,
}

/// Evaluate short and long test sentences separately, splitting on
/// `boundary` source scalars. Either side may be absent when empty.
pub fn evaluate_stratified(
    predictions: &[String],
    references: &[String],
    sources: &[String],
    boundary: usize,
) -> Result<StratifiedEval> {
    check_aligned(predictions, references)?;
    if sources.len() != predictions.len() {
        return Err(Error::Argument(format!(
            "{} sources vs {} predictions",
            sources.len(),
            predictions.len()
        )));
    }
    let mut short_p = Vec::new();
    let mut short_r = Vec::new();
    let mut long_p = Vec::new();
    let mut long_r = Vec::new();
    for ((p, r), s) in predictions.iter().zip(references).zip(sources) {
        if s.chars().count() <= boundary {
            short_p.push(p.clone());
            short_r.push(r.clone());
        } else {
            long_p.push(p.clone());
            long_r.push(r.clone());
        }
    }
    let side = |p: Vec<String>, r: Vec<String>| -> Result<Option<(usize, EvalResult)>> {
        if p.is_empty() {
            Ok(None)
        } else {
            let n = p.len();
            Ok(Some((n, evaluate_suite(&p, &r)?)))
        }
    };
    Ok(StratifiedEval {
        short: side(short_p, short_r)?,
        long: side(long_p, long_r)?,
    })
}
