//! Shared fixtures and independent brute-force metric oracles.
//!
//! The oracles deliberately avoid the library's computation paths: n-gram
//! matching scans position lists instead of hashing multisets, the LCS is
//! the plain exponential recursion instead of dynamic programming, and the
//! METEOR alignment walks per-character position sets. They exist to check
//! the real implementations, so they must never call into them.

use std::collections::{BTreeMap, BTreeSet};

use nushu_core::corpus::SentencePair;
use nushu_core::dictionary::MappingTable;

/// Deterministic fixture dictionary: `n_sources` source characters starting
/// at U+4E00, each mapped to one target, every third source getting a
/// second candidate.
pub fn fixture_table(n_sources: usize) -> MappingTable {
    assert!(n_sources <= 150, "fixture would run out of target codepoints");
    let mut lines = String::new();
    let mut next_target = 0x1B170u32;
    for i in 0..n_sources {
        let source = char::from_u32(0x4E00 + i as u32).unwrap();
        let target = char::from_u32(next_target).unwrap();
        next_target += 1;
        lines.push_str(&format!("{target}\t{source}\n"));
        if i % 3 == 0 {
            let extra = char::from_u32(next_target).unwrap();
            next_target += 1;
            lines.push_str(&format!("{extra}\t{source}\n"));
        }
    }
    MappingTable::parse(&lines).unwrap().0
}

/// First-candidate reference translation — the zero-noise oracle's answer.
pub fn reference_translation(table: &MappingTable, source: &str) -> String {
    source
        .chars()
        .map(|c| table.candidates_for_source(c)[0])
        .collect()
}

/// Gold pairs built from a synthetic corpus (sources covered by `table`).
pub fn gold_pairs(table: &MappingTable, n: usize, seed: u64) -> Vec<SentencePair> {
    nushu_core::corpus::synth_fixture_corpus(table, n, 2..=6, seed).unwrap()
}

/// Every string of length 0..=max_len over the first `k` lowercase letters.
pub fn all_strings(k: usize, max_len: usize) -> Vec<String> {
    let alphabet: Vec<char> = ('a'..).take(k).collect();
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * k);
        for prefix in &frontier {
            for &c in &alphabet {
                let mut s = prefix.clone();
                s.push(c);
                out.push(s.clone());
                next.push(s);
            }
        }
        frontier = next;
    }
    out
}

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

/// Positional n-gram matching: each candidate n-gram claims the first
/// unclaimed identical reference occurrence. The total equals the clipped
/// multiset overlap, reached without any hash counting.
fn positional_overlap(pred: &[char], reference: &[char], n: usize) -> usize {
    let pred_grams: Vec<&[char]> = if pred.len() >= n {
        pred.windows(n).collect()
    } else {
        Vec::new()
    };
    let ref_grams: Vec<&[char]> = if reference.len() >= n {
        reference.windows(n).collect()
    } else {
        Vec::new()
    };
    let mut used = vec![false; ref_grams.len()];
    let mut matched = 0;
    for gram in &pred_grams {
        for (j, r) in ref_grams.iter().enumerate() {
            if !used[j] && gram == r {
                used[j] = true;
                matched += 1;
                break;
            }
        }
    }
    matched
}

/// Brute-force cumulative BLEU-n with add-one smoothing for orders ≥ 2.
pub fn bleu_oracle(prediction: &str, reference: &str, n: usize) -> f64 {
    let pred = chars(prediction);
    let refc = chars(reference);
    if pred.is_empty() {
        return 0.0;
    }
    let c = pred.len() as f64;
    let r = refc.len() as f64;
    let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    let mut log_sum = 0.0;
    for k in 1..=n {
        let total = pred.len().saturating_sub(k - 1);
        let matched = positional_overlap(&pred, &refc, k);
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

/// Brute-force METEOR: same greedy rule (prefer extending the previous
/// match, else earliest unused), expressed over per-character position sets.
pub fn meteor_oracle(prediction: &str, reference: &str) -> f64 {
    let pred = chars(prediction);
    let refc = chars(reference);
    let mut positions: BTreeMap<char, BTreeSet<usize>> = BTreeMap::new();
    for (j, &c) in refc.iter().enumerate() {
        positions.entry(c).or_default().insert(j);
    }
    let mut matches: Vec<(usize, usize)> = Vec::new();
    let mut prev: Option<usize> = None;
    for (i, &c) in pred.iter().enumerate() {
        let continuation = prev.map(|j| j + 1).filter(|j| {
            positions
                .get(&c)
                .map(|set| set.contains(j))
                .unwrap_or(false)
        });
        let chosen =
            continuation.or_else(|| positions.get(&c).and_then(|set| set.iter().next().copied()));
        if let Some(j) = chosen {
            positions.get_mut(&c).unwrap().remove(&j);
            matches.push((i, j));
            prev = Some(j);
        }
    }
    let m = matches.len() as f64;
    if matches.is_empty() {
        return 0.0;
    }
    let precision = m / pred.len() as f64;
    let recall = m / refc.len() as f64;
    let f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let mut chunks = 1usize;
    for w in matches.windows(2) {
        if w[1].0 != w[0].0 + 1 || w[1].1 != w[0].1 + 1 {
            chunks += 1;
        }
    }
    let penalty = 0.5 * (chunks as f64 / m).powi(3);
    f_mean * (1.0 - penalty)
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Brute-force ROUGE-N from positional matching.
pub fn rouge_n_oracle(prediction: &str, reference: &str, n: usize) -> f64 {
    let pred = chars(prediction);
    let refc = chars(reference);
    let pred_total = pred.len().saturating_sub(n - 1);
    let ref_total = refc.len().saturating_sub(n - 1);
    if pred_total == 0 || ref_total == 0 {
        return 0.0;
    }
    let overlap = positional_overlap(&pred, &refc, n) as f64;
    f1(overlap / pred_total as f64, overlap / ref_total as f64)
}

/// Exhaustive (memoless, exponential) LCS.
pub fn lcs_recursive(a: &[char], b: &[char]) -> usize {
    if a.is_empty() || b.is_empty() {
        0
    } else if a[0] == b[0] {
        1 + lcs_recursive(&a[1..], &b[1..])
    } else {
        lcs_recursive(&a[1..], b).max(lcs_recursive(a, &b[1..]))
    }
}

/// Brute-force ROUGE-L on the exhaustive LCS.
pub fn rouge_l_oracle(prediction: &str, reference: &str) -> f64 {
    let pred = chars(prediction);
    let refc = chars(reference);
    if pred.is_empty() || refc.is_empty() {
        return 0.0;
    }
    let lcs = lcs_recursive(&pred, &refc) as f64;
    f1(lcs / pred.len() as f64, lcs / refc.len() as f64)
}
