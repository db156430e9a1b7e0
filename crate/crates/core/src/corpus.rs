//! Parallel-corpus data model, normalization, splitting, and length binning.
//!
//! Corpus files are headerless UTF-8 TSV (no BOM), five columns:
//! `source TAB target TAB provenance TAB round TAB status`. `round` is empty
//! for gold rows. Lengths are always Unicode scalar counts — Nüshu sits
//! outside the BMP, so byte or UTF-16 code-unit counts would silently break
//! the length rule.

use std::ops::RangeInclusive;
use std::path::Path;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;

use crate::dictionary::MappingTable;
use crate::error::{Error, Result};

/// How a sentence pair came to exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Human-translated and expert-validated.
    Gold,
    /// Machine-generated by the pipeline.
    Silver,
    /// Machine-generated, then human-corrected.
    Corrected,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::Gold => "gold",
            Provenance::Silver => "silver",
            Provenance::Corrected => "corrected",
        })
    }
}

/// Validation state of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Passed the length validator.
    Validated,
    /// Retry budget exhausted; target is empty.
    Failed,
    /// Not yet decided.
    Pending,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Validated => "validated",
            Status::Failed => "failed",
            Status::Pending => "pending",
        })
    }
}

/// One parallel sentence with provenance, round label, and validation status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub source: String,
    /// Empty when the pair failed translation.
    pub target: String,
    pub provenance: Provenance,
    /// Generation round; present iff provenance is silver or corrected.
    pub round: Option<u32>,
    pub status: Status,
}

impl SentencePair {
    pub fn gold(source: impl Into<String>, target: impl Into<String>) -> Self {
        SentencePair {
            source: source.into(),
            target: target.into(),
            provenance: Provenance::Gold,
            round: None,
            status: Status::Validated,
        }
    }

    pub fn silver(
        source: impl Into<String>,
        target: impl Into<String>,
        round: u32,
        status: Status,
    ) -> Self {
        SentencePair {
            source: source.into(),
            target: target.into(),
            provenance: Provenance::Silver,
            round: Some(round),
            status,
        }
    }

    /// Check the structural invariants.
    pub fn validate(&self) -> Result<()> {
        if self.status == Status::Validated && scalar_len(&self.source) != scalar_len(&self.target)
        {
            return Err(Error::Validation(format!(
                "validated pair has length mismatch: {} vs {} scalars ({:?} / {:?})",
                scalar_len(&self.source),
                scalar_len(&self.target),
                self.source,
                self.target
            )));
        }
        let needs_round = matches!(self.provenance, Provenance::Silver | Provenance::Corrected);
        match (needs_round, self.round) {
            (true, None) => Err(Error::Validation(format!(
                "{} pair {:?} is missing its round label",
                self.provenance, self.source
            ))),
            (false, Some(_)) => Err(Error::Validation(format!(
                "gold pair {:?} must not carry a round label",
                self.source
            ))),
            _ => {
                if let Some(r) = self.round {
                    if r == 0 {
                        return Err(Error::Validation("round labels start at 1".into()));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Unicode scalar count of `s`.
pub fn scalar_len(s: &str) -> usize {
    s.chars().count()
}

fn strip_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // Unicode punctuation general categories, the halfwidth/fullwidth forms
    // block, and ASCII digits.
    RE.get_or_init(|| Regex::new(r"[\p{P}\x{FF00}-\x{FFEF}0-9]+").unwrap())
}

/// Strip punctuation (all Unicode punctuation categories plus the fullwidth
/// forms block) and ASCII digits. Everything else passes through unchanged.
pub fn normalize_sentence(raw: &str) -> String {
    strip_pattern().replace_all(raw, "").into_owned()
}

/// Parse corpus TSV text. Row numbers in errors are 1-based.
pub fn parse_corpus(text: &str) -> Result<Vec<SentencePair>> {
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let row = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                row,
                format!("expected 5 tab-separated fields, found {}", fields.len()),
            ));
        }
        let provenance = match fields[2] {
            "gold" => Provenance::Gold,
            "silver" => Provenance::Silver,
            "corrected" => Provenance::Corrected,
            other => return Err(Error::parse(row, format!("unknown provenance {other:?}"))),
        };
        let round = if fields[3].is_empty() {
            None
        } else {
            Some(fields[3].parse::<u32>().map_err(|_| {
                Error::parse(row, format!("round must be an integer, got {:?}", fields[3]))
            })?)
        };
        let status = match fields[4] {
            "validated" => Status::Validated,
            "failed" => Status::Failed,
            "pending" => Status::Pending,
            other => return Err(Error::parse(row, format!("unknown status {other:?}"))),
        };
        let pair = SentencePair {
            source: fields[0].to_string(),
            target: fields[1].to_string(),
            provenance,
            round,
            status,
        };
        pair.validate()
            .map_err(|e| Error::parse(row, e.to_string()))?;
        pairs.push(pair);
    }
    Ok(pairs)
}

pub fn load_corpus(path: &Path) -> Result<Vec<SentencePair>> {
    parse_corpus(&std::fs::read_to_string(path)?)
}

/// Serialize pairs as corpus TSV. Fields must be tab- and newline-free.
pub fn corpus_to_string(pairs: &[SentencePair]) -> Result<String> {
    let mut out = String::new();
    for (idx, pair) in pairs.iter().enumerate() {
        pair.validate()?;
        for field in [&pair.source, &pair.target] {
            if field.contains('\t') || field.contains('\n') {
                return Err(Error::Validation(format!(
                    "pair {idx}: fields must not contain tabs or newlines: {field:?}"
                )));
            }
        }
        let round = pair.round.map(|r| r.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            pair.source, pair.target, pair.provenance, round, pair.status
        ));
    }
    Ok(out)
}

pub fn save_corpus(pairs: &[SentencePair], path: &Path) -> Result<()> {
    let text = corpus_to_string(pairs)?;
    crate::util::atomic_write(path, &text)?;
    Ok(())
}

/// Seeded shuffle, then `(rest, first test_size)` — the test set is the
/// shuffle's prefix so a fixed seed pins the held-out set.
pub fn split_fixed(
    pairs: &[SentencePair],
    test_size: usize,
    seed: u64,
) -> Result<(Vec<SentencePair>, Vec<SentencePair>)> {
    if test_size > pairs.len() {
        return Err(Error::Argument(format!(
            "test_size {test_size} exceeds corpus size {}",
            pairs.len()
        )));
    }
    let mut shuffled = pairs.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let train = shuffled.split_off(test_size);
    Ok((train, shuffled))
}

/// One round's slot in the schedule: half-open index range into the
/// length-sorted sentence list.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundBin {
    pub round: u32,
    pub start: usize,
    pub end: usize,
    /// Informational only; recorded alongside the plan, never enforced.
    pub expected_avg_len: Option<f64>,
}

/// Ascending, contiguous, non-overlapping round bins.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSchedule {
    bins: Vec<RoundBin>,
}

impl RoundSchedule {
    pub fn new(bins: Vec<RoundBin>) -> Result<Self> {
        let mut cursor = 0;
        for (i, bin) in bins.iter().enumerate() {
            if bin.start != cursor || bin.end <= bin.start {
                return Err(Error::Argument(format!(
                    "schedule bin {i} must cover a non-empty range starting at {cursor}"
                )));
            }
            if bin.round as usize != i + 1 {
                return Err(Error::Argument(format!(
                    "schedule bin {i} must be labeled round {}",
                    i + 1
                )));
            }
            cursor = bin.end;
        }
        Ok(RoundSchedule { bins })
    }

    /// `rounds` bins of `per_round` sentences each.
    pub fn uniform(rounds: u32, per_round: usize) -> Self {
        let bins = (0..rounds)
            .map(|r| RoundBin {
                round: r + 1,
                start: r as usize * per_round,
                end: (r as usize + 1) * per_round,
                expected_avg_len: None,
            })
            .collect();
        RoundSchedule { bins }
    }

    /// The canonical plan: six rounds of thirty sentences.
    pub fn canonical() -> Self {
        Self::uniform(6, 30)
    }

    pub fn bins(&self) -> &[RoundBin] {
        &self.bins
    }

    pub fn rounds(&self) -> u32 {
        self.bins.len() as u32
    }

    /// Total sentences the schedule consumes.
    pub fn total(&self) -> usize {
        self.bins.last().map(|b| b.end).unwrap_or(0)
    }
}

/// Sort sentences ascending by scalar length (stable: ties keep input
/// order), then slice into the schedule's bins.
pub fn bin_by_length(sentences: &[String], schedule: &RoundSchedule) -> Result<Vec<Vec<String>>> {
    if sentences.len() < schedule.total() {
        return Err(Error::Argument(format!(
            "schedule requires {} sentences, got {}",
            schedule.total(),
            sentences.len()
        )));
    }
    if sentences.len() > schedule.total() {
        return Err(Error::Argument(format!(
            "schedule covers {} sentences but {} were supplied",
            schedule.total(),
            sentences.len()
        )));
    }
    let mut sorted = sentences.to_vec();
    sorted.sort_by_key(|s| scalar_len(s));
    Ok(schedule
        .bins()
        .iter()
        .map(|bin| sorted[bin.start..bin.end].to_vec())
        .collect())
}

/// Generate a deterministic synthetic gold corpus from a dictionary:
/// sources sample mapped characters uniformly, targets take each
/// character's first candidate, so every pair is length-exact and fully
/// covered by construction.
pub fn synth_fixture_corpus(
    table: &MappingTable,
    n: usize,
    length_range: RangeInclusive<usize>,
    seed: u64,
) -> Result<Vec<SentencePair>> {
    if table.is_empty() {
        return Err(Error::Argument("mapping table is empty".into()));
    }
    if *length_range.start() == 0 || length_range.is_empty() {
        return Err(Error::Argument(
            "length range must be non-empty and start at 1 or more".into(),
        ));
    }
    let alphabet: Vec<char> = table.source_chars().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let len = rng.gen_range(length_range.clone());
        let source: String = (0..len)
            .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
            .collect();
        let target: String = source
            .chars()
            .map(|c| table.candidates_for_source(c)[0])
            .collect();
        pairs.push(SentencePair::gold(source, target));
    }
    Ok(pairs)
}
