//! The round engine: length validation, retry, seed-pool rotation, round
//! reports, campaign checkpointing, and human-correction ingestion.
//!
//! A campaign runs the schedule's rounds in order. Each sentence gets one
//! initial attempt plus up to `max_retries` retries; refusals, transport
//! errors, and length mismatches all consume the same budget. Between
//! rounds the seed pool rotates: the newly validated translations are
//! shuffled, `promote_count` of them are prepended, and the same number of
//! members fall off the end — except in control mode, which keeps the
//! original pool for every round.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, scalar_len, SentencePair, Status};
use crate::dictionary::MappingTable;
use crate::error::{Error, Result};
use crate::provider::{assemble_prompt, Provider, ProviderReply};
use crate::util::{atomic_write, derive_seed};

/// Static knobs for a campaign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub pool_size: usize,
    /// Validated samples promoted into the pool after each round.
    pub promote_count: usize,
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub rounds: u32,
    pub batch_per_round: usize,
    /// Keep the original pool for every round.
    pub control_mode: bool,
}

impl PipelineConfig {
    /// The canonical configuration: pool of 35, promote 5, 7 retries,
    /// 6 rounds of 30.
    pub fn canonical() -> Self {
        PipelineConfig {
            pool_size: 35,
            promote_count: 5,
            max_retries: 7,
            rounds: 6,
            batch_per_round: 30,
            control_mode: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pool_size == 0 || self.rounds == 0 || self.batch_per_round == 0 {
            return Err(Error::Argument("all pipeline counts must be positive".into()));
        }
        if self.promote_count == 0 || self.promote_count >= self.pool_size {
            return Err(Error::Argument(format!(
                "promote_count must lie in 1..pool_size, got {} vs {}",
                self.promote_count, self.pool_size
            )));
        }
        Ok(())
    }
}

/// One pool membership change.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationEvent {
    pub round: u32,
    pub inserted: Vec<String>,
    pub evicted: Vec<String>,
}

/// What a rotation did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RotationOutcome {
    Rotated { inserted: Vec<String>, evicted: Vec<String> },
    /// Fewer validated samples than `promote_count`; pool kept as-is.
    SkippedInsufficient,
    /// Control mode: rotation disabled.
    Control,
}

/// Ordered pool of exactly `pool_size` validated examples, with an id per
/// member and a log of every rotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedPool {
    members: Vec<(String, SentencePair)>,
    rotation_log: Vec<RotationEvent>,
}

impl SeedPool {
    /// Build the initial pool from gold pairs; ids are `g0`, `g1`, ...
    pub fn from_gold(pairs: &[SentencePair], config: &PipelineConfig) -> Result<Self> {
        let members: Vec<(String, SentencePair)> = pairs
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, p)| (format!("g{i}"), p))
            .collect();
        Self::new(members, config)
    }

    pub fn new(members: Vec<(String, SentencePair)>, config: &PipelineConfig) -> Result<Self> {
        if members.len() != config.pool_size {
            return Err(Error::State(format!(
                "pool must hold exactly {} members, got {}",
                config.pool_size,
                members.len()
            )));
        }
        for (id, pair) in &members {
            if pair.status != Status::Validated {
                return Err(Error::State(format!("pool member {id} is not validated")));
            }
        }
        Ok(SeedPool {
            members,
            rotation_log: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.members.iter().map(|(id, _)| id.as_str()).collect()
    }

    pub fn pairs(&self) -> Vec<SentencePair> {
        self.members.iter().map(|(_, p)| p.clone()).collect()
    }

    pub fn rotation_log(&self) -> &[RotationEvent] {
        &self.rotation_log
    }

    /// Rotate after `round`: seeded shuffle of the round's validated
    /// samples, promote `promote_count` of them to the front, evict the
    /// same number from the back. Control mode returns the pool unchanged;
    /// too few validated samples skips rotation with a notice.
    pub fn rotate(
        &self,
        new_validated: &[(String, SentencePair)],
        round: u32,
        seed: u64,
        config: &PipelineConfig,
    ) -> (SeedPool, RotationOutcome) {
        if config.control_mode {
            return (self.clone(), RotationOutcome::Control);
        }
        if new_validated.len() < config.promote_count {
            return (self.clone(), RotationOutcome::SkippedInsufficient);
        }
        let mut shuffled: Vec<(String, SentencePair)> = new_validated.to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        shuffled.shuffle(&mut rng);
        shuffled.truncate(config.promote_count);

        let mut members = self.members.clone();
        let evicted: Vec<String> = members
            .split_off(members.len() - config.promote_count)
            .into_iter()
            .map(|(id, _)| id)
            .collect();
        let inserted: Vec<String> = shuffled.iter().map(|(id, _)| id.clone()).collect();
        let mut next: Vec<(String, SentencePair)> = shuffled;
        next.extend(members);

        let mut rotation_log = self.rotation_log.clone();
        rotation_log.push(RotationEvent {
            round,
            inserted: inserted.clone(),
            evicted: evicted.clone(),
        });
        (
            SeedPool { members: next, rotation_log },
            RotationOutcome::Rotated { inserted, evicted },
        )
    }
}

/// True iff the two strings have the same Unicode scalar count.
pub fn validate_length(source: &str, candidate: &str) -> bool {
    scalar_len(source) == scalar_len(candidate)
}

/// Per-round tallies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: u32,
    pub successes: u32,
    pub failures: u32,
    /// attempts → number of sentences that took that many attempts.
    pub retry_histogram: BTreeMap<u32, u32>,
    /// Validated pairs whose target uses a character missing from the
    /// dictionary's backward map (detection only; registration needs an
    /// expert).
    pub novel_flag_count: u32,
    pub novel_chars: BTreeSet<char>,
    /// Refusal replies observed, across all attempts.
    pub refusals: u32,
}

/// Outcome of one sentence's translate-validate-retry loop.
#[derive(Debug, Clone)]
pub struct RetryOutcome {
    pub pair: SentencePair,
    /// Total attempts, counting the first (≤ max_retries + 1).
    pub attempts: u32,
    pub refusals: u32,
}

/// Query the provider until a reply passes the length validator or the
/// budget (1 + max_retries attempts) is exhausted. Exhaustion yields a
/// failed pair with an empty target; provider failures never escape.
pub fn translate_with_retry(
    provider: &dyn Provider,
    pool: &SeedPool,
    sentence: &str,
    round: u32,
    config: &PipelineConfig,
    instruction: &str,
) -> Result<RetryOutcome> {
    let bundle = assemble_prompt(&pool.pairs(), sentence, instruction, config.pool_size)?;
    let mut refusals = 0;
    let budget = config.max_retries + 1;
    for attempt in 1..=budget {
        match provider.translate(&bundle) {
            ProviderReply::Translation(t) if validate_length(sentence, &t) => {
                return Ok(RetryOutcome {
                    pair: SentencePair::silver(sentence, t, round, Status::Validated),
                    attempts: attempt,
                    refusals,
                });
            }
            ProviderReply::Translation(_) => {}
            ProviderReply::Refusal => refusals += 1,
            ProviderReply::TransportError(_) => {}
        }
    }
    Ok(RetryOutcome {
        pair: SentencePair::silver(sentence, "", round, Status::Failed),
        attempts: budget,
        refusals,
    })
}

/// Translate one batch. Per-sentence failures are recorded in the report,
/// never abort the round.
pub fn run_round(
    provider: &dyn Provider,
    pool: &SeedPool,
    batch: &[String],
    round: u32,
    table: &MappingTable,
    config: &PipelineConfig,
    instruction: &str,
) -> Result<(Vec<SentencePair>, RoundReport)> {
    let mut pairs = Vec::with_capacity(batch.len());
    let mut report = RoundReport {
        round,
        successes: 0,
        failures: 0,
        retry_histogram: BTreeMap::new(),
        novel_flag_count: 0,
        novel_chars: BTreeSet::new(),
        refusals: 0,
    };
    for sentence in batch {
        let outcome = translate_with_retry(provider, pool, sentence, round, config, instruction)?;
        *report.retry_histogram.entry(outcome.attempts).or_insert(0) += 1;
        report.refusals += outcome.refusals;
        if outcome.pair.status == Status::Validated {
            report.successes += 1;
            let novel: Vec<char> = outcome
                .pair
                .target
                .chars()
                .filter(|&c| table.candidates_for_target(c).is_empty())
                .collect();
            if !novel.is_empty() {
                report.novel_flag_count += 1;
                report.novel_chars.extend(novel);
            }
        } else {
            report.failures += 1;
        }
        pairs.push(outcome.pair);
    }
    Ok((pairs, report))
}

/// Campaign-level options on top of the static config.
#[derive(Debug, Clone)]
pub struct CampaignOptions {
    pub config: PipelineConfig,
    pub instruction: String,
    /// Master seed; per-round rotation seeds derive from it.
    pub seed: u64,
    /// Where to write the after-every-round checkpoint.
    pub checkpoint: Option<PathBuf>,
    /// Stop after this round (for staged runs with human review between
    /// rounds); the checkpoint lets a later invocation resume.
    pub stop_after_round: Option<u32>,
}

impl CampaignOptions {
    pub fn new(config: PipelineConfig, instruction: impl Into<String>, seed: u64) -> Self {
        CampaignOptions {
            config,
            instruction: instruction.into(),
            seed,
            checkpoint: None,
            stop_after_round: None,
        }
    }
}

/// Everything a campaign produces.
#[derive(Debug, Clone)]
pub struct CampaignResult {
    /// One pair per input sentence, validated and failed alike, tagged
    /// with their round.
    pub silver: Vec<SentencePair>,
    pub reports: Vec<RoundReport>,
    pub final_pool: SeedPool,
    /// False when `stop_after_round` halted the campaign early.
    pub completed: bool,
}

struct CampaignState {
    pool: SeedPool,
    silver: Vec<SentencePair>,
    reports: Vec<RoundReport>,
    next_round: u32,
}

fn rotation_seed(seed: u64, round: u32) -> u64 {
    derive_seed(seed, round as u64)
}

fn validated_with_ids(round: u32, pairs: &[SentencePair]) -> Vec<(String, SentencePair)> {
    pairs
        .iter()
        .enumerate()
        .filter(|(_, p)| p.status == Status::Validated)
        .map(|(j, p)| (format!("r{round}.{j}"), p.clone()))
        .collect()
}

/// Run a campaign from scratch. `batches` come from
/// [`corpus::bin_by_length`]; `gold_pool` supplies the initial examples.
pub fn run_campaign(
    provider: &dyn Provider,
    gold_pool: &[SentencePair],
    batches: &[Vec<String>],
    table: &MappingTable,
    options: &CampaignOptions,
) -> Result<CampaignResult> {
    options.config.validate()?;
    let pool = SeedPool::from_gold(gold_pool, &options.config)?;
    let state = CampaignState {
        pool,
        silver: Vec::new(),
        reports: Vec::new(),
        next_round: 1,
    };
    drive_campaign(provider, batches, table, options, state)
}

/// Resume a previously checkpointed campaign. The same provider, pool
/// source, batches, and options must be supplied; the checkpoint carries
/// the round cursor, prior results, and reports.
pub fn resume_campaign(
    provider: &dyn Provider,
    gold_pool: &[SentencePair],
    batches: &[Vec<String>],
    table: &MappingTable,
    options: &CampaignOptions,
) -> Result<CampaignResult> {
    options.config.validate()?;
    let path = options
        .checkpoint
        .as_ref()
        .ok_or_else(|| Error::Argument("resume requires a checkpoint path".into()))?;
    let checkpoint = Checkpoint::load(path)?;
    if checkpoint.seed != options.seed {
        return Err(Error::Argument(format!(
            "checkpoint was written with seed {}, options say {}",
            checkpoint.seed, options.seed
        )));
    }
    if checkpoint.control != options.config.control_mode {
        return Err(Error::Argument("checkpoint control mode differs from options".into()));
    }

    // Rebuild the pool by replaying rotations over the stored results.
    let mut pool = SeedPool::from_gold(gold_pool, &options.config)?;
    let mut cursor = 0usize;
    for round in 1..checkpoint.next_round {
        let batch_len = batches
            .get(round as usize - 1)
            .map(Vec::len)
            .ok_or_else(|| Error::Argument("checkpoint is ahead of the supplied batches".into()))?;
        let slice = checkpoint
            .silver
            .get(cursor..cursor + batch_len)
            .ok_or_else(|| Error::Validation("checkpoint holds fewer rows than its cursor implies".into()))?;
        cursor += batch_len;
        let validated = validated_with_ids(round, slice);
        pool = pool
            .rotate(&validated, round, rotation_seed(options.seed, round), &options.config)
            .0;
    }
    if cursor != checkpoint.silver.len() {
        return Err(Error::Validation(
            "checkpoint holds more rows than completed rounds imply".into(),
        ));
    }
    if pool.ids() != checkpoint.pool_ids.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::Validation(
            "replayed pool does not match the checkpointed member ids".into(),
        ));
    }

    let state = CampaignState {
        pool,
        silver: checkpoint.silver,
        reports: checkpoint.reports,
        next_round: checkpoint.next_round,
    };
    drive_campaign(provider, batches, table, options, state)
}

fn drive_campaign(
    provider: &dyn Provider,
    batches: &[Vec<String>],
    table: &MappingTable,
    options: &CampaignOptions,
    mut state: CampaignState,
) -> Result<CampaignResult> {
    let config = &options.config;
    if batches.len() != config.rounds as usize {
        return Err(Error::Argument(format!(
            "config expects {} rounds, got {} batches",
            config.rounds,
            batches.len()
        )));
    }
    for (i, batch) in batches.iter().enumerate() {
        if batch.len() != config.batch_per_round {
            return Err(Error::Argument(format!(
                "round {} batch has {} sentences, config says {}",
                i + 1,
                batch.len(),
                config.batch_per_round
            )));
        }
    }

    let mut completed = true;
    for round in state.next_round..=config.rounds {
        let batch = &batches[round as usize - 1];
        let (pairs, report) =
            run_round(provider, &state.pool, batch, round, table, config, &options.instruction)?;
        let validated = validated_with_ids(round, &pairs);
        state.silver.extend(pairs);
        state.reports.push(report);
        state.pool = state
            .pool
            .rotate(&validated, round, rotation_seed(options.seed, round), config)
            .0;
        state.next_round = round + 1;

        if let Some(path) = &options.checkpoint {
            let requests: u64 = state
                .reports
                .iter()
                .flat_map(|r| &r.retry_histogram)
                .map(|(attempts, count)| *attempts as u64 * *count as u64)
                .sum();
            Checkpoint {
                next_round: state.next_round,
                seed: options.seed,
                requests,
                control: config.control_mode,
                pool_ids: state.pool.ids().iter().map(|s| s.to_string()).collect(),
                reports: state.reports.clone(),
                silver: state.silver.clone(),
            }
            .save(path)?;
        }
        if options.stop_after_round == Some(round) && round < config.rounds {
            completed = false;
            break;
        }
    }

    Ok(CampaignResult {
        silver: state.silver,
        reports: state.reports,
        final_pool: state.pool,
        completed,
    })
}

/// On-disk campaign state: a `#`-prefixed header (round cursor, seeds,
/// pool member ids, per-round reports) followed by the corpus TSV rows
/// produced so far. Written atomically after every round.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub next_round: u32,
    pub seed: u64,
    /// Provider requests consumed so far. A seeded mock resumes its reply
    /// stream from this ([`crate::provider::MockOracle::skip_to_request`]).
    pub requests: u64,
    pub control: bool,
    pub pool_ids: Vec<String>,
    pub reports: Vec<RoundReport>,
    pub silver: Vec<SentencePair>,
}

const CHECKPOINT_MAGIC: &str = "#campaign-checkpoint v1";

impl Checkpoint {
    pub fn to_string(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(CHECKPOINT_MAGIC);
        out.push('\n');
        out.push_str(&format!("#next_round\t{}\n", self.next_round));
        out.push_str(&format!("#seed\t{}\n", self.seed));
        out.push_str(&format!("#requests\t{}\n", self.requests));
        out.push_str(&format!("#control\t{}\n", self.control));
        out.push_str(&format!("#pool\t{}\n", self.pool_ids.join(",")));
        for report in &self.reports {
            let json = serde_json::to_string(report)
                .map_err(|e| Error::Validation(format!("report serialization: {e}")))?;
            out.push_str(&format!("#report\t{json}\n"));
        }
        out.push_str(&corpus::corpus_to_string(&self.silver)?);
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        atomic_write(path, &self.to_string()?)?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, CHECKPOINT_MAGIC)) => {}
            _ => return Err(Error::parse(1, "not a campaign checkpoint")),
        }
        let mut next_round = None;
        let mut seed = None;
        let mut requests = None;
        let mut control = None;
        let mut pool_ids = Vec::new();
        let mut reports = Vec::new();
        let mut body = String::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if let Some(rest) = line.strip_prefix('#') {
                let (key, value) = rest
                    .split_once('\t')
                    .ok_or_else(|| Error::parse(line_no, "malformed header line"))?;
                match key {
                    "next_round" => {
                        next_round = Some(value.parse::<u32>().map_err(|_| {
                            Error::parse(line_no, "next_round must be an integer")
                        })?)
                    }
                    "seed" => {
                        seed = Some(
                            value
                                .parse::<u64>()
                                .map_err(|_| Error::parse(line_no, "seed must be an integer"))?,
                        )
                    }
                    "requests" => {
                        requests = Some(value.parse::<u64>().map_err(|_| {
                            Error::parse(line_no, "requests must be an integer")
                        })?)
                    }
                    "control" => {
                        control = Some(value.parse::<bool>().map_err(|_| {
                            Error::parse(line_no, "control must be true or false")
                        })?)
                    }
                    "pool" => {
                        pool_ids = if value.is_empty() {
                            Vec::new()
                        } else {
                            value.split(',').map(str::to_string).collect()
                        }
                    }
                    "report" => reports.push(serde_json::from_str(value).map_err(|e| {
                        Error::parse(line_no, format!("bad report JSON: {e}"))
                    })?),
                    other => {
                        return Err(Error::parse(line_no, format!("unknown header key {other:?}")))
                    }
                }
            } else {
                body.push_str(line);
                body.push('\n');
            }
        }
        Ok(Checkpoint {
            next_round: next_round.ok_or_else(|| Error::parse(1, "missing next_round header"))?,
            seed: seed.ok_or_else(|| Error::parse(1, "missing seed header"))?,
            requests: requests.ok_or_else(|| Error::parse(1, "missing requests header"))?,
            control: control.ok_or_else(|| Error::parse(1, "missing control header"))?,
            pool_ids,
            reports,
            silver: corpus::parse_corpus(&body)?,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Apply a corrections TSV (`pair-id TAB corrected-target`, ids are 0-based
/// row indices into `pairs`) and return the updated corpus. Corrections
/// must target generated (round-labeled) pairs and satisfy the length rule;
/// any bad row fails the whole batch with its row number.
pub fn apply_corrections(pairs: &[SentencePair], corrections: &str) -> Result<Vec<SentencePair>> {
    let mut out = pairs.to_vec();
    for (idx, line) in corrections.lines().enumerate() {
        let row = idx + 1;
        if line.is_empty() {
            continue;
        }
        let (id, target) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(row, "expected `pair-id TAB corrected-target`"))?;
        let id: usize = id
            .parse()
            .map_err(|_| Error::parse(row, format!("pair id must be an integer, got {id:?}")))?;
        let pair = out
            .get_mut(id)
            .ok_or_else(|| Error::parse(row, format!("unknown pair id {id}")))?;
        if pair.round.is_none() {
            return Err(Error::parse(
                row,
                format!("pair {id} is gold; corrections apply to generated pairs"),
            ));
        }
        if !validate_length(&pair.source, target) {
            return Err(Error::parse(
                row,
                format!(
                    "corrected target has {} scalars, source has {}",
                    scalar_len(target),
                    scalar_len(&pair.source)
                ),
            ));
        }
        pair.target = target.to_string();
        pair.provenance = corpus::Provenance::Corrected;
        pair.status = Status::Validated;
    }
    Ok(out)
}
