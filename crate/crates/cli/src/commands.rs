//! Subcommand definitions and execution.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use nushu_core::corpus::{self, RoundSchedule, SentencePair, Status};
use nushu_core::dictionary::MappingTable;
use nushu_core::embeddings::{self, SkipGramConfig};
use nushu_core::eval;
use nushu_core::pipeline::{
    self, apply_corrections, CampaignOptions, Checkpoint, RoundReport,
};
use nushu_core::provider::{HttpProvider, MockOracle, Provider};
use nushu_core::seq2seq::{self, TrainConfig};
use nushu_core::util::{atomic_write, derive_seed};

use crate::config::{CampaignConfigFile, ProviderKind};
use crate::report::render_reports;

#[derive(Parser)]
#[command(
    name = "nushu",
    version,
    about = "Corpus-expansion toolkit for Nüshu–Chinese parallel text"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dictionary coverage, filtering, and pair registration
    Dict {
        #[command(subcommand)]
        command: DictCommand,
    },
    /// Corpus normalization, splitting, binning, and synthesis
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
    /// Run a translation-generation campaign from a config file
    Generate(GenerateArgs),
    /// Apply human corrections to a generated corpus
    Review(ReviewArgs),
    /// Score predictions against references
    Eval(EvalArgs),
    /// Train bilingual skip-gram embeddings
    Embed(EmbedArgs),
    /// Train or run the character-level MT model
    Mt {
        #[command(subcommand)]
        command: MtCommand,
    },
    /// Incremental-dataset training experiment
    Experiment(ExperimentArgs),
}

#[derive(Subcommand)]
enum DictCommand {
    /// Per-line dictionary coverage of (normalized) input sentences
    Coverage(DictIoArgs),
    /// Split input sentences into covered and rejected files
    Filter(DictFilterArgs),
    /// Register a new source→target pair in the overlay file
    Register(DictRegisterArgs),
}

#[derive(Args)]
struct DictIoArgs {
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    overlay: Option<PathBuf>,
    /// Plain text, one sentence per line
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args)]
struct DictFilterArgs {
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    overlay: Option<PathBuf>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    kept: PathBuf,
    #[arg(long)]
    rejected: Option<PathBuf>,
}

#[derive(Args)]
struct DictRegisterArgs {
    /// Overlay file to update (created if absent)
    #[arg(long)]
    overlay: PathBuf,
    /// Official dictionary, consulted so re-registrations are no-ops
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long)]
    source: String,
    #[arg(long)]
    target: String,
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Strip punctuation and digits from input lines
    Normalize(InOutArgs),
    /// Seeded shuffle; the first `test-size` rows become the test set
    Split(SplitArgs),
    /// Sort by length and slice into per-round batches
    Bin(BinArgs),
    /// Generate a synthetic gold corpus from a dictionary
    Synth(SynthArgs),
}

#[derive(Args)]
struct InOutArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    /// Corpus TSV
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    test_size: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
}

#[derive(Args)]
struct BinArgs {
    /// Plain text, one sentence per line; count must equal rounds × per-round
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 6)]
    rounds: u32,
    #[arg(long, default_value_t = 30)]
    per_round: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    overlay: Option<PathBuf>,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 2)]
    min_len: usize,
    #[arg(long, default_value_t = 12)]
    max_len: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Force the deterministic mock provider
    #[arg(long)]
    mock: bool,
    /// Force control mode (no pool rotation)
    #[arg(long)]
    control: bool,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Continue from the checkpoint in the output directory
    #[arg(long)]
    resume: bool,
    /// Halt after this round (resume later for staged human review)
    #[arg(long)]
    stop_after_round: Option<u32>,
    /// Another run's reports.json, rendered side by side
    #[arg(long)]
    compare: Option<PathBuf>,
}

#[derive(Args)]
struct ReviewArgs {
    /// Corpus TSV to correct
    #[arg(long)]
    corpus: PathBuf,
    /// Corrections TSV: `pair-id TAB corrected-target` (0-based row ids)
    #[arg(long)]
    corrections: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Inputs are corpus TSV; score the target columns
    #[arg(long)]
    from_corpus: bool,
    /// Write the machine-readable key-value report here
    #[arg(long = "out")]
    output: Option<PathBuf>,
    /// Also report short/long suites split at this source length
    #[arg(long)]
    stratify_boundary: Option<usize>,
    /// Source sentences (plain lines), required with --stratify-boundary
    #[arg(long)]
    sources: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    /// Plain text training lines
    #[arg(long = "in", conflicts_with = "corpus")]
    input: Option<PathBuf>,
    /// Corpus TSV; both sides are interleaved as independent lines
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long = "out")]
    output: PathBuf,
    #[arg(long, default_value_t = 300)]
    dim: usize,
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long, default_value_t = 5)]
    min_count: u64,
    #[arg(long, default_value_t = 10)]
    negatives: usize,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long)]
    seed: u64,
    /// Print the top-10 neighbors of this character after training
    #[arg(long)]
    neighbors: Option<String>,
}

#[derive(Subcommand)]
enum MtCommand {
    /// Train on the validated pairs of a corpus TSV
    Train(MtTrainArgs),
    /// Greedy-decode source lines with a trained model
    Decode(MtDecodeArgs),
}

#[derive(Args)]
struct MtTrainArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 15)]
    epochs: usize,
    #[arg(long, default_value_t = 3)]
    batch_size: usize,
    #[arg(long, default_value_t = 32)]
    embed_dim: usize,
    #[arg(long, default_value_t = 64)]
    hidden_dim: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long)]
    attention: bool,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct MtDecodeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Gold corpus TSV (split into train pool and fixed test set)
    #[arg(long)]
    gold: PathBuf,
    /// Silver corpus TSV; validated pairs join the pool in round order
    #[arg(long)]
    silver: Option<PathBuf>,
    /// Comma-separated ascending training sizes, e.g. 100,200,300,400
    #[arg(long)]
    sizes: String,
    /// Comma-separated seeds; each (size, seed) cell trains from scratch
    #[arg(long)]
    seeds: String,
    #[arg(long, default_value_t = 100)]
    test_size: usize,
    #[arg(long)]
    split_seed: u64,
    #[arg(long = "out")]
    output: PathBuf,
    #[arg(long, default_value_t = 15)]
    epochs: usize,
    #[arg(long, default_value_t = 3)]
    batch_size: usize,
    #[arg(long, default_value_t = 32)]
    embed_dim: usize,
    #[arg(long, default_value_t = 64)]
    hidden_dim: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long)]
    attention: bool,
}

/// Parse and run. Exit codes: 0 success, 1 validation failure, 2 usage
/// error (clap's convention for bad invocations).
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.exit_code() == 0 { 0 } else { 2 };
            let _ = err.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dict { command } => match command {
            DictCommand::Coverage(args) => dict_coverage(args),
            DictCommand::Filter(args) => dict_filter(args),
            DictCommand::Register(args) => dict_register(args),
        },
        Command::Corpus { command } => match command {
            CorpusCommand::Normalize(args) => corpus_normalize(args),
            CorpusCommand::Split(args) => corpus_split(args),
            CorpusCommand::Bin(args) => corpus_bin(args),
            CorpusCommand::Synth(args) => corpus_synth(args),
        },
        Command::Generate(args) => generate(args),
        Command::Review(args) => review(args),
        Command::Eval(args) => eval_cmd(args),
        Command::Embed(args) => embed(args),
        Command::Mt { command } => match command {
            MtCommand::Train(args) => mt_train(args),
            MtCommand::Decode(args) => mt_decode(args),
        },
        Command::Experiment(args) => experiment(args),
    }
}

fn load_table(dict: &Path, overlay: Option<&Path>) -> Result<MappingTable> {
    let (table, duplicates) =
        MappingTable::load(dict).with_context(|| format!("loading {}", dict.display()))?;
    if duplicates > 0 {
        log::warn!("{}: collapsed {duplicates} duplicate pairs", dict.display());
    }
    match overlay {
        Some(path) if path.exists() => {
            let (merged, duplicates) = table
                .load_overlay(path)
                .with_context(|| format!("loading overlay {}", path.display()))?;
            if duplicates > 0 {
                log::warn!("{}: collapsed {duplicates} duplicate pairs", path.display());
            }
            Ok(merged)
        }
        _ => Ok(table),
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    Ok(std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?
        .lines()
        .map(str::to_string)
        .collect())
}

fn normalized_nonempty(path: &Path) -> Result<Vec<String>> {
    Ok(read_lines(path)?
        .iter()
        .map(|l| corpus::normalize_sentence(l))
        .filter(|l| !l.is_empty())
        .collect())
}

fn dict_coverage(args: DictIoArgs) -> Result<()> {
    let table = load_table(&args.dict, args.overlay.as_deref())?;
    let mut covered = 0usize;
    let lines = read_lines(&args.input)?;
    let total = lines.len();
    for (i, line) in lines.into_iter().enumerate() {
        let sentence = corpus::normalize_sentence(&line);
        let coverage = table.sentence_coverage(&sentence);
        if coverage.fully_covered {
            covered += 1;
            println!("{}\tok\t", i + 1);
        } else {
            let missing: String = coverage.missing.into_iter().collect();
            println!("{}\tmissing\t{missing}", i + 1);
        }
    }
    log::info!("{covered}/{total} sentences fully covered");
    Ok(())
}

fn dict_filter(args: DictFilterArgs) -> Result<()> {
    let table = load_table(&args.dict, args.overlay.as_deref())?;
    let sentences = normalized_nonempty(&args.input)?;
    let (kept, rejected) = table.filter_corpus(&sentences);
    atomic_write(&args.kept, &lines_to_string(&kept))?;
    if let Some(path) = &args.rejected {
        atomic_write(path, &lines_to_string(&rejected))?;
    }
    println!("kept {} rejected {}", kept.len(), rejected.len());
    Ok(())
}

fn single_char(field: &str, value: &str) -> Result<char> {
    let mut chars = value.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => bail!("--{field} must be exactly one character, got {value:?}"),
    }
}

fn dict_register(args: DictRegisterArgs) -> Result<()> {
    let source = single_char("source", &args.source)?;
    let target = single_char("target", &args.target)?;
    let mut table = match &args.dict {
        Some(dict) => load_table(dict, Some(&args.overlay))?,
        None if args.overlay.exists() => {
            MappingTable::new().parse_overlay(&std::fs::read_to_string(&args.overlay)?)?.0
        }
        None => MappingTable::new(),
    };
    let (updated, added) = table.register(source, target)?;
    table = updated;
    if added {
        table.save_overlay(&args.overlay)?;
        println!("registered {source} -> {target}");
    } else {
        println!("pair {source} -> {target} already present; overlay unchanged");
    }
    Ok(())
}

fn lines_to_string(lines: &[String]) -> String {
    let mut out = lines.join("\n");
    if !out.is_empty() {
        out.push('\n');
    }
    out
}

fn corpus_normalize(args: InOutArgs) -> Result<()> {
    let lines: Vec<String> = read_lines(&args.input)?
        .iter()
        .map(|l| corpus::normalize_sentence(l))
        .collect();
    atomic_write(&args.output, &lines_to_string(&lines))?;
    Ok(())
}

fn corpus_split(args: SplitArgs) -> Result<()> {
    let pairs = corpus::load_corpus(&args.input)?;
    let (train, test) = corpus::split_fixed(&pairs, args.test_size, args.seed)?;
    corpus::save_corpus(&train, &args.train)?;
    corpus::save_corpus(&test, &args.test)?;
    println!("train {} test {}", train.len(), test.len());
    Ok(())
}

fn corpus_bin(args: BinArgs) -> Result<()> {
    let sentences = read_lines(&args.input)?;
    let schedule = RoundSchedule::uniform(args.rounds, args.per_round);
    let bins = corpus::bin_by_length(&sentences, &schedule)?;
    std::fs::create_dir_all(&args.out_dir)?;
    for (bin, sentences) in bins.iter().enumerate() {
        let path = args.out_dir.join(format!("round_{:02}.txt", bin + 1));
        atomic_write(&path, &lines_to_string(sentences))?;
    }
    println!("wrote {} round files to {}", bins.len(), args.out_dir.display());
    Ok(())
}

fn corpus_synth(args: SynthArgs) -> Result<()> {
    let table = load_table(&args.dict, args.overlay.as_deref())?;
    let pairs =
        corpus::synth_fixture_corpus(&table, args.count, args.min_len..=args.max_len, args.seed)?;
    corpus::save_corpus(&pairs, &args.output)?;
    println!("wrote {} pairs to {}", pairs.len(), args.output.display());
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let mut config = CampaignConfigFile::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.mock {
        config.provider.kind = ProviderKind::Mock;
    }
    if args.control {
        config.pipeline.control_mode = true;
    }

    let table = load_table(&config.dictionary, config.overlay.as_deref())?;
    let pipeline_config = config.pipeline.to_config();

    let gold = corpus::load_corpus(&config.gold_corpus)?;
    let pool_source: Vec<SentencePair> = gold
        .iter()
        .filter(|p| p.status == Status::Validated)
        .take(pipeline_config.pool_size)
        .cloned()
        .collect();
    if pool_source.len() < pipeline_config.pool_size {
        bail!(
            "gold corpus provides {} validated pairs, pool needs {}",
            pool_source.len(),
            pipeline_config.pool_size
        );
    }

    let sentences = normalized_nonempty(&config.input_sentences)?;
    let (mut kept, rejected) = table.filter_corpus(&sentences);
    let needed = pipeline_config.rounds as usize * pipeline_config.batch_per_round;
    log::info!(
        "{} input sentences: {} covered, {} rejected, {needed} needed",
        sentences.len(),
        kept.len(),
        rejected.len()
    );
    if kept.len() < needed {
        bail!("only {} covered sentences, campaign needs {needed}", kept.len());
    }
    kept.truncate(needed);
    let schedule = RoundSchedule::uniform(pipeline_config.rounds, pipeline_config.batch_per_round);
    let batches = corpus::bin_by_length(&kept, &schedule)?;

    std::fs::create_dir_all(&config.output_dir)?;
    let checkpoint_path = config.output_dir.join("checkpoint.tsv");
    let resuming = args.resume && checkpoint_path.exists();

    let options = CampaignOptions {
        config: pipeline_config.clone(),
        instruction: config.instruction()?,
        seed: config.seed,
        checkpoint: Some(checkpoint_path.clone()),
        stop_after_round: args.stop_after_round,
    };

    let provider: Box<dyn Provider> = match config.provider.kind {
        ProviderKind::Mock => {
            let seed = config
                .provider
                .provider_seed
                .unwrap_or_else(|| derive_seed(config.seed, 0x6d6f636b));
            let oracle = MockOracle::new(table.clone(), config.provider.noise(), seed)
                .map_err(anyhow::Error::from)?;
            if resuming {
                let checkpoint = Checkpoint::load(&checkpoint_path)?;
                oracle.skip_to_request(checkpoint.requests);
            }
            Box::new(oracle)
        }
        ProviderKind::Http => Box::new(HttpProvider::new(config.provider.http_config()?)?),
    };

    let result = if resuming {
        log::info!("resuming from {}", checkpoint_path.display());
        pipeline::resume_campaign(provider.as_ref(), &pool_source, &batches, &table, &options)?
    } else {
        pipeline::run_campaign(provider.as_ref(), &pool_source, &batches, &table, &options)?
    };

    corpus::save_corpus(&result.silver, &config.output_dir.join("silver.tsv"))?;
    let reports_json = serde_json::to_string_pretty(&result.reports)?;
    atomic_write(&config.output_dir.join("reports.json"), &reports_json)?;

    let compare: Option<Vec<RoundReport>> = match &args.compare {
        Some(path) => Some(serde_json::from_str(
            &std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?,
        )?),
        None => None,
    };
    let rendered = render_reports(&result.reports, compare.as_deref());
    atomic_write(&config.output_dir.join("report.txt"), &rendered)?;

    let resolved = config.to_toml()?;
    atomic_write(&config.output_dir.join("resolved_config.toml"), &resolved)?;
    log::info!("resolved config:\n{resolved}");

    print!("{rendered}");
    let validated = result.silver.iter().filter(|p| p.status == Status::Validated).count();
    println!(
        "{} rounds, {validated}/{} validated; outputs in {}",
        result.reports.len(),
        result.silver.len(),
        config.output_dir.display()
    );
    if !result.completed {
        println!("campaign stopped early; resume with --resume");
    }
    Ok(())
}

fn review(args: ReviewArgs) -> Result<()> {
    let pairs = corpus::load_corpus(&args.corpus)?;
    let corrections = std::fs::read_to_string(&args.corrections)
        .with_context(|| format!("reading {}", args.corrections.display()))?;
    let corrected = apply_corrections(&pairs, &corrections)?;
    let changed = pairs
        .iter()
        .zip(&corrected)
        .filter(|(before, after)| before != after)
        .count();
    corpus::save_corpus(&corrected, &args.output)?;
    println!("applied {changed} corrections to {}", args.output.display());
    Ok(())
}

fn eval_inputs(path: &Path, from_corpus: bool) -> Result<Vec<String>> {
    if from_corpus {
        Ok(corpus::load_corpus(path)?
            .into_iter()
            .map(|p| p.target)
            .collect())
    } else {
        read_lines(path)
    }
}

fn eval_cmd(args: EvalArgs) -> Result<()> {
    let predictions = eval_inputs(&args.pred, args.from_corpus)?;
    let references = eval_inputs(&args.reference, args.from_corpus)?;
    let result = eval::evaluate_suite(&predictions, &references)?;
    println!("{}", eval::EvalResult::tsv_header());
    println!("{}", result.tsv_row());

    if let Some(boundary) = args.stratify_boundary {
        let sources_path = args
            .sources
            .as_ref()
            .context("--stratify-boundary requires --sources")?;
        let sources = read_lines(sources_path)?;
        let strata = eval::evaluate_stratified(&predictions, &references, &sources, boundary)?;
        if let Some((n, result)) = strata.short {
            println!("# length <= {boundary} ({n} sentences)");
            println!("{}", result.tsv_row());
        }
        if let Some((n, result)) = strata.long {
            println!("# length > {boundary} ({n} sentences)");
            println!("{}", result.tsv_row());
        }
    }

    if let Some(path) = &args.output {
        atomic_write(path, &result.kv_report())?;
    }
    Ok(())
}

fn embed(args: EmbedArgs) -> Result<()> {
    let lines = match (&args.input, &args.corpus) {
        (Some(path), None) => normalized_nonempty(path)?,
        (None, Some(path)) => {
            let pairs = corpus::load_corpus(path)?;
            embeddings::bilingual_lines(&pairs, args.seed)
        }
        _ => bail!("exactly one of --in or --corpus is required"),
    };
    let config = SkipGramConfig {
        dim: args.dim,
        window: args.window,
        min_count: args.min_count,
        negatives: args.negatives,
        epochs: args.epochs,
        lr: args.lr,
        seed: args.seed,
    };
    let trained = embeddings::train_skipgram(&lines, &config)?;
    embeddings::save_vectors(&trained.table, &trained.vocab, &args.output)?;
    println!(
        "trained {} vectors of dim {}; first epoch loss {:.4}, last {:.4}",
        trained.vocab.len(),
        config.dim,
        trained.epoch_losses.first().unwrap_or(&0.0),
        trained.epoch_losses.last().unwrap_or(&0.0)
    );
    if let Some(token) = &args.neighbors {
        let token = single_char("neighbors", token)?;
        let k = 10.min(trained.vocab.len().saturating_sub(1));
        for (neighbor, similarity) in
            embeddings::nearest_neighbors(&trained.table, &trained.vocab, token, k)?
        {
            println!("{neighbor}\t{similarity:.4}");
        }
    }
    Ok(())
}

fn validated_pairs(path: &Path) -> Result<Vec<SentencePair>> {
    let pairs = corpus::load_corpus(path)?;
    let validated: Vec<SentencePair> = pairs
        .into_iter()
        .filter(|p| p.status == Status::Validated)
        .collect();
    if validated.is_empty() {
        bail!("{} holds no validated pairs", path.display());
    }
    Ok(validated)
}

fn mt_train(args: MtTrainArgs) -> Result<()> {
    let pairs = validated_pairs(&args.train)?;
    let config = TrainConfig {
        batch_size: args.batch_size,
        epochs: args.epochs,
        embed_dim: args.embed_dim,
        hidden_dim: args.hidden_dim,
        lr: args.lr,
        clip: 5.0,
        attention: args.attention,
        seed: args.seed,
    };
    let run = seq2seq::train_mt(&pairs, &config)?;
    seq2seq::save_model(&run.params, &args.model)?;
    println!(
        "trained on {} pairs for {} epochs; loss {:.4} -> {:.4}; model at {}",
        pairs.len(),
        config.epochs,
        run.epoch_losses.first().unwrap_or(&0.0),
        run.epoch_losses.last().unwrap_or(&0.0),
        args.model.display()
    );
    Ok(())
}

fn mt_decode(args: MtDecodeArgs) -> Result<()> {
    let params = seq2seq::load_model(&args.model)?;
    let outputs: Vec<String> = read_lines(&args.input)?
        .iter()
        .map(|line| seq2seq::greedy_decode(&params, line))
        .collect();
    atomic_write(&args.output, &lines_to_string(&outputs))?;
    println!("decoded {} lines to {}", outputs.len(), args.output.display());
    Ok(())
}

fn parse_list<T: std::str::FromStr>(field: &str, text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<T>()
                .map_err(|_| anyhow::anyhow!("--{field}: cannot parse {part:?}"))
        })
        .collect()
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let gold = corpus::load_corpus(&args.gold)?;
    let (train, test) = corpus::split_fixed(&gold, args.test_size, args.split_seed)?;

    let mut silver_by_round: Vec<Vec<SentencePair>> = Vec::new();
    if let Some(path) = &args.silver {
        let mut by_round: std::collections::BTreeMap<u32, Vec<SentencePair>> = Default::default();
        for pair in corpus::load_corpus(path)? {
            if pair.status == Status::Validated {
                let round = pair.round.unwrap_or(1);
                by_round.entry(round).or_default().push(pair);
            }
        }
        silver_by_round = by_round.into_values().collect();
    }

    let sizes: Vec<usize> = parse_list("sizes", &args.sizes)?;
    let seeds: Vec<u64> = parse_list("seeds", &args.seeds)?;
    let config = TrainConfig {
        batch_size: args.batch_size,
        epochs: args.epochs,
        embed_dim: args.embed_dim,
        hidden_dim: args.hidden_dim,
        lr: args.lr,
        clip: 5.0,
        attention: args.attention,
        seed: 0,
    };
    let table =
        seq2seq::incremental_experiment(&train, &silver_by_round, &sizes, &test, &seeds, &config)?;
    atomic_write(&args.output, &table.to_tsv())?;
    print!("{}", table.to_tsv());
    println!("# wrote {}", args.output.display());
    Ok(())
}
