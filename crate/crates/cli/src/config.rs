//! Campaign configuration file (TOML) and its validation.
//!
//! Configuration is file-first with flag overrides; every run writes its
//! fully-resolved configuration next to the outputs so published results
//! can be replayed. Seeds are always explicit — nothing falls back to the
//! wall clock.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use nushu_core::pipeline::PipelineConfig;
use nushu_core::provider::{ContextStyle, HttpConfig, NoiseConfig};

/// Default instruction used when the config names no template file.
pub const DEFAULT_INSTRUCTION: &str = "\
You are translating Chinese sentences into the Nüshu script.\n\
Each Chinese character corresponds to exactly one Nüshu character, so your\n\
translation must contain exactly as many characters as the input sentence.\n\
Use only Nüshu characters that occur in the examples. Reply with the\n\
translation alone: no explanations, no punctuation, no extra characters.\n\
The examples below are tab-separated pairs of Chinese and Nüshu.";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfigFile {
    pub dictionary: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlay: Option<PathBuf>,
    /// Corpus TSV supplying the seed pool (first `pool_size` validated rows).
    pub gold_corpus: PathBuf,
    /// Plain text, one candidate sentence per line.
    pub input_sentences: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instruction_file: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Master seed; rotation and provider seeds derive from it.
    pub seed: u64,
    #[serde(default)]
    pub pipeline: PipelineSection,
    pub provider: ProviderSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub pool_size: usize,
    pub promote_count: usize,
    pub max_retries: u32,
    pub rounds: u32,
    pub batch_per_round: usize,
    pub control_mode: bool,
}

impl Default for PipelineSection {
    fn default() -> Self {
        let canonical = PipelineConfig::canonical();
        PipelineSection {
            pool_size: canonical.pool_size,
            promote_count: canonical.promote_count,
            max_retries: canonical.max_retries,
            rounds: canonical.rounds,
            batch_per_round: canonical.batch_per_round,
            control_mode: canonical.control_mode,
        }
    }
}

impl PipelineSection {
    pub fn to_config(&self) -> PipelineConfig {
        PipelineConfig {
            pool_size: self.pool_size,
            promote_count: self.promote_count,
            max_retries: self.max_retries,
            rounds: self.rounds,
            batch_per_round: self.batch_per_round,
            control_mode: self.control_mode,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Mock,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ContextKind {
    #[default]
    Inline,
    Attachment,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderSection {
    pub kind: ProviderKind,
    // mock noise
    #[serde(default)]
    pub len_err_p: f64,
    #[serde(default)]
    pub subst_p: f64,
    #[serde(default)]
    pub refusal_p: f64,
    /// Separate mock seed; derived from the campaign seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider_seed: Option<u64>,
    // http settings
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub context: ContextKind,
}

fn default_timeout() -> u64 {
    60
}

impl ProviderSection {
    pub fn noise(&self) -> NoiseConfig {
        NoiseConfig {
            len_err_p: self.len_err_p,
            subst_p: self.subst_p,
            refusal_p: self.refusal_p,
        }
    }

    pub fn http_config(&self) -> Result<HttpConfig> {
        let endpoint = self
            .endpoint
            .clone()
            .context("provider.endpoint is required for kind = \"http\"")?;
        let model = self
            .model
            .clone()
            .context("provider.model is required for kind = \"http\"")?;
        let token_env = self
            .token_env
            .clone()
            .context("provider.token_env is required for kind = \"http\"")?;
        Ok(HttpConfig {
            endpoint,
            model,
            token_env,
            timeout_secs: self.timeout_secs,
            context_style: match self.context {
                ContextKind::Inline => ContextStyle::Inline,
                ContextKind::Attachment => ContextStyle::Attachment,
            },
        })
    }
}

impl CampaignConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: CampaignConfigFile =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    /// Every referenced input path must exist; output_dir is created later.
    pub fn validate(&self) -> Result<()> {
        let mut required: Vec<(&str, &PathBuf)> = vec![
            ("dictionary", &self.dictionary),
            ("gold_corpus", &self.gold_corpus),
            ("input_sentences", &self.input_sentences),
        ];
        if let Some(overlay) = &self.overlay {
            required.push(("overlay", overlay));
        }
        if let Some(instruction) = &self.instruction_file {
            required.push(("instruction_file", instruction));
        }
        for (name, path) in required {
            if !path.exists() {
                bail!("{name} path does not exist: {}", path.display());
            }
        }
        self.pipeline
            .to_config()
            .validate()
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(())
    }

    pub fn instruction(&self) -> Result<String> {
        match &self.instruction_file {
            Some(path) => std::fs::read_to_string(path)
                .with_context(|| format!("reading instruction template {}", path.display())),
            None => Ok(DEFAULT_INSTRUCTION.to_string()),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).context("serializing resolved config")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }

    fn minimal_config(dir: &Path) -> String {
        let dict = write(dir, "dict.tsv", "\u{1B170}\t阳\n");
        let gold = write(dir, "gold.tsv", "阳\t\u{1B170}\tgold\t\tvalidated\n");
        let input = write(dir, "input.txt", "阳\n");
        format!
        (
            "dictionary = {dict:?}\ngold_corpus = {gold:?}\ninput_sentences = {input:?}\noutput_dir = \"out\"\nseed = 42\n\n[provider]\nkind = \"mock\"\n"
        )
    }

    #[test]
    fn minimal_config_round_trips_with_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let text = minimal_config(dir.path());
        let config: CampaignConfigFile = toml::from_str(&text).unwrap();
        config.validate().unwrap();
        assert_eq!(config.pipeline.pool_size, 35);
        assert_eq!(config.pipeline.rounds, 6);
        assert_eq!(config.seed, 42);
        assert_eq!(config.provider.kind, ProviderKind::Mock);
        assert_eq!(config.provider.timeout_secs, 60);

        let re: CampaignConfigFile = toml::from_str(&config.to_toml().unwrap()).unwrap();
        assert_eq!(re.pipeline.pool_size, config.pipeline.pool_size);
        assert_eq!(re.seed, config.seed);
    }

    #[test]
    fn missing_seed_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let text = minimal_config(dir.path()).replace("seed = 42\n", "");
        assert!(toml::from_str::<CampaignConfigFile>(&text).is_err());
    }

    #[test]
    fn missing_path_fails_validation() {
        let dir = tempfile::tempdir().unwrap();
        let text = minimal_config(dir.path())
            .replace("dict.tsv", "nope.tsv");
        let config: CampaignConfigFile = toml::from_str(&text).unwrap();
        assert!(config.validate().is_err());
    }

    #[test]
    fn http_provider_requires_endpoint_fields() {
        let section = ProviderSection {
            kind: ProviderKind::Http,
            len_err_p: 0.0,
            subst_p: 0.0,
            refusal_p: 0.0,
            provider_seed: None,
            endpoint: None,
            model: None,
            token_env: None,
            timeout_secs: 60,
            context: ContextKind::Inline,
        };
        assert!(section.http_config().is_err());
    }
}
