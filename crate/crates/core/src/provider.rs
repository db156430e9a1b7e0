//! Translation-provider boundary: prompt assembly, a deterministic mock
//! oracle for testing, and an HTTP chat-completions adapter.
//!
//! Providers are synchronous and must tolerate concurrent `translate`
//! calls. Refusals and transport errors are ordinary reply variants, never
//! panics — the pipeline folds them into its retry budget exactly like
//! length-validation failures.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::SentencePair;
use crate::dictionary::{is_nushu_char, MappingTable};
use crate::error::{Error, Result};
use crate::util::derive_seed;

/// A fully rendered few-shot prompt: instruction block, example block, and
/// exactly one query sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    instruction: String,
    examples: Vec<(String, String)>,
    query: String,
}

fn escape_field(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\t', "\\t").replace('\n', "\\n")
}

impl PromptBundle {
    pub fn instruction(&self) -> &str {
        &self.instruction
    }

    pub fn examples(&self) -> &[(String, String)] {
        &self.examples
    }

    pub fn query(&self) -> &str {
        &self.query
    }

    /// Example block: one `source TAB target` line per pool member, with
    /// backslash, tab, and newline escaped inside fields so line structure
    /// stays unambiguous.
    pub fn example_block(&self) -> String {
        self.examples
            .iter()
            .map(|(s, t)| format!("{}\t{}", escape_field(s), escape_field(t)))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Full rendering: instruction, blank line, example lines, blank line,
    /// query line.
    pub fn render(&self) -> String {
        format!(
            "{}\n\n{}\n\n{}\n",
            self.instruction,
            self.example_block(),
            escape_field(&self.query)
        )
    }
}

/// Render the pool into a prompt. `pool_size` is the configured pool size;
/// an underfull (or overfull) example list is a state error.
pub fn assemble_prompt(
    examples: &[SentencePair],
    query: &str,
    instruction: &str,
    pool_size: usize,
) -> Result<PromptBundle> {
    if examples.len() != pool_size {
        return Err(Error::State(format!(
            "seed pool has {} examples, expected {pool_size}",
            examples.len()
        )));
    }
    Ok(PromptBundle {
        instruction: instruction.to_string(),
        examples: examples
            .iter()
            .map(|p| (p.source.clone(), p.target.clone()))
            .collect(),
        query: query.to_string(),
    })
}

/// One provider reply. A translation is non-empty and contains only
/// target-script characters; anything else a live model produces is
/// classified as a refusal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderReply {
    Translation(String),
    Refusal,
    TransportError(String),
}

impl ProviderReply {
    pub fn translation(&self) -> Option<&str> {
        match self {
            ProviderReply::Translation(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_refusal(&self) -> bool {
        matches!(self, ProviderReply::Refusal)
    }
}

/// A synchronous translation backend. Implementations must be safe for
/// concurrent calls; batching is the caller's concern.
pub trait Provider: Send + Sync {
    fn translate(&self, bundle: &PromptBundle) -> ProviderReply;
}

/// Failure-injection knobs for the mock oracle, each a probability in [0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Drop or duplicate one output character (always breaks the length rule).
    pub len_err_p: f64,
    /// Swap one character for a different candidate of some source character.
    pub subst_p: f64,
    /// Refuse outright.
    pub refusal_p: f64,
}

impl NoiseConfig {
    pub const NONE: NoiseConfig = NoiseConfig {
        len_err_p: 0.0,
        subst_p: 0.0,
        refusal_p: 0.0,
    };

    fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("len_err_p", self.len_err_p),
            ("subst_p", self.subst_p),
            ("refusal_p", self.refusal_p),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Argument(format!("{name} must lie in [0,1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Deterministic stand-in for a live model.
///
/// With zero noise it translates every query character to its first
/// dictionary candidate, which always satisfies the length validator.
/// Queries containing uncovered characters are refused (untranslatable).
///
/// Each request draws from its own RNG stream derived from (seed, request
/// number); requests are numbered in arrival order, so a fixed seed plus a
/// fixed call order reproduces the exact reply sequence regardless of which
/// threads issue the calls.
pub struct MockOracle {
    table: MappingTable,
    noise: NoiseConfig,
    seed: u64,
    requests: AtomicU64,
}

impl MockOracle {
    pub fn new(table: MappingTable, noise: NoiseConfig, seed: u64) -> Result<Self> {
        noise.validate()?;
        Ok(MockOracle {
            table,
            noise,
            seed,
            requests: AtomicU64::new(0),
        })
    }

    /// Fast-forward the request counter, e.g. when resuming a checkpointed
    /// campaign with a fresh instance: replies depend on (seed, request
    /// number), so restoring the counter restores the reply stream.
    pub fn skip_to_request(&self, n: u64) {
        self.requests.store(n, Ordering::SeqCst);
    }

    /// Requests served so far.
    pub fn requests_served(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Provider for MockOracle {
    fn translate(&self, bundle: &PromptBundle) -> ProviderReply {
        let request = self.requests.fetch_add(1, Ordering::SeqCst);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, request));

        let query: Vec<char> = bundle.query().chars().collect();
        if query.is_empty() {
            return ProviderReply::Refusal;
        }
        let mut out: Vec<char> = Vec::with_capacity(query.len());
        for &c in &query {
            match self.table.candidates_for_source(c).first() {
                Some(&t) => out.push(t),
                None => return ProviderReply::Refusal,
            }
        }
        if rng.gen::<f64>() < self.noise.refusal_p {
            return ProviderReply::Refusal;
        }
        if rng.gen::<f64>() < self.noise.subst_p {
            let swappable: Vec<usize> = query
                .iter()
                .enumerate()
                .filter(|(_, &c)| self.table.candidates_for_source(c).len() > 1)
                .map(|(i, _)| i)
                .collect();
            if !swappable.is_empty() {
                let pos = swappable[rng.gen_range(0..swappable.len())];
                let candidates = self.table.candidates_for_source(query[pos]);
                let others: Vec<char> = candidates
                    .iter()
                    .copied()
                    .filter(|&c| c != out[pos])
                    .collect();
                out[pos] = others[rng.gen_range(0..others.len())];
            }
        }
        if rng.gen::<f64>() < self.noise.len_err_p {
            let pos = rng.gen_range(0..out.len());
            if out.len() > 1 && rng.gen_bool(0.5) {
                out.remove(pos);
            } else {
                let c = out[pos];
                out.insert(pos, c);
            }
        }
        ProviderReply::Translation(out.into_iter().collect())
    }
}

/// Where the example block travels in a live request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContextStyle {
    /// Examples and query share one user message.
    Inline,
    /// Examples ride in their own message, standing in for a file upload.
    Attachment,
}

/// Configuration for the HTTP chat adapter.
#[derive(Debug, Clone)]
pub struct HttpConfig {
    /// Full chat-completions endpoint URL.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub token_env: String,
    pub timeout_secs: u64,
    pub context_style: ContextStyle,
}

/// Live adapter speaking the common chat-completions JSON shape.
///
/// Network and HTTP failures become `TransportError`; replies that are not
/// a clean target-script string become `Refusal`.
pub struct HttpProvider {
    config: HttpConfig,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub fn new(config: HttpConfig) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| Error::Argument(format!("http client: {e}")))?;
        Ok(HttpProvider { config, client })
    }

    fn messages(&self, bundle: &PromptBundle) -> Vec<serde_json::Value> {
        let system = serde_json::json!({
            "role": "system",
            "content": bundle.instruction(),
        });
        match self.config.context_style {
            ContextStyle::Inline => vec![
                system,
                serde_json::json!({
                    "role": "user",
                    "content": format!("{}\n\n{}", bundle.example_block(), bundle.query()),
                }),
            ],
            ContextStyle::Attachment => vec![
                system,
                serde_json::json!({
                    "role": "user",
                    "content": format!("Reference examples:\n{}", bundle.example_block()),
                }),
                serde_json::json!({ "role": "user", "content": bundle.query() }),
            ],
        }
    }
}

impl Provider for HttpProvider {
    fn translate(&self, bundle: &PromptBundle) -> ProviderReply {
        let token = std::env::var(&self.config.token_env).unwrap_or_default();
        let body = serde_json::json!({
            "model": self.config.model,
            "messages": self.messages(bundle),
        });
        let response = self
            .client
            .post(&self.config.endpoint)
            .bearer_auth(token)
            .json(&body)
            .send();
        let response = match response {
            Ok(r) => r,
            Err(e) => return ProviderReply::TransportError(e.to_string()),
        };
        if !response.status().is_success() {
            return ProviderReply::TransportError(format!("HTTP {}", response.status()));
        }
        let parsed: serde_json::Value = match response.json() {
            Ok(v) => v,
            Err(e) => return ProviderReply::TransportError(format!("bad response body: {e}")),
        };
        let content = parsed["choices"][0]["message"]["content"]
            .as_str()
            .unwrap_or("")
            .trim()
            .to_string();
        if content.is_empty() || !content.chars().all(is_nushu_char) {
            return ProviderReply::Refusal;
        }
        ProviderReply::Translation(content)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Status;

    const N0: char = '\u{1B170}';
    const N1: char = '\u{1B171}';

    fn fixture_table() -> MappingTable {
        MappingTable::parse(&format!("{N0}\t阳洋\n{N1}\t阳\n")).unwrap().0
    }

    fn pool(n: usize) -> Vec<SentencePair> {
        (0..n)
            .map(|i| {
                let len = 1 + i % 3;
                SentencePair::gold("阳".repeat(len), N0.to_string().repeat(len))
            })
            .collect()
    }

    #[test]
    fn prompt_has_one_line_per_example() {
        let bundle = assemble_prompt(&pool(35), "阳洋", "Translate.", 35).unwrap();
        assert_eq!(bundle.examples().len(), 35);
        let rendered = bundle.render();
        assert_eq!(rendered.lines().count(), 1 + 1 + 35 + 1 + 1);
        assert_eq!(rendered.matches("阳洋").count(), 1);
    }

    #[test]
    fn prompt_rendering_is_deterministic() {
        let a = assemble_prompt(&pool(5), "阳", "T", 5).unwrap().render();
        let b = assemble_prompt(&pool(5), "阳", "T", 5).unwrap().render();
        assert_eq!(a, b);
    }

    #[test]
    fn underfull_pool_is_a_state_error() {
        assert!(matches!(
            assemble_prompt(&pool(34), "阳", "T", 35),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn tab_in_query_is_escaped() {
        let bundle = assemble_prompt(&pool(1), "阳\t洋", "T", 1).unwrap();
        let rendered = bundle.render();
        assert!(rendered.contains("阳\\t洋"));
        let last_line = rendered.lines().last().unwrap();
        assert!(!last_line.contains('\t'));
    }

    fn query(text: &str) -> PromptBundle {
        assemble_prompt(&pool(1), text, "T", 1).unwrap()
    }

    #[test]
    fn zero_noise_mock_translates_first_candidates() {
        let oracle = MockOracle::new(fixture_table(), NoiseConfig::NONE, 0).unwrap();
        let reply = oracle.translate(&query("阳洋"));
        assert_eq!(reply, ProviderReply::Translation(format!("{N0}{N0}")));
    }

    #[test]
    fn uncovered_character_is_refused() {
        let oracle = MockOracle::new(fixture_table(), NoiseConfig::NONE, 0).unwrap();
        assert!(oracle.translate(&query("阳月")).is_refusal());
        assert!(oracle.translate(&query("")).is_refusal());
    }

    #[test]
    fn forced_refusal() {
        let noise = NoiseConfig { refusal_p: 1.0, ..NoiseConfig::NONE };
        let oracle = MockOracle::new(fixture_table(), noise, 0).unwrap();
        for _ in 0..20 {
            assert!(oracle.translate(&query("阳")).is_refusal());
        }
    }

    #[test]
    fn forced_length_error_always_breaks_validation() {
        let noise = NoiseConfig { len_err_p: 1.0, ..NoiseConfig::NONE };
        let oracle = MockOracle::new(fixture_table(), noise, 3).unwrap();
        for q in ["阳", "阳洋", "阳洋阳洋阳"] {
            for _ in 0..10 {
                match oracle.translate(&query(q)) {
                    ProviderReply::Translation(t) => {
                        assert_ne!(t.chars().count(), q.chars().count())
                    }
                    other => panic!("expected translation, got {other:?}"),
                }
            }
        }
    }

    #[test]
    fn substitution_swaps_exactly_one_char_to_another_candidate() {
        let noise = NoiseConfig { subst_p: 1.0, ..NoiseConfig::NONE };
        let oracle = MockOracle::new(fixture_table(), noise, 5).unwrap();
        let mut saw_swap = false;
        for _ in 0..50 {
            match oracle.translate(&query("阳洋")) {
                ProviderReply::Translation(t) => {
                    let chars: Vec<char> = t.chars().collect();
                    assert_eq!(chars.len(), 2);
                    // 洋 has a single candidate; only 阳 can swap (to N1)
                    assert_eq!(chars[1], N0);
                    assert!(chars[0] == N0 || chars[0] == N1);
                    saw_swap |= chars[0] == N1;
                }
                other => panic!("expected translation, got {other:?}"),
            }
        }
        assert!(saw_swap);
    }

    #[test]
    fn same_seed_reproduces_reply_sequence() {
        let noise = NoiseConfig { len_err_p: 0.4, subst_p: 0.3, refusal_p: 0.2 };
        let run = || {
            let oracle = MockOracle::new(fixture_table(), noise, 11).unwrap();
            (0..200)
                .map(|i| oracle.translate(&query(if i % 2 == 0 { "阳洋" } else { "阳阳阳" })))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn refusal_rate_matches_configured_probability() {
        let noise = NoiseConfig { refusal_p: 0.3, ..NoiseConfig::NONE };
        let oracle = MockOracle::new(fixture_table(), noise, 99).unwrap();
        let draws = 10_000;
        let refusals = (0..draws)
            .filter(|_| oracle.translate(&query("阳")).is_refusal())
            .count() as f64;
        let mean = draws as f64 * 0.3;
        let sigma = (draws as f64 * 0.3 * 0.7).sqrt();
        assert!(
            (refusals - mean).abs() <= 3.0 * sigma,
            "refusals {refusals} outside 3σ of {mean}"
        );
    }

    #[test]
    fn length_error_rate_matches_configured_probability() {
        let noise = NoiseConfig { len_err_p: 0.4, ..NoiseConfig::NONE };
        let oracle = MockOracle::new(fixture_table(), noise, 17).unwrap();
        let draws = 10_000;
        let wrong_len = (0..draws)
            .filter(|_| match oracle.translate(&query("阳洋")) {
                ProviderReply::Translation(t) => t.chars().count() != 2,
                _ => unreachable!("no refusal noise configured"),
            })
            .count() as f64;
        let mean = draws as f64 * 0.4;
        let sigma = (draws as f64 * 0.4 * 0.6).sqrt();
        assert!(
            (wrong_len - mean).abs() <= 3.0 * sigma,
            "length errors {wrong_len} outside 3σ of {mean}"
        );
    }

    #[test]
    fn invalid_probability_is_rejected() {
        let noise = NoiseConfig { len_err_p: 1.5, ..NoiseConfig::NONE };
        assert!(MockOracle::new(fixture_table(), noise, 0).is_err());
    }

    #[test]
    fn unreachable_endpoint_is_a_transport_error() {
        let provider = HttpProvider::new(HttpConfig {
            // nothing listens on port 9 locally; connection fails fast
            endpoint: "http://127.0.0.1:9/v1/chat/completions".into(),
            model: "test".into(),
            token_env: "NUSHU_TEST_TOKEN_UNSET".into(),
            timeout_secs: 2,
            context_style: ContextStyle::Inline,
        })
        .unwrap();
        match provider.translate(&query("阳")) {
            ProviderReply::TransportError(_) => {}
            other => panic!("expected transport error, got {other:?}"),
        }
    }
}
