//! Bundled bot corpora, described by seeds in `corpora/manifest.toml`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bots::{run_bots, BotPolicy};
use crate::engine::Engine;
use crate::log::GameLog;

const MANIFEST: &str = include_str!("../corpora/manifest.toml");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub name: String,
    pub policies: Vec<BotPolicy>,
    pub games_per_policy: usize,
    pub seed: u64,
    pub tick_cap: u32,
    /// SHA-256 over the concatenated logs, when pinned.
    #[serde(default)]
    pub digest: Option<String>,
}

#[derive(Deserialize)]
struct Manifest {
    corpus: Vec<CorpusSpec>,
}

pub fn bundled() -> Vec<CorpusSpec> {
    toml::from_str::<Manifest>(MANIFEST).expect("bundled manifest parses").corpus
}

pub fn bundled_spec(name: &str) -> Option<CorpusSpec> {
    bundled().into_iter().find(|c| c.name == name)
}

impl CorpusSpec {
    /// Games in policy order; policy `k` uses seed `seed + k`.
    pub fn generate(&self, engine: &Engine, config_digest: &str) -> Vec<GameLog> {
        self.policies
            .iter()
            .enumerate()
            .flat_map(|(k, &p)| run_bots(engine, p, self.games_per_policy, self.seed + k as u64, self.tick_cap, config_digest))
            .collect()
    }
}

pub fn corpus_digest(logs: &[GameLog]) -> String {
    let mut h = Sha256::new();
    for log in logs {
        h.update(log.to_jsonl().as_bytes());
    }
    hex::encode(h.finalize())
}
