//! Workbench configuration: a sectioned `key = value` file (TOML).

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavlets::{self, CatalogError};
use crate::engine::Rules;
use crate::log::digest_of;
use crate::lookahead::{SearchParams, FULL_TREE_NODE_CAP};
use crate::maze::{Maze, MazeError};
use crate::model_behavlet::{default_weights, Model2Config};
use crate::model_simple::{Model1Config, SimpleWeights};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MazeSection {
    /// Maze file; the bundled maze when absent.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Model1Section {
    pub weights: SimpleWeights,
    pub dispersion: f64,
    pub node_cap: usize,
}

impl Default for Model1Section {
    fn default() -> Self {
        Self { weights: SimpleWeights::default(), dispersion: 1.0, node_cap: FULL_TREE_NODE_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Model2Section {
    pub state_checker: bool,
    pub usage: BTreeSet<String>,
    pub weights: BTreeMap<String, f64>,
}

impl Default for Model2Section {
    fn default() -> Self {
        Self { state_checker: true, usage: behavlets::default_usage(), weights: default_weights() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub seed: u64,
    /// Per-game tick limit for generated games.
    pub tick_cap: u32,
    /// Measure wall-clock time per prediction. Timings are never
    /// reproducible, so they are left out of artifacts unless enabled.
    pub timing: bool,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self { seed: 1, tick_cap: 1500, timing: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiveSection {
    pub frame_ms: u64,
    pub seed: u64,
}

impl Default for LiveSection {
    fn default() -> Self {
        Self { frame_ms: 96, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub maze: MazeSection,
    pub rules: Rules,
    pub search: SearchParams,
    pub model1: Model1Section,
    pub model2: Model2Section,
    pub eval: EvalSection,
    pub live: LiveSection,
    pub output: OutputSection,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("maze {path}: {source}")]
    Maze { path: PathBuf, source: MazeError },
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text)?;
        config.model2().validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Digest of the canonical serialization; embedded in every artifact.
    pub fn digest(&self) -> String {
        digest_of(self)
    }

    pub fn load_maze(&self) -> Result<Maze, ConfigError> {
        match &self.maze.path {
            None => Ok(Maze::default_maze()),
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
                Maze::parse(&text).map_err(|source| ConfigError::Maze { path: path.clone(), source })
            }
        }
    }

    pub fn model1(&self) -> Model1Config {
        Model1Config {
            params: self.search,
            weights: self.model1.weights,
            dispersion: self.model1.dispersion,
            node_cap: self.model1.node_cap,
        }
    }

    pub fn model2(&self) -> Model2Config {
        Model2Config {
            params: self.search,
            usage: self.model2.usage.clone(),
            state_checker: self.model2.state_checker,
            weights: self.model2.weights.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_digest() {
        let c = Config::default();
        let back = Config::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.digest(), c.digest());
        let mut d = c.clone();
        d.search.depth = 5;
        assert_ne!(d.digest(), c.digest());
    }

    #[test]
    fn partial_file_uses_defaults() {
        let c = Config::from_toml("[search]\ndepth = 6\n").unwrap();
        assert_eq!(c.search, SearchParams { depth: 6, lambda: 5 });
        assert_eq!(c.rules, Rules::default());
    }

    #[test]
    fn rejects_unknown_keys_and_ids() {
        assert!(Config::from_toml("[search]\ndepht = 6\n").is_err());
        assert!(matches!(
            Config::from_toml("[model2]\nusage = [\"Points_Max\", \"Q7\"]\n"),
            Err(ConfigError::Catalog(CatalogError::UnknownId(_)))
        ));
        assert!(matches!(
            Config::from_toml("[model2]\nusage = [\"A1\"]\n"),
            Err(ConfigError::Catalog(CatalogError::PointsMaxRequired))
        ));
    }
}
