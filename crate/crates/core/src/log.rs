//! Line-delimited game logs: one header line, then one [`TickRecord`] per
//! tick, all as compact JSON.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engine::{Engine, EngineError, GameState, Rules, TickRecord};

pub const LOG_FORMAT: &str = "pacmodel-log/1";
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogHeader {
    pub format: String,
    pub engine_version: String,
    pub maze_checksum: String,
    pub rules_digest: String,
    pub config_digest: String,
    pub seed: u64,
    pub level: u32,
    /// Who produced the inputs: a bot policy id or `human`.
    pub policy: String,
}

impl LogHeader {
    pub fn new(engine: &Engine, config_digest: &str, seed: u64, level: u32, policy: &str) -> Self {
        Self {
            format: LOG_FORMAT.to_string(),
            engine_version: ENGINE_VERSION.to_string(),
            maze_checksum: engine.maze().checksum().to_string(),
            rules_digest: rules_digest(engine.rules()),
            config_digest: config_digest.to_string(),
            seed,
            level,
            policy: policy.to_string(),
        }
    }
}

/// Short hex digest of a serializable value's canonical JSON.
pub fn digest_of<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("serializable");
    hex::encode(&Sha256::digest(&json)[..8])
}

pub fn rules_digest(rules: &Rules) -> String {
    digest_of(rules)
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log is empty")]
    Empty,
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error("unsupported log format {0:?}")]
    Format(String),
    #[error("log was written by engine {found}, this is engine {expected}")]
    EngineVersion { expected: String, found: String },
    #[error("maze checksum mismatch: log has {found}, maze is {expected}")]
    MazeChecksum { expected: String, found: String },
    #[error("rules digest mismatch: log has {found}, engine has {expected}")]
    RulesDigest { expected: String, found: String },
    #[error("replay diverged at tick {tick}")]
    Diverged { tick: u64 },
    #[error("replay failed at tick {tick}: {source}")]
    Engine { tick: u64, source: EngineError },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameLog {
    pub header: LogHeader,
    pub records: Vec<TickRecord>,
}

impl GameLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("serializable");
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("serializable"));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, LogError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(LogError::Empty)?;
        let header: LogHeader =
            serde_json::from_str(first).map_err(|source| LogError::Parse { line: 1, source })?;
        if header.format != LOG_FORMAT {
            return Err(LogError::Format(header.format));
        }
        let records = lines
            .map(|(i, l)| serde_json::from_str(l).map_err(|source| LogError::Parse { line: i + 1, source }))
            .collect::<Result<_, _>>()?;
        Ok(Self { header, records })
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_jsonl().as_bytes()))
    }

    /// Refuses logs produced under a different maze, engine or rule set.
    pub fn check_compatible(&self, engine: &Engine) -> Result<(), LogError> {
        let h = &self.header;
        if h.engine_version != ENGINE_VERSION {
            return Err(LogError::EngineVersion { expected: ENGINE_VERSION.into(), found: h.engine_version.clone() });
        }
        let maze = engine.maze().checksum();
        if h.maze_checksum != maze {
            return Err(LogError::MazeChecksum { expected: maze.into(), found: h.maze_checksum.clone() });
        }
        let rules = rules_digest(engine.rules());
        if h.rules_digest != rules {
            return Err(LogError::RulesDigest { expected: rules, found: h.rules_digest.clone() });
        }
        Ok(())
    }

    /// Pre-tick states for every record, verified by re-simulation. The
    /// returned vector has one more entry than there are records: the state
    /// after the last tick.
    pub fn replay(&self, engine: &Engine) -> Result<Vec<GameState>, LogError> {
        self.check_compatible(engine)?;
        let mut states = Vec::with_capacity(self.records.len() + 1);
        let mut state = engine.initial_state(self.header.seed, self.header.level);
        for rec in &self.records {
            let (next, got) = engine
                .step(&state, rec.pacman.1)
                .map_err(|source| LogError::Engine { tick: rec.tick, source })?;
            if &got != rec {
                return Err(LogError::Diverged { tick: rec.tick });
            }
            states.push(state);
            state = next;
        }
        states.push(state);
        Ok(states)
    }
}

/// Accumulates a log while a game is played.
#[derive(Debug, Clone)]
pub struct LogWriter {
    log: GameLog,
}

impl LogWriter {
    pub fn new(header: LogHeader) -> Self {
        Self { log: GameLog { header, records: Vec::new() } }
    }

    pub fn push(&mut self, record: TickRecord) {
        self.log.records.push(record);
    }

    pub fn log(&self) -> &GameLog {
        &self.log
    }

    pub fn finish(self) -> GameLog {
        self.log
    }
}
