//! Wire frames. Every websocket text frame carries one JSON object tagged
//! by `type`.

use pacmodel::engine::GhostMode;
use pacmodel::maze::{Cell, Heading};
use serde::{Deserialize, Serialize};

/// Headings spelled out in full on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeadingName {
    Up,
    Left,
    Down,
    Right,
}

impl From<Heading> for HeadingName {
    fn from(h: Heading) -> Self {
        match h {
            Heading::Up => HeadingName::Up,
            Heading::Left => HeadingName::Left,
            Heading::Down => HeadingName::Down,
            Heading::Right => HeadingName::Right,
        }
    }
}

impl From<HeadingName> for Heading {
    fn from(h: HeadingName) -> Self {
        match h {
            HeadingName::Up => Heading::Up,
            HeadingName::Left => Heading::Left,
            HeadingName::Down => Heading::Down,
            HeadingName::Right => Heading::Right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientFrame {
    Input { heading: HeadingName },
    Start {
        #[serde(default)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerFrame {
    Init(InitFrame),
    State(StateFrame),
    Error { message: String },
}

/// Sent once per session: maze geometry and the full item layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitFrame {
    pub session: u64,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    /// One string per row: `#` wall, `=` ghost house, space corridor.
    pub rows: Vec<String>,
    pub pills: Vec<Cell>,
    pub power_pills: Vec<Cell>,
    pub frame_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacManView {
    pub cell: Cell,
    pub heading: HeadingName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhostView {
    pub cell: Cell,
    pub heading: HeadingName,
    pub mode: GhostMode,
    pub home: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PillsDelta {
    pub eaten: Vec<Cell>,
    /// Items put back, e.g. on a level clear.
    pub restored: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionView {
    pub heading: HeadingName,
    /// Normalized utility gap between the chosen and the runner-up heading.
    pub confidence: f64,
    /// Behavlets that passed the state check.
    pub active: Vec<String>,
}

/// How the previous tick's prediction fared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub tick: u64,
    pub predicted: Option<HeadingName>,
    pub actual: HeadingName,
    pub correct: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tallies {
    pub made: u64,
    pub correct: u64,
    pub streak: u64,
    pub best_streak: u64,
    /// Ticks whose prediction overran the budget and was not scored.
    pub late: u64,
}

impl Tallies {
    pub fn accuracy(&self) -> Option<f64> {
        (self.made > 0).then(|| self.correct as f64 / self.made as f64)
    }
}

/// The world before tick `tick`, with the prediction for that tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFrame {
    pub tick: u64,
    pub pacman: PacManView,
    pub ghosts: Vec<GhostView>,
    pub pills_delta: PillsDelta,
    pub score: u64,
    pub lives: u32,
    /// `normal` or `hunt`.
    pub mode: String,
    pub prediction: Option<PredictionView>,
    pub last: Option<Outcome>,
    pub tallies: Tallies,
    /// The prediction for this tick overran the frame budget.
    pub late: bool,
    pub game_over: bool,
}
