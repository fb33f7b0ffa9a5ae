//! A single live game, independent of any transport.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use pacmodel::engine::{Engine, GameState};
use pacmodel::history::HistorySummary;
use pacmodel::log::{GameLog, LogHeader, LogWriter};
use pacmodel::maze::{Cell, Heading, Tile};
use pacmodel::model_behavlet::{predict_model2, Model2Config};

use crate::protocol::{GhostView, InitFrame, Outcome, PacManView, PillsDelta, PredictionView, StateFrame, Tallies};

pub struct Session {
    id: u64,
    seed: u64,
    engine: Arc<Engine>,
    config: Model2Config,
    budget: Duration,
    state: GameState,
    history: HistorySummary,
    writer: LogWriter,
    pending: Option<Heading>,
    prediction: Option<PredictionView>,
    late: bool,
    tallies: Tallies,
}

fn items(engine: &Engine, state: &GameState) -> BTreeSet<Cell> {
    let maze = engine.maze();
    state.pills.cells(maze).chain(state.power_pills.cells(maze)).collect()
}

impl Session {
    pub fn new(id: u64, engine: Arc<Engine>, config: Model2Config, config_digest: &str, seed: u64, budget: Duration) -> Self {
        let state = engine.initial_state(seed, 1);
        let writer = LogWriter::new(LogHeader::new(&engine, config_digest, seed, 1, "human"));
        let mut s = Self {
            id,
            seed,
            engine,
            config,
            budget,
            state,
            history: HistorySummary::new(),
            writer,
            pending: None,
            prediction: None,
            late: false,
            tallies: Tallies::default(),
        };
        s.predict();
        s
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn tallies(&self) -> Tallies {
        self.tallies
    }

    pub fn is_over(&self) -> bool {
        self.state.game_over
    }

    pub fn log(&self) -> &GameLog {
        self.writer.log()
    }

    pub fn into_log(self) -> GameLog {
        self.writer.finish()
    }

    /// Replaces any input queued since the last tick.
    pub fn queue_input(&mut self, heading: Heading) {
        self.pending = Some(heading);
    }

    /// Prediction for the upcoming tick, made before any input for it is read.
    fn predict(&mut self) {
        let start = Instant::now();
        let p = predict_model2(&self.engine, &self.state, &self.history, &self.config);
        self.late = start.elapsed() > self.budget;
        if self.late {
            self.tallies.late += 1;
            self.prediction = None;
        } else {
            self.prediction = Some(PredictionView {
                heading: p.heading.into(),
                confidence: p.confidence,
                active: p.active.iter().map(|s| s.to_string()).collect(),
            });
        }
    }

    pub fn init_frame(&self, frame_ms: u64) -> InitFrame {
        let maze = self.engine.maze();
        let rows = (0..maze.height())
            .map(|r| {
                (0..maze.width())
                    .map(|c| match maze.tile(Cell::new(r as u16, c as u16)) {
                        Tile::Wall => '#',
                        Tile::House => '=',
                        Tile::Corridor => ' ',
                    })
                    .collect()
            })
            .collect();
        InitFrame {
            session: self.id,
            seed: self.seed,
            width: maze.width(),
            height: maze.height(),
            rows,
            pills: self.state.pills.cells(maze).collect(),
            power_pills: self.state.power_pills.cells(maze).collect(),
            frame_ms,
        }
    }

    pub fn state_frame(&self, pills_delta: PillsDelta, last: Option<Outcome>) -> StateFrame {
        let s = &self.state;
        StateFrame {
            tick: s.tick,
            pacman: PacManView { cell: s.pacman.cell, heading: s.pacman.heading.into() },
            ghosts: s
                .ghosts
                .iter()
                .map(|g| GhostView { cell: g.cell, heading: g.heading.into(), mode: g.mode, home: g.home })
                .collect(),
            pills_delta,
            score: s.score,
            lives: s.lives,
            mode: if s.is_hunt() { "hunt" } else { "normal" }.to_string(),
            prediction: self.prediction.clone(),
            last,
            tallies: self.tallies,
            late: self.late,
            game_over: s.game_over,
        }
    }

    /// Plays one tick with the latest queued input (or the current heading)
    /// and scores the prediction made before it. `None` once the game is over.
    pub fn advance(&mut self) -> Option<StateFrame> {
        if self.state.game_over {
            return None;
        }
        let heading = self.engine.resolve_heading(&self.state, self.pending.take());
        let (next, record) = self.engine.step(&self.state, heading).expect("resolved headings are legal");
        let predicted = self.prediction.as_ref().map(|p| Heading::from(p.heading));
        let correct = predicted == Some(heading);
        if predicted.is_some() {
            self.tallies.made += 1;
            if correct {
                self.tallies.correct += 1;
                self.tallies.streak += 1;
                self.tallies.best_streak = self.tallies.best_streak.max(self.tallies.streak);
            } else {
                self.tallies.streak = 0;
            }
        }
        let (before, after) = (items(&self.engine, &self.state), items(&self.engine, &next));
        let delta = PillsDelta {
            eaten: before.difference(&after).copied().collect(),
            restored: after.difference(&before).copied().collect(),
        };
        let outcome = Outcome { tick: record.tick, predicted: predicted.map(Into::into), actual: heading.into(), correct };
        self.history.observe(&self.engine, &self.state, &record, &next);
        self.writer.push(record);
        self.state = next;
        if self.state.game_over {
            self.prediction = None;
            self.late = false;
        } else {
            self.predict();
        }
        Some(self.state_frame(delta, Some(outcome)))
    }
}
