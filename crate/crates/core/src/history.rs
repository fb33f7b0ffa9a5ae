//! Rolling aggregates over the actual (observed) past of one game.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::engine::{Engine, Event, GameState, TickRecord};
use crate::maze::{Cell, Heading};

const RECENT_HEADINGS: usize = 16;
const RECENT_DEATHS: usize = 8;

/// Radius around a power pill that counts as waiting near it.
pub const LURE_RADIUS: u32 = 2;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HistorySummary {
    pub ticks: u64,
    pub recent_headings: VecDeque<Heading>,
    pub hunts_started: u32,
    pub ghosts_eaten: u32,
    /// Ghosts eaten during the hunt in progress (or the last one).
    pub ghosts_eaten_this_hunt: u32,
    pub deaths: VecDeque<Cell>,
    pub lives_gained: u32,
    pub lives_lost: u32,
    pub teleport_uses: u32,
    pub ticks_since_score: u32,
    pub fruit_exposure_ticks: u32,
    /// Ticks since the last hunt ended; `None` before the first hunt ends.
    pub ticks_since_hunt_end: Option<u32>,
    /// Consecutive ticks spent near an uneaten power pill, up to now.
    pub lure_ticks: u32,
}

impl HistorySummary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds one actual tick into the summary.
    pub fn observe(&mut self, engine: &Engine, before: &GameState, record: &TickRecord, after: &GameState) {
        self.ticks += 1;
        if self.recent_headings.len() == RECENT_HEADINGS {
            self.recent_headings.pop_front();
        }
        self.recent_headings.push_back(record.pacman.1);

        if record.has(Event::PowerPillEaten) {
            self.hunts_started += 1;
            self.ghosts_eaten_this_hunt = 0;
        }
        let eaten = record.ghosts_eaten() as u32;
        self.ghosts_eaten += eaten;
        self.ghosts_eaten_this_hunt += eaten;

        for e in &record.events {
            match e {
                Event::PacManDied => {
                    self.lives_lost += 1;
                    if self.deaths.len() == RECENT_DEATHS {
                        self.deaths.pop_front();
                    }
                    self.deaths.push_back(record.pacman.0);
                }
                Event::LifeGained => self.lives_gained += 1,
                Event::TeleportUsed => self.teleport_uses += 1,
                _ => {}
            }
        }

        self.ticks_since_score = if record.score_delta > 0 { 0 } else { self.ticks_since_score + 1 };
        if before.fruit.present {
            self.fruit_exposure_ticks += 1;
        }

        if before.is_hunt() && !after.is_hunt() {
            self.ticks_since_hunt_end = Some(0);
        } else if let Some(t) = self.ticks_since_hunt_end.as_mut() {
            *t += 1;
        }

        let near = near_power_pill(engine, after, after.pacman.cell, LURE_RADIUS);
        self.lure_ticks = if near && !record.has(Event::PowerPillEaten) && !record.died() {
            self.lure_ticks + 1
        } else {
            0
        };
    }

    /// Whether a hunt ended no more than `within` ticks ago.
    pub fn hunt_ended_within(&self, within: u32) -> bool {
        self.ticks_since_hunt_end.is_some_and(|t| t < within)
    }
}

/// Whether an uneaten power pill lies within `radius` steps of `cell`.
pub fn near_power_pill(engine: &Engine, state: &GameState, cell: Cell, radius: u32) -> bool {
    let maze = engine.maze();
    state
        .power_pills
        .cells(maze)
        .any(|p| (maze.distance_raw(cell, p) as u32) <= radius)
}
