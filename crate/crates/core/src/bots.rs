//! Scripted players used to generate evaluation corpora.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{Engine, GameState};
use crate::log::{GameLog, LogHeader, LogWriter};
use crate::maze::{Cell, Heading};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BotPolicy {
    GreedyPills,
    Hunter,
    Cautious,
    Random,
}

impl BotPolicy {
    pub const ALL: [BotPolicy; 4] = [BotPolicy::GreedyPills, BotPolicy::Hunter, BotPolicy::Cautious, BotPolicy::Random];
    /// The policies that pursue goals rather than wander.
    pub const GOAL_DIRECTED: [BotPolicy; 3] = [BotPolicy::GreedyPills, BotPolicy::Hunter, BotPolicy::Cautious];

    pub fn as_str(self) -> &'static str {
        match self {
            BotPolicy::GreedyPills => "greedy_pills",
            BotPolicy::Hunter => "hunter",
            BotPolicy::Cautious => "cautious",
            BotPolicy::Random => "random",
        }
    }
}

impl std::fmt::Display for BotPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BotPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BotPolicy::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown policy `{s}` (expected greedy_pills, hunter, cautious or random)"))
    }
}

/// Chance that a goal-directed bot takes a random legal move instead.
const NOISE: f64 = 0.05;
const CAUTIOUS_RADIUS: u16 = 5;
const HUNTER_FLEE_RADIUS: u16 = 3;

pub struct Bot {
    policy: BotPolicy,
    rng: ChaCha8Rng,
}

impl Bot {
    pub fn new(policy: BotPolicy, seed: u64) -> Self {
        Self { policy, rng: ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15) }
    }

    pub fn policy(&self) -> BotPolicy {
        self.policy
    }

    pub fn choose(&mut self, engine: &Engine, state: &GameState) -> Heading {
        let moves = engine.pacman_moves(state.pacman.cell);
        let noisy = self.rng.gen_bool(NOISE);
        let random = self.rng.gen_range(0..moves.len().max(1));
        if self.policy == BotPolicy::Random || noisy {
            return moves.get(random).copied().unwrap_or(state.pacman.heading);
        }
        let choice = match self.policy {
            BotPolicy::GreedyPills => toward_nearest(engine, state, &moves, item_cells(engine, state)),
            BotPolicy::Hunter => hunter(engine, state, &moves),
            BotPolicy::Cautious => cautious(engine, state, &moves),
            BotPolicy::Random => unreachable!(),
        };
        choice.unwrap_or(moves[random])
    }
}

fn item_cells(engine: &Engine, state: &GameState) -> Vec<Cell> {
    let maze = engine.maze();
    state.pills.cells(maze).chain(state.power_pills.cells(maze)).collect()
}

/// Legal move that most shortens the path to the nearest target.
fn toward_nearest(engine: &Engine, state: &GameState, moves: &[Heading], targets: Vec<Cell>) -> Option<Heading> {
    let maze = engine.maze();
    let pac = state.pacman.cell;
    let target = targets.into_iter().min_by_key(|&t| (maze.distance_raw(pac, t), t))?;
    moves
        .iter()
        .copied()
        .min_by_key(|&h| maze.distance_raw(maze.pac_neighbor(pac, h).expect("legal"), target))
}

fn nearest_threat_distance(engine: &Engine, state: &GameState, from: Cell) -> u16 {
    state
        .ghosts
        .iter()
        .filter(|g| g.is_threat())
        .map(|g| engine.maze().ghost_distance_raw(from, g.cell))
        .min()
        .unwrap_or(u16::MAX)
}

/// Legal move maximizing distance from the nearest threat.
fn flee(engine: &Engine, state: &GameState, moves: &[Heading]) -> Option<Heading> {
    let maze = engine.maze();
    moves.iter().copied().max_by_key(|&h| {
        let next = maze.pac_neighbor(state.pacman.cell, h).expect("legal");
        // Reverse so that ties keep the earliest canonical heading.
        (nearest_threat_distance(engine, state, next), std::cmp::Reverse(h))
    })
}

fn hunter(engine: &Engine, state: &GameState, moves: &[Heading]) -> Option<Heading> {
    let maze = engine.maze();
    if state.is_hunt() {
        let prey: Vec<Cell> = state
            .ghosts
            .iter()
            .filter(|g| g.is_prey())
            .map(|g| g.cell)
            .filter(|&c| (maze.distance_raw(state.pacman.cell, c) as u32) < state.hunt_timer)
            .collect();
        if !prey.is_empty() {
            return toward_nearest(engine, state, moves, prey);
        }
    } else if nearest_threat_distance(engine, state, state.pacman.cell) <= HUNTER_FLEE_RADIUS {
        return flee(engine, state, moves);
    }
    let power: Vec<Cell> = state.power_pills.cells(maze).collect();
    if power.is_empty() || state.is_hunt() {
        toward_nearest(engine, state, moves, item_cells(engine, state))
    } else {
        toward_nearest(engine, state, moves, power)
    }
}

fn cautious(engine: &Engine, state: &GameState, moves: &[Heading]) -> Option<Heading> {
    if nearest_threat_distance(engine, state, state.pacman.cell) <= CAUTIOUS_RADIUS {
        flee(engine, state, moves)
    } else {
        toward_nearest(engine, state, moves, item_cells(engine, state))
    }
}

/// Plays one game to completion or `tick_cap` ticks.
pub fn play_game(engine: &Engine, policy: BotPolicy, seed: u64, tick_cap: u32, config_digest: &str) -> GameLog {
    let header = LogHeader::new(engine, config_digest, seed, 1, policy.as_str());
    let mut writer = LogWriter::new(header);
    let mut bot = Bot::new(policy, seed);
    let mut state = engine.initial_state(seed, 1);
    while !state.game_over && state.tick < tick_cap as u64 {
        let h = bot.choose(engine, &state);
        let (next, record) = engine.step(&state, h).expect("bots choose legal moves");
        writer.push(record);
        state = next;
    }
    writer.finish()
}

/// Seed of game `index` in a corpus generated from `seed`.
pub fn game_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.gen()
}

/// `n_games` games played by `policy`, in game order.
pub fn run_bots(
    engine: &Engine,
    policy: BotPolicy,
    n_games: usize,
    seed: u64,
    tick_cap: u32,
    config_digest: &str,
) -> Vec<GameLog> {
    (0..n_games)
        .into_par_iter()
        .map(|i| play_game(engine, policy, game_seed(seed, i), tick_cap, config_digest))
        .collect()
}
