//! Deterministic tick-based game rules.
//!
//! One tick moves every actor by exactly one cell. Within a tick the order is:
//! Pac-Man moves and consumes, ghosts move, collisions resolve, timers count
//! down, the fruit spawns or despawns, extra lives are granted, and finally
//! the level-clear check runs.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::maze::{Cell, Heading, Maze};

/// Scoring and timer constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Rules {
    pub pill_points: u32,
    pub power_pill_points: u32,
    pub fruit_points: u32,
    /// First ghost of a hunt; doubles for each further ghost in the same hunt.
    pub ghost_points: u32,
    pub extra_life_every: u64,
    pub start_lives: u32,
    pub hunt_ticks: u32,
    pub hunt_ticks_per_level: u32,
    pub hunt_ticks_floor: u32,
    pub fruit_after_pills: u32,
    pub fruit_ticks: u32,
    /// Distance beyond which the fourth ghost chases Pac-Man directly.
    pub shy_ghost_radius: u32,
}

impl Default for Rules {
    fn default() -> Self {
        Self {
            pill_points: 10,
            power_pill_points: 50,
            fruit_points: 100,
            ghost_points: 200,
            extra_life_every: 10_000,
            start_lives: 3,
            hunt_ticks: 40,
            hunt_ticks_per_level: 5,
            hunt_ticks_floor: 10,
            fruit_after_pills: 70,
            fruit_ticks: 60,
            shy_ghost_radius: 8,
        }
    }
}

impl Rules {
    pub fn hunt_duration(&self, level: u32) -> u32 {
        let cut = self.hunt_ticks_per_level.saturating_mul(level.saturating_sub(1));
        self.hunt_ticks.saturating_sub(cut).max(self.hunt_ticks_floor)
    }

    pub fn ghost_value(&self, chain: u32) -> u32 {
        self.ghost_points << chain.min(3)
    }
}

/// Fixed-size bit set over maze cell indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellSet {
    bits: Vec<u64>,
}

impl CellSet {
    pub fn with_capacity(cells: usize) -> Self {
        Self { bits: vec![0; cells.div_ceil(64)] }
    }

    pub fn from_cells(maze: &Maze, cells: impl IntoIterator<Item = Cell>) -> Self {
        let mut set = Self::with_capacity(maze.cell_count());
        for c in cells {
            set.insert(maze.index(c));
        }
        set
    }

    #[inline]
    pub fn contains(&self, index: usize) -> bool {
        self.bits[index / 64] & (1 << (index % 64)) != 0
    }

    #[inline]
    pub fn insert(&mut self, index: usize) {
        self.bits[index / 64] |= 1 << (index % 64);
    }

    /// Removes `index`, returning whether it was present.
    #[inline]
    pub fn remove(&mut self, index: usize) -> bool {
        let present = self.contains(index);
        self.bits[index / 64] &= !(1 << (index % 64));
        present
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + bit)
            })
        })
    }

    pub fn cells<'a>(&'a self, maze: &'a Maze) -> impl Iterator<Item = Cell> + 'a {
        self.indices().map(move |i| maze.cell_at(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GhostMode {
    #[serde(rename = "C")]
    Chase,
    #[serde(rename = "F")]
    Frightened,
    #[serde(rename = "E")]
    Eaten,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PacMan {
    pub cell: Cell,
    pub heading: Heading,
    /// Consecutive moves made along the current heading.
    pub run: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Ghost {
    pub cell: Cell,
    pub heading: Heading,
    pub mode: GhostMode,
    /// Inside the house (or walking out of it).
    pub home: bool,
}

impl Ghost {
    /// Can kill Pac-Man this tick.
    pub fn is_threat(&self) -> bool {
        !self.home && self.mode == GhostMode::Chase
    }

    /// Can be eaten by Pac-Man this tick.
    pub fn is_prey(&self) -> bool {
        !self.home && self.mode == GhostMode::Frightened
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Fruit {
    pub present: bool,
    pub remaining: u32,
}

/// One tick of the world.
#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub tick: u64,
    pub pacman: PacMan,
    pub ghosts: [Ghost; 4],
    pub pills: CellSet,
    pub power_pills: CellSet,
    pub fruit: Fruit,
    pub fruit_spawned: bool,
    /// Pills and power pills eaten in the current level.
    pub pills_eaten: u32,
    pub hunt_timer: u32,
    /// Ghosts eaten during the current hunt.
    pub hunt_chain: u32,
    pub score: u64,
    pub lives: u32,
    pub level: u32,
    pub game_over: bool,
    pub rng: ChaCha8Rng,
}

impl GameState {
    pub fn has_pill(&self, maze: &Maze, cell: Cell) -> bool {
        self.pills.contains(maze.index(cell))
    }

    pub fn has_power_pill(&self, maze: &Maze, cell: Cell) -> bool {
        self.power_pills.contains(maze.index(cell))
    }

    pub fn is_hunt(&self) -> bool {
        self.hunt_timer > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Event {
    PillEaten,
    PowerPillEaten,
    GhostEaten { ghost: u8, points: u32 },
    FruitEaten,
    PacManDied,
    LifeGained,
    LevelCleared,
    TeleportUsed,
}

/// What happened during one tick. `tick` is the pre-step tick number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickRecord {
    #[serde(rename = "t")]
    pub tick: u64,
    #[serde(rename = "pac")]
    pub pacman: (Cell, Heading),
    #[serde(rename = "gh")]
    pub ghosts: [(Cell, GhostMode); 4],
    #[serde(rename = "d")]
    pub score_delta: u32,
    #[serde(rename = "ev")]
    pub events: Vec<Event>,
}

impl TickRecord {
    pub fn has(&self, event: Event) -> bool {
        self.events.contains(&event)
    }

    pub fn died(&self) -> bool {
        self.has(Event::PacManDied)
    }

    pub fn ghosts_eaten(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, Event::GhostEaten { .. }))
            .count()
    }

    /// Points from everything except eaten ghosts.
    pub fn item_points(&self) -> u32 {
        let ghosts: u32 = self
            .events
            .iter()
            .filter_map(|e| match e {
                Event::GhostEaten { points, .. } => Some(*points),
                _ => None,
            })
            .sum();
        self.score_delta - ghosts
    }
}

/// The score delta implied by a set of events under `rules`.
pub fn score_of_events(rules: &Rules, events: &[Event]) -> u32 {
    events
        .iter()
        .map(|e| match e {
            Event::PillEaten => rules.pill_points,
            Event::PowerPillEaten => rules.power_pill_points,
            Event::FruitEaten => rules.fruit_points,
            Event::GhostEaten { points, .. } => *points,
            _ => 0,
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Actor {
    PacMan,
    Ghost(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("maze is not playable: it needs 4 ghost starts and a ghost-house exit")]
    UnplayableMaze,
    #[error("heading {heading} is illegal at {cell} and the current heading is blocked")]
    IllegalHeading { heading: Heading, cell: Cell },
    #[error("the game is over")]
    GameOver,
}

/// State after Pac-Man's half of a tick, before ghosts move.
#[derive(Debug, Clone)]
pub struct HalfTick {
    state: GameState,
    record: TickRecord,
    pac_from: Cell,
}

impl HalfTick {
    pub fn state(&self) -> &GameState {
        &self.state
    }
}

/// How a ghost moves this tick under the engine's policy.
#[derive(Debug, Clone, PartialEq)]
pub enum GhostChoice {
    Fixed(Ghost),
    /// Uniformly random among the listed successors.
    Uniform(Vec<Ghost>),
}

#[derive(Debug, Clone)]
pub struct Engine {
    maze: Arc<Maze>,
    rules: Rules,
    scatter_corner: Cell,
}

impl Engine {
    pub fn new(maze: Arc<Maze>, rules: Rules) -> Result<Self, EngineError> {
        if !maze.is_playable() {
            return Err(EngineError::UnplayableMaze);
        }
        let scatter_corner = maze.nearest_navigable(maze.height() as i32 - 1, 0);
        Ok(Self { maze, rules, scatter_corner })
    }

    pub fn maze(&self) -> &Maze {
        &self.maze
    }

    pub fn maze_arc(&self) -> &Arc<Maze> {
        &self.maze
    }

    pub fn rules(&self) -> &Rules {
        &self.rules
    }

    pub fn initial_state(&self, seed: u64, level: u32) -> GameState {
        let maze = &*self.maze;
        GameState {
            tick: 0,
            pacman: self.start_pacman(),
            ghosts: self.start_ghosts(),
            pills: CellSet::from_cells(maze, maze.pill_layout().iter().copied()),
            power_pills: CellSet::from_cells(maze, maze.power_pill_layout().iter().copied()),
            fruit: Fruit::default(),
            fruit_spawned: false,
            pills_eaten: 0,
            hunt_timer: 0,
            hunt_chain: 0,
            score: 0,
            lives: self.rules.start_lives,
            level: level.max(1),
            game_over: false,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn start_pacman(&self) -> PacMan {
        PacMan { cell: self.maze.pacman_start(), heading: Heading::Left, run: 0 }
    }

    fn start_ghosts(&self) -> [Ghost; 4] {
        let starts = self.maze.ghost_starts();
        std::array::from_fn(|g| Ghost {
            cell: starts[g],
            heading: Heading::Up,
            mode: GhostMode::Chase,
            home: true,
        })
    }

    /// Headings Pac-Man can take from its cell, in canonical order.
    pub fn pacman_moves(&self, cell: Cell) -> Vec<Heading> {
        Heading::ALL
            .into_iter()
            .filter(|&h| self.maze.pac_neighbor(cell, h).is_some())
            .collect()
    }

    pub fn legal_moves(&self, state: &GameState, actor: Actor) -> Vec<Heading> {
        match actor {
            Actor::PacMan => self.pacman_moves(state.pacman.cell),
            Actor::Ghost(g) => {
                let ghost = &state.ghosts[g];
                if ghost.mode == GhostMode::Eaten || ghost.home {
                    self.path_heading(ghost.cell, self.ghost_path_target(g, ghost))
                        .into_iter()
                        .collect()
                } else {
                    self.roaming_headings(ghost)
                }
            }
        }
    }

    /// Non-reversing headings for a ghost outside the house; reversal only
    /// when it is the sole exit.
    fn roaming_headings(&self, ghost: &Ghost) -> Vec<Heading> {
        let back = ghost.heading.reverse();
        let fwd: Vec<Heading> = Heading::ALL
            .into_iter()
            .filter(|&h| h != back && self.maze.pac_neighbor(ghost.cell, h).is_some())
            .collect();
        if fwd.is_empty() && self.maze.pac_neighbor(ghost.cell, back).is_some() {
            vec![back]
        } else {
            fwd
        }
    }

    fn ghost_path_target(&self, g: usize, ghost: &Ghost) -> Cell {
        if ghost.mode == GhostMode::Eaten {
            self.maze.ghost_starts()[g]
        } else {
            self.maze.house_exit().expect("playable maze")
        }
    }

    /// First heading (canonical order) on a shortest ghost-graph path.
    fn path_heading(&self, from: Cell, to: Cell) -> Option<Heading> {
        let d = self.maze.ghost_distance_raw(from, to);
        if d == 0 || d == crate::maze::UNREACHABLE {
            return None;
        }
        Heading::ALL.into_iter().find(|&h| {
            self.maze
                .ghost_neighbor(from, h)
                .is_some_and(|n| self.maze.ghost_distance_raw(n, to) + 1 == d)
        })
    }

    fn moved(&self, ghost: &Ghost, heading: Heading) -> Ghost {
        let cell = self
            .maze
            .ghost_neighbor(ghost.cell, heading)
            .expect("heading was checked");
        Ghost { cell, heading, ..*ghost }
    }

    /// Cell `n` steps ahead of Pac-Man along its heading, stopping at walls.
    fn ahead(&self, pac: &PacMan, n: usize) -> Cell {
        let mut cell = pac.cell;
        for _ in 0..n {
            match self.maze.pac_neighbor(cell, pac.heading) {
                Some(next) => cell = next,
                None => break,
            }
        }
        cell
    }

    pub fn chase_target(&self, g: usize, ghost: &Ghost, pac: &PacMan, lead_ghost: Cell) -> Cell {
        match g {
            0 => pac.cell,
            1 => self.ahead(pac, 4),
            2 => {
                let pivot = self.ahead(pac, 2);
                let row = 2 * pivot.row as i32 - lead_ghost.row as i32;
                let col = 2 * pivot.col as i32 - lead_ghost.col as i32;
                self.maze.nearest_navigable(row, col)
            }
            _ => {
                let far = self.maze.distance_raw(ghost.cell, pac.cell) as u32
                    > self.rules.shy_ghost_radius;
                if far {
                    pac.cell
                } else {
                    self.scatter_corner
                }
            }
        }
    }

    /// The engine's ghost policy for one ghost, given the tick number and
    /// Pac-Man's position. `lead_ghost` is ghost 0's cell (used by ghost 2).
    pub fn ghost_choice(
        &self,
        tick: u64,
        g: usize,
        ghost: &Ghost,
        pac: &PacMan,
        lead_ghost: Cell,
    ) -> GhostChoice {
        let half_speed_pause = ghost.mode == GhostMode::Frightened && tick % 2 == 1;
        if ghost.mode == GhostMode::Eaten {
            let target = self.maze.ghost_starts()[g];
            return GhostChoice::Fixed(match self.path_heading(ghost.cell, target) {
                Some(h) => {
                    let mut next = self.moved(ghost, h);
                    if next.cell == target {
                        next.mode = GhostMode::Chase;
                        next.home = true;
                    }
                    next
                }
                None => Ghost { mode: GhostMode::Chase, home: true, ..*ghost },
            });
        }
        if half_speed_pause {
            return GhostChoice::Fixed(*ghost);
        }
        if ghost.home {
            let exit = self.maze.house_exit().expect("playable maze");
            return GhostChoice::Fixed(match self.path_heading(ghost.cell, exit) {
                Some(h) => {
                    let mut next = self.moved(ghost, h);
                    next.home = next.cell != exit;
                    next
                }
                None => Ghost { home: false, ..*ghost },
            });
        }
        let options = self.roaming_headings(ghost);
        match ghost.mode {
            GhostMode::Frightened => {
                GhostChoice::Uniform(options.into_iter().map(|h| self.moved(ghost, h)).collect())
            }
            _ => {
                let target = self.chase_target(g, ghost, pac, lead_ghost);
                let best = options
                    .into_iter()
                    .min_by_key(|&h| {
                        let next = self.maze.pac_neighbor(ghost.cell, h).expect("legal");
                        self.maze.distance_raw(next, target)
                    })
                    .expect("ghosts always have a move on a valid maze");
                GhostChoice::Fixed(self.moved(ghost, best))
            }
        }
    }

    /// Every successor a ghost could take this tick, ignoring the policy:
    /// uniform over legal moves for roaming ghosts, the single scripted move
    /// for home and eaten ghosts, and standing still on a frightened pause.
    pub fn ghost_alternatives(&self, state: &GameState, g: usize) -> Vec<Ghost> {
        let ghost = &state.ghosts[g];
        if ghost.home || ghost.mode == GhostMode::Eaten {
            return match self.ghost_choice(state.tick, g, ghost, &state.pacman, state.ghosts[0].cell) {
                GhostChoice::Fixed(next) => vec![next],
                GhostChoice::Uniform(v) => v,
            };
        }
        if ghost.mode == GhostMode::Frightened && state.tick % 2 == 1 {
            return vec![*ghost];
        }
        self.roaming_headings(ghost)
            .into_iter()
            .map(|h| self.moved(ghost, h))
            .collect()
    }

    /// Heading to apply when the player asks for `desired`: the request if
    /// legal, else the current heading, else the first non-reversing legal
    /// heading, else reversal.
    pub fn resolve_heading(&self, state: &GameState, desired: Option<Heading>) -> Heading {
        let moves = self.pacman_moves(state.pacman.cell);
        let current = state.pacman.heading;
        if let Some(h) = desired.filter(|h| moves.contains(h)) {
            return h;
        }
        if moves.contains(&current) {
            return current;
        }
        moves
            .iter()
            .copied()
            .find(|&h| h != current.reverse())
            .or_else(|| moves.first().copied())
            .unwrap_or(current)
    }

    /// Pac-Man's half of a tick: movement and consumption.
    pub fn begin_tick(&self, state: &GameState, heading: Heading) -> Result<HalfTick, EngineError> {
        if state.game_over {
            return Err(EngineError::GameOver);
        }
        let maze = &*self.maze;
        let from = state.pacman.cell;
        let heading = if maze.pac_neighbor(from, heading).is_some() {
            heading
        } else if maze.pac_neighbor(from, state.pacman.heading).is_some() {
            state.pacman.heading
        } else {
            return Err(EngineError::IllegalHeading { heading, cell: from });
        };

        let mut s = state.clone();
        let mut events = Vec::new();
        let mut delta = 0u32;
        if maze.is_teleport_move(from, heading) {
            events.push(Event::TeleportUsed);
        }
        let to = maze.pac_neighbor(from, heading).expect("checked");
        let run = if heading == s.pacman.heading { s.pacman.run + 1 } else { 1 };
        s.pacman = PacMan { cell: to, heading, run };

        let idx = maze.index(to);
        if s.pills.remove(idx) {
            events.push(Event::PillEaten);
            delta += self.rules.pill_points;
            s.pills_eaten += 1;
        }
        if s.power_pills.remove(idx) {
            events.push(Event::PowerPillEaten);
            delta += self.rules.power_pill_points;
            s.pills_eaten += 1;
            s.hunt_timer = self.rules.hunt_duration(s.level);
            s.hunt_chain = 0;
            for ghost in s.ghosts.iter_mut() {
                if ghost.mode != GhostMode::Eaten {
                    ghost.mode = GhostMode::Frightened;
                }
            }
        }
        if s.fruit.present && maze.fruit_cell() == Some(to) {
            events.push(Event::FruitEaten);
            delta += self.rules.fruit_points;
            s.fruit = Fruit::default();
        }

        let record = TickRecord {
            tick: state.tick,
            pacman: (to, heading),
            ghosts: [(Cell::new(0, 0), GhostMode::Chase); 4],
            score_delta: delta,
            events,
        };
        Ok(HalfTick { state: s, record, pac_from: from })
    }

    /// Ghost moves sampled from the engine policy.
    pub fn policy_ghosts(&self, half: &mut HalfTick) -> [Ghost; 4] {
        let s = &mut half.state;
        let lead = s.ghosts[0].cell;
        std::array::from_fn(|g| {
            match self.ghost_choice(s.tick, g, &s.ghosts[g], &s.pacman, lead) {
                GhostChoice::Fixed(next) => next,
                GhostChoice::Uniform(options) => {
                    let i = s.rng.gen_range(0..options.len());
                    options[i]
                }
            }
        })
    }

    /// Completes a tick with the given ghost successors.
    pub fn finish_tick(&self, half: HalfTick, next_ghosts: [Ghost; 4]) -> (GameState, TickRecord) {
        let HalfTick { state: mut s, mut record, pac_from } = half;
        let rules = &self.rules;
        let prev_cells: [Cell; 4] = std::array::from_fn(|g| s.ghosts[g].cell);
        s.ghosts = next_ghosts;
        let pac = s.pacman.cell;

        // Collisions: same cell, or swapped cells this tick.
        let hits: Vec<usize> = (0..4)
            .filter(|&g| {
                let gh = &s.ghosts[g];
                !gh.home
                    && gh.mode != GhostMode::Eaten
                    && (gh.cell == pac || (gh.cell == pac_from && prev_cells[g] == pac))
            })
            .collect();
        for &g in &hits {
            if s.ghosts[g].mode == GhostMode::Frightened {
                let points = rules.ghost_value(s.hunt_chain);
                s.hunt_chain += 1;
                s.ghosts[g].mode = GhostMode::Eaten;
                record.events.push(Event::GhostEaten { ghost: g as u8, points });
                record.score_delta += points;
            }
        }
        let died = hits.iter().any(|&g| s.ghosts[g].mode == GhostMode::Chase);
        if died {
            record.events.push(Event::PacManDied);
            s.lives = s.lives.saturating_sub(1);
            if s.lives == 0 {
                s.game_over = true;
            } else {
                s.pacman = self.start_pacman();
                s.ghosts = self.start_ghosts();
            }
            s.hunt_timer = 0;
            s.hunt_chain = 0;
        }

        if s.hunt_timer > 0 {
            s.hunt_timer -= 1;
            if s.hunt_timer == 0 {
                s.hunt_chain = 0;
                for ghost in s.ghosts.iter_mut() {
                    if ghost.mode == GhostMode::Frightened {
                        ghost.mode = GhostMode::Chase;
                    }
                }
            }
        } else {
            for ghost in s.ghosts.iter_mut() {
                if ghost.mode == GhostMode::Frightened {
                    ghost.mode = GhostMode::Chase;
                }
            }
        }
        if s.fruit.present {
            s.fruit.remaining = s.fruit.remaining.saturating_sub(1);
            if s.fruit.remaining == 0 {
                s.fruit.present = false;
            }
        }

        if !s.fruit_spawned
            && s.pills_eaten >= rules.fruit_after_pills
            && self.maze.fruit_cell().is_some()
        {
            s.fruit_spawned = true;
            s.fruit = Fruit { present: true, remaining: rules.fruit_ticks };
        }

        let before = s.score;
        s.score += record.score_delta as u64;
        if let Some(now) = s.score.checked_div(rules.extra_life_every) {
            let gained = now - before / rules.extra_life_every;
            for _ in 0..gained {
                s.lives += 1;
                record.events.push(Event::LifeGained);
            }
        }

        if !s.game_over && s.pills.is_empty() && s.power_pills.is_empty() {
            record.events.push(Event::LevelCleared);
            let maze = &*self.maze;
            s.level += 1;
            s.pills = CellSet::from_cells(maze, maze.pill_layout().iter().copied());
            s.power_pills = CellSet::from_cells(maze, maze.power_pill_layout().iter().copied());
            s.pills_eaten = 0;
            s.fruit = Fruit::default();
            s.fruit_spawned = false;
            s.hunt_timer = 0;
            s.hunt_chain = 0;
            s.pacman = self.start_pacman();
            s.ghosts = self.start_ghosts();
        }

        record.ghosts = std::array::from_fn(|g| (s.ghosts[g].cell, s.ghosts[g].mode));
        s.tick += 1;
        (s, record)
    }

    /// Advances one tick. An illegal `heading` falls back to the current
    /// heading when that one is open.
    pub fn step(&self, state: &GameState, heading: Heading) -> Result<(GameState, TickRecord), EngineError> {
        let mut half = self.begin_tick(state, heading)?;
        let ghosts = self.policy_ghosts(&mut half);
        Ok(self.finish_tick(half, ghosts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> Engine {
        Engine::new(Arc::new(Maze::default_maze()), Rules::default()).unwrap()
    }

    #[test]
    fn initial_state_matches_layout() {
        let e = engine();
        let s = e.initial_state(1, 1);
        assert_eq!(s.pills.len(), e.maze().pill_layout().len());
        assert_eq!(s.power_pills.len(), 4);
        assert_eq!((s.lives, s.score, s.hunt_timer), (3, 0, 0));
        assert_eq!(s, e.initial_state(1, 1));
        assert_ne!(s.rng, e.initial_state(2, 1).rng);
    }

    #[test]
    fn hunt_duration_schedule() {
        let r = Rules::default();
        assert_eq!(r.hunt_duration(1), 40);
        assert_eq!(r.hunt_duration(2), 35);
        assert_eq!(r.hunt_duration(7), 10);
        assert_eq!(r.hunt_duration(20), 10);
    }

    #[test]
    fn level_two_starts_with_shorter_hunts() {
        let e = engine();
        let mut s = e.initial_state(1, 2);
        let target = *e.maze().power_pill_layout().iter().next().unwrap();
        s.pacman.cell = target;
        // Step off and back on: find a neighbor.
        let h = e.pacman_moves(target)[0];
        let (s1, _) = e.step(&s, h).unwrap();
        let (s2, rec) = e.step(&s1, h.reverse()).unwrap();
        assert!(rec.has(Event::PowerPillEaten));
        assert_eq!(s2.hunt_timer, 35 - 1);
    }

    #[test]
    fn ghost_values_double_and_cap() {
        let r = Rules::default();
        let v: Vec<u32> = (0..5).map(|c| r.ghost_value(c)).collect();
        assert_eq!(v, vec![200, 400, 800, 1600, 1600]);
    }

    #[test]
    fn cellset_roundtrip() {
        let mut s = CellSet::with_capacity(200);
        for i in [0, 63, 64, 130, 199] {
            s.insert(i);
        }
        assert_eq!(s.indices().collect::<Vec<_>>(), vec![0, 63, 64, 130, 199]);
        assert!(s.remove(64));
        assert!(!s.remove(64));
        assert_eq!(s.len(), 4);
    }
}
