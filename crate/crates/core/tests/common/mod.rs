#![allow(dead_code)]

pub mod oracle;

use std::sync::Arc;

use pacmodel::bots::{Bot, BotPolicy};
use pacmodel::engine::{Engine, GameState, GhostMode, Rules};
use pacmodel::maze::{Cell, Heading, Maze};

/// A reduced maze: one ghost house, four power pills, a handful of
/// junctions. Small enough for exhaustive tree checks.
pub const SMALL: &str = "\
###########
#o...P...o#
#.###.###.#
#.........#
#.###H###.#
#.#GGHGG#.#
#o#######o#
###########
";

/// A ten-cell loop closed by a teleport pair, with the house below.
pub const LOOP: &str = "\
##########
T...P....T
####H#####
###GGGG###
##########
";

/// A seven-cell dead-end corridor above the house.
pub const CORRIDOR: &str = "\
#########
#P......#
####H####
###GGGG##
#########
";

pub fn engine_for(text: &str) -> Engine {
    Engine::new(Arc::new(Maze::parse(text).expect("test maze parses")), Rules::default()).expect("playable")
}

pub fn default_engine() -> Engine {
    Engine::new(Arc::new(Maze::default_maze()), Rules::default()).unwrap()
}

/// States reached by a random walker after a seeded number of ticks, with
/// at least one ghost out of the house.
pub fn midgame_states(engine: &Engine, count: usize, seed: u64) -> Vec<GameState> {
    let mut out = Vec::new();
    let mut k = 0u64;
    while out.len() < count {
        let game_seed = seed + k;
        k += 1;
        let mut bot = Bot::new(BotPolicy::Random, game_seed);
        let mut s = engine.initial_state(game_seed, 1);
        let ticks = 8 + (game_seed * 7 % 30);
        for _ in 0..ticks {
            if s.game_over {
                break;
            }
            let h = bot.choose(engine, &s);
            s = engine.step(&s, h).unwrap().0;
        }
        if !s.game_over && s.ghosts.iter().any(|g| !g.home) {
            out.push(s);
        }
    }
    out
}

/// Puts ghost `g` outside the house at `cell` with the given heading/mode.
pub fn place_ghost(state: &mut GameState, g: usize, cell: Cell, heading: Heading, mode: GhostMode) {
    let ghost = &mut state.ghosts[g];
    ghost.cell = cell;
    ghost.heading = heading;
    ghost.mode = mode;
    ghost.home = false;
}

pub fn c(row: u16, col: u16) -> Cell {
    Cell::new(row, col)
}
