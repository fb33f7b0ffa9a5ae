//! Model 1: simple per-state features summed over the full look-ahead tree.
//!
//! For each first Pac-Man heading `a`, the score is the sum over every tree
//! node under `a` of the node probability times the state utility.

use serde::{Deserialize, Serialize};

use crate::engine::{Engine, GameState};
use crate::lookahead::{visit_full_tree, SearchParams, TreeError, FULL_TREE_NODE_CAP};
use crate::maze::{Heading, Maze, UNREACHABLE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimpleWeights {
    pub threat_w: f64,
    pub reward_w: f64,
    pub lives_w: f64,
    pub hunt_w: f64,
}

impl Default for SimpleWeights {
    fn default() -> Self {
        Self { threat_w: -1.0, reward_w: 1.0, lives_w: 5.0, hunt_w: 2.0 }
    }
}

impl SimpleWeights {
    pub fn zero() -> Self {
        Self { threat_w: 0.0, reward_w: 0.0, lives_w: 0.0, hunt_w: 0.0 }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            threat_w: self.threat_w * c,
            reward_w: self.reward_w * c,
            lives_w: self.lives_w * c,
            hunt_w: self.hunt_w * c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Model1Config {
    pub params: SearchParams,
    pub weights: SimpleWeights,
    /// Coefficient on the ghost-spread term inside Threat (a stand-in for
    /// "distribution across the map").
    pub dispersion: f64,
    pub node_cap: usize,
}

impl Default for Model1Config {
    fn default() -> Self {
        Self {
            params: SearchParams::default(),
            weights: SimpleWeights::default(),
            dispersion: 1.0,
            node_cap: FULL_TREE_NODE_CAP,
        }
    }
}

/// The four raw features of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleFeatures {
    pub threat: f64,
    pub reward: f64,
    pub lives: f64,
    pub hunt: f64,
}

fn proximity(d: u16) -> f64 {
    if d == UNREACHABLE {
        0.0
    } else {
        1.0 / (1.0 + d as f64)
    }
}

pub fn features(state: &GameState, maze: &Maze, dispersion: f64) -> SimpleFeatures {
    let pac = state.pacman.cell;
    let threats: Vec<_> = state.ghosts.iter().filter(|g| g.is_threat()).collect();

    let mut threat = 0.0;
    if !threats.is_empty() {
        threat = threats
            .iter()
            .map(|g| proximity(maze.ghost_distance_raw(pac, g.cell)))
            .sum::<f64>()
            / threats.len() as f64;
        let mut pairs = Vec::new();
        for i in 0..threats.len() {
            for j in i + 1..threats.len() {
                let d = maze.ghost_distance_raw(threats[i].cell, threats[j].cell);
                if d != UNREACHABLE {
                    pairs.push(d as f64);
                }
            }
        }
        if !pairs.is_empty() {
            let n = pairs.len() as f64;
            let m = pairs.iter().sum::<f64>() / n;
            let var = pairs.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / n;
            let diam = (maze.diameter() as f64).max(1.0);
            threat += dispersion * var / (diam * diam);
        }
    }

    let has_item = |c| state.pills.contains(maze.index(c)) || state.power_pills.contains(maze.index(c));
    let reward = state
        .pills
        .indices()
        .chain(state.power_pills.indices())
        .map(|i| {
            let cell = maze.cell_at(i);
            let adjacent = Heading::ALL
                .into_iter()
                .filter_map(|h| maze.pac_neighbor(cell, h))
                .filter(|&n| has_item(n))
                .count();
            (1 + adjacent) as f64 * proximity(maze.distance_raw(pac, cell))
        })
        .sum();

    let hunt = if state.is_hunt() {
        state
            .ghosts
            .iter()
            .filter(|g| g.is_prey())
            .map(|g| proximity(maze.ghost_distance_raw(pac, g.cell)))
            .sum()
    } else {
        let pill = state
            .power_pills
            .cells(maze)
            .map(|c| maze.distance_raw(pac, c))
            .min();
        let ghost = threats.iter().map(|g| maze.ghost_distance_raw(pac, g.cell)).min();
        match (pill, ghost) {
            (Some(p), Some(g)) => proximity(p) * proximity(g),
            _ => 0.0,
        }
    };

    SimpleFeatures { threat, reward, lives: state.lives as f64, hunt }
}

pub fn state_utility(state: &GameState, maze: &Maze, weights: &SimpleWeights, dispersion: f64) -> f64 {
    let f = features(state, maze, dispersion);
    weights.threat_w * f.threat + weights.reward_w * f.reward + weights.lives_w * f.lives + weights.hunt_w * f.hunt
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model1Prediction {
    pub heading: Heading,
    /// Score per heading in canonical order; `None` for headings not taken.
    pub scores: [Option<f64>; 4],
    pub nodes: usize,
}

/// Highest-scoring heading; ties go to the earliest in canonical order.
pub fn argmax_heading(scores: &[Option<f64>; 4]) -> Option<Heading> {
    let mut best: Option<(Heading, f64)> = None;
    for h in Heading::ALL {
        if let Some(s) = scores[h.index()] {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((h, s));
            }
        }
    }
    best.map(|(h, _)| h)
}

pub fn predict_model1(engine: &Engine, state: &GameState, config: &Model1Config) -> Result<Model1Prediction, TreeError> {
    let maze = engine.maze();
    let mut scores: [Option<f64>; 4] = [None; 4];
    let nodes = visit_full_tree(engine, state, config.params, config.node_cap, |first, _, p, s| {
        let u = state_utility(s, maze, &config.weights, config.dispersion);
        *scores[first.index()].get_or_insert(0.0) += p * u;
    })?;
    let heading = argmax_heading(&scores).unwrap_or(state.pacman.heading);
    Ok(Model1Prediction { heading, scores, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_breaks_ties_canonically() {
        assert_eq!(argmax_heading(&[None, Some(1.0), Some(1.0), None]), Some(Heading::Left));
        assert_eq!(argmax_heading(&[Some(0.0), Some(2.0), None, Some(2.0)]), Some(Heading::Left));
        assert_eq!(argmax_heading(&[None; 4]), None);
    }
}
