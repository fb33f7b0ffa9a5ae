//! Future-state enumeration.
//!
//! Three views of the future are built here:
//!
//! * [`enumerate_plans`]: Pac-Man-only walks up to the search depth, with
//!   ghosts advanced by the engine's own policy inside each walk.
//! * [`expand_full_tree`] / [`visit_full_tree`]: the classic look-ahead tree
//!   that branches every actor. Ghost moves are treated as uniformly likely
//!   among their legal alternatives and each node carries the product of
//!   those probabilities along its path.
//! * [`project_ghost_beliefs`]: per-ghost, per-step distributions over cells,
//!   pushed forward from the current state without branching Pac-Man.
//!
//! The back-tracking limit prunes the reversal of the current heading once
//! Pac-Man has moved more than `lambda` consecutive steps in one direction.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Engine, Event, GameState, Ghost, GhostChoice, GhostMode, TickRecord};
use crate::maze::{Cell, Heading, UNREACHABLE};

pub const DEPTH_RANGE: std::ops::RangeInclusive<u32> = 4..=9;
pub const LAMBDA_RANGE: std::ops::RangeInclusive<u32> = 3..=6;

/// Hard cap on nodes materialized or visited by the full tree.
pub const FULL_TREE_NODE_CAP: usize = 5_000_000;

static FULL_TREE_EXPANSIONS: AtomicU64 = AtomicU64::new(0);

/// Number of full-tree expansions started by this process.
pub fn full_tree_expansions() -> u64 {
    FULL_TREE_EXPANSIONS.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchParams {
    /// Look-ahead horizon in ticks.
    pub depth: u32,
    /// Back-tracking limit.
    pub lambda: u32,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self { depth: 4, lambda: 5 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamError {
    #[error("depth {0} outside 4..=9")]
    Depth(u32),
    #[error("lambda {0} outside 3..=6")]
    Lambda(u32),
}

impl SearchParams {
    /// Parameters inside the studied range (depth 4..=9, lambda 3..=6).
    pub fn new(depth: u32, lambda: u32) -> Result<Self, ParamError> {
        if !DEPTH_RANGE.contains(&depth) {
            return Err(ParamError::Depth(depth));
        }
        if !LAMBDA_RANGE.contains(&lambda) {
            return Err(ParamError::Lambda(lambda));
        }
        Ok(Self { depth, lambda })
    }

    /// Any depth and lambda; for experiments and small-scale checks.
    pub fn custom(depth: u32, lambda: u32) -> Self {
        Self { depth, lambda }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        Self::new(self.depth, self.lambda).map(|_| ())
    }

    /// Alias used in the decision-theoretic formulation.
    pub fn t_max(&self) -> u32 {
        self.depth
    }
}

/// Headings Pac-Man may take next under the back-tracking limit.
pub fn pruned_moves(engine: &Engine, cell: Cell, heading: Heading, run: u32, lambda: u32) -> Vec<Heading> {
    let mut moves = engine.pacman_moves(cell);
    if run > lambda {
        moves.retain(|&h| h != heading.reverse());
    }
    moves
}

fn next_run(prev: Heading, run: u32, h: Heading) -> u32 {
    if h == prev {
        run + 1
    } else {
        1
    }
}

fn ends_plan(state: &GameState, record: &TickRecord) -> bool {
    state.game_over || record.has(Event::PacManDied) || record.has(Event::LevelCleared)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanStep {
    pub state: GameState,
    pub record: TickRecord,
}

/// An ordered sequence of Pac-Man moves and the states they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub headings: Vec<Heading>,
    pub steps: Vec<PlanStep>,
    /// Ended early by death or level clear.
    pub truncated: bool,
}

impl Plan {
    pub fn first_heading(&self) -> Heading {
        self.headings[0]
    }

    pub fn len(&self) -> usize {
        self.headings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.headings.is_empty()
    }

    pub fn leaf(&self) -> &GameState {
        &self.steps.last().expect("plans are nonempty").state
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.steps.iter().map(|s| s.state.pacman.cell)
    }
}

/// All Pac-Man walks of length up to `params.depth` from `state`, in
/// canonical heading order. `run_length` is Pac-Man's current corridor run.
pub fn enumerate_plans(engine: &Engine, state: &GameState, params: SearchParams, run_length: u32) -> Vec<Plan> {
    let mut plans = Vec::new();
    if state.game_over || params.depth == 0 {
        return plans;
    }
    let mut headings = Vec::with_capacity(params.depth as usize);
    let mut steps = Vec::with_capacity(params.depth as usize);
    plan_dfs(engine, state, params, run_length, &mut headings, &mut steps, &mut plans);
    plans
}

fn plan_dfs(
    engine: &Engine,
    state: &GameState,
    params: SearchParams,
    run: u32,
    headings: &mut Vec<Heading>,
    steps: &mut Vec<PlanStep>,
    out: &mut Vec<Plan>,
) {
    let moves = pruned_moves(engine, state.pacman.cell, state.pacman.heading, run, params.lambda);
    for h in moves {
        let (next, record) = engine.step(state, h).expect("pruned moves are legal");
        let stop = ends_plan(&next, &record);
        let run_after = next_run(state.pacman.heading, run, h);
        headings.push(h);
        steps.push(PlanStep { state: next, record });
        if stop || headings.len() as u32 == params.depth {
            out.push(Plan {
                headings: headings.clone(),
                steps: steps.clone(),
                truncated: stop && (headings.len() as u32) < params.depth,
            });
        } else {
            let next = steps.last().expect("just pushed").state.clone();
            plan_dfs(engine, &next, params, run_after, headings, steps, out);
        }
        headings.pop();
        steps.pop();
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("look-ahead tree exceeds {cap} nodes; run this depth offline")]
    CapExceeded { cap: usize },
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub state: GameState,
    pub record: Option<TickRecord>,
    /// Product of ghost-move probabilities from the root.
    pub probability: f64,
    pub depth: u32,
    pub parent: Option<usize>,
    /// Pac-Man heading taken into this node.
    pub heading: Option<Heading>,
    /// First Pac-Man heading on the path from the root.
    pub first_heading: Option<Heading>,
}

/// A materialized full look-ahead tree. `nodes[0]` is the root.
#[derive(Debug, Clone)]
pub struct FullTree {
    pub nodes: Vec<TreeNode>,
}

impl FullTree {
    pub fn children(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(move |(_, n)| n.parent == Some(index))
            .map(|(i, _)| i)
    }
}

/// One child of a full-tree node: Pac-Man heading, ghost successors and the
/// probability of those ghost moves.
fn full_tree_children(engine: &Engine, state: &GameState, heading: Heading) -> Vec<(GameState, TickRecord, f64)> {
    let half = engine.begin_tick(state, heading).expect("legal heading");
    let alts: Vec<Vec<Ghost>> = (0..4).map(|g| engine.ghost_alternatives(half.state(), g)).collect();
    let mut out = Vec::new();
    let mut idx = [0usize; 4];
    loop {
        let ghosts: [Ghost; 4] = std::array::from_fn(|g| alts[g][idx[g]]);
        let p: f64 = alts.iter().map(|a| 1.0 / a.len() as f64).product();
        let (s, r) = engine.finish_tick(half.clone(), ghosts);
        out.push((s, r, p));
        // Odometer over the ghost alternatives, last ghost fastest.
        let mut g = 4;
        loop {
            if g == 0 {
                return out;
            }
            g -= 1;
            idx[g] += 1;
            if idx[g] < alts[g].len() {
                break;
            }
            idx[g] = 0;
        }
    }
}

/// Materializes the full look-ahead tree, failing once it grows past `cap`.
pub fn expand_full_tree(
    engine: &Engine,
    state: &GameState,
    params: SearchParams,
    cap: usize,
) -> Result<FullTree, TreeError> {
    FULL_TREE_EXPANSIONS.fetch_add(1, Ordering::Relaxed);
    let mut nodes = vec![TreeNode {
        state: state.clone(),
        record: None,
        probability: 1.0,
        depth: 0,
        parent: None,
        heading: None,
        first_heading: None,
    }];
    let mut runs = vec![state.pacman.run];
    let mut frontier = 0;
    while frontier < nodes.len() {
        let (depth, terminal) = {
            let n = &nodes[frontier];
            let terminal = n.state.game_over || n.record.as_ref().is_some_and(|r| ends_plan(&n.state, r));
            (n.depth, terminal)
        };
        if depth < params.depth && !terminal {
            let parent = nodes[frontier].clone();
            let run = runs[frontier];
            let moves = pruned_moves(engine, parent.state.pacman.cell, parent.state.pacman.heading, run, params.lambda);
            for h in moves {
                for (s, r, p) in full_tree_children(engine, &parent.state, h) {
                    if nodes.len() >= cap {
                        return Err(TreeError::CapExceeded { cap });
                    }
                    runs.push(next_run(parent.state.pacman.heading, run, h));
                    nodes.push(TreeNode {
                        state: s,
                        record: Some(r),
                        probability: parent.probability * p,
                        depth: depth + 1,
                        parent: Some(frontier),
                        heading: Some(h),
                        first_heading: parent.first_heading.or(Some(h)),
                    });
                }
            }
        }
        frontier += 1;
    }
    Ok(FullTree { nodes })
}

/// Depth-first walk of the full tree without materializing it. The visitor
/// receives every non-root node as (first heading, depth, probability,
/// state). Returns the number of nodes visited.
pub fn visit_full_tree<F>(
    engine: &Engine,
    state: &GameState,
    params: SearchParams,
    cap: usize,
    mut visit: F,
) -> Result<usize, TreeError>
where
    F: FnMut(Heading, u32, f64, &GameState),
{
    FULL_TREE_EXPANSIONS.fetch_add(1, Ordering::Relaxed);
    let mut count = 1usize;
    let moves = pruned_moves(engine, state.pacman.cell, state.pacman.heading, state.pacman.run, params.lambda);
    for h in moves {
        visit_dfs(engine, state, params, state.pacman.run, h, h, 1, 1.0, cap, &mut count, &mut visit)?;
    }
    Ok(count)
}

#[allow(clippy::too_many_arguments)]
fn visit_dfs<F>(
    engine: &Engine,
    state: &GameState,
    params: SearchParams,
    run: u32,
    heading: Heading,
    first: Heading,
    depth: u32,
    probability: f64,
    cap: usize,
    count: &mut usize,
    visit: &mut F,
) -> Result<(), TreeError>
where
    F: FnMut(Heading, u32, f64, &GameState),
{
    let run_after = next_run(state.pacman.heading, run, heading);
    for (child, record, p) in full_tree_children(engine, state, heading) {
        *count += 1;
        if *count > cap {
            return Err(TreeError::CapExceeded { cap });
        }
        let prob = probability * p;
        visit(first, depth, prob, &child);
        if depth < params.depth && !ends_plan(&child, &record) {
            let moves = pruned_moves(engine, child.pacman.cell, child.pacman.heading, run_after, params.lambda);
            for h in moves {
                visit_dfs(engine, &child, params, run_after, h, first, depth + 1, prob, cap, count, visit)?;
            }
        }
    }
    Ok(())
}

/// Belief about one ghost at one future step.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostStepBelief {
    pub mode: GhostMode,
    pub home: bool,
    /// Cell probabilities sorted by cell; sums to one.
    pub cells: Vec<(Cell, f64)>,
}

impl GhostStepBelief {
    pub fn is_threat(&self) -> bool {
        !self.home && self.mode == GhostMode::Chase
    }

    pub fn is_prey(&self) -> bool {
        !self.home && self.mode == GhostMode::Frightened
    }

    pub fn probability(&self, cell: Cell) -> f64 {
        self.cells
            .binary_search_by_key(&cell, |&(c, _)| c)
            .map(|i| self.cells[i].1)
            .unwrap_or(0.0)
    }

    pub fn mass(&self) -> f64 {
        self.cells.iter().map(|&(_, p)| p).sum()
    }

    pub fn most_likely(&self) -> Cell {
        self.cells
            .iter()
            .fold(None::<(Cell, f64)>, |best, &(c, p)| match best {
                Some((_, bp)) if bp >= p => best,
                _ => Some((c, p)),
            })
            .map(|(c, _)| c)
            .expect("beliefs are nonempty")
    }
}

/// Per-ghost, per-step distributions over cells for steps `1..=depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostBeliefs {
    steps: Vec<[GhostStepBelief; 4]>,
}

impl GhostBeliefs {
    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    /// Belief for ghost `g` at step `t` (1-based).
    pub fn at(&self, g: usize, t: usize) -> &GhostStepBelief {
        &self.steps[t - 1][g]
    }

    pub fn step(&self, t: usize) -> &[GhostStepBelief; 4] {
        &self.steps[t - 1]
    }

    /// Expected ghost-graph distance from `from` to ghost `g` at step `t`.
    pub fn expected_distance(&self, engine: &Engine, g: usize, t: usize, from: Cell) -> f64 {
        let maze = engine.maze();
        self.at(g, t)
            .cells
            .iter()
            .map(|&(c, p)| {
                let d = maze.ghost_distance_raw(from, c);
                let d = if d == UNREACHABLE { maze.diameter() as f64 } else { d as f64 };
                p * d
            })
            .sum()
    }
}

/// Pushes every ghost forward `depth` steps under the engine's policy:
/// deterministic moves keep all mass on one successor, frightened moves
/// split it uniformly. Pac-Man is assumed to stay where it is for the
/// purpose of chase targets; new power pills are not anticipated.
pub fn project_ghost_beliefs(engine: &Engine, state: &GameState, depth: usize) -> GhostBeliefs {
    let mut current: [BTreeMap<Ghost, f64>; 4] = std::array::from_fn(|g| {
        let mut m = BTreeMap::new();
        m.insert(state.ghosts[g], 1.0);
        m
    });
    let pac = state.pacman;
    let mut timer = state.hunt_timer;
    let mut steps = Vec::with_capacity(depth);
    for t in 1..=depth {
        let tick = state.tick + t as u64 - 1;
        let lead = most_likely_ghost(&current[0]).cell;
        let mut next: [BTreeMap<Ghost, f64>; 4] = Default::default();
        for g in 0..4 {
            for (ghost, &p) in &current[g] {
                match engine.ghost_choice(tick, g, ghost, &pac, lead) {
                    GhostChoice::Fixed(n) => *next[g].entry(n).or_insert(0.0) += p,
                    GhostChoice::Uniform(options) => {
                        let share = p / options.len() as f64;
                        for n in options {
                            *next[g].entry(n).or_insert(0.0) += share;
                        }
                    }
                }
            }
        }
        // Timer phase, mirroring the engine.
        let calm = if timer > 0 {
            timer -= 1;
            timer == 0
        } else {
            true
        };
        if calm {
            for dist in next.iter_mut() {
                let relabeled: Vec<(Ghost, f64)> = dist
                    .iter()
                    .map(|(gh, &p)| {
                        let mut gh = *gh;
                        if gh.mode == GhostMode::Frightened {
                            gh.mode = GhostMode::Chase;
                        }
                        (gh, p)
                    })
                    .collect();
                dist.clear();
                for (gh, p) in relabeled {
                    *dist.entry(gh).or_insert(0.0) += p;
                }
            }
        }
        steps.push(std::array::from_fn(|g| marginal(&next[g])));
        current = next;
    }
    GhostBeliefs { steps }
}

fn most_likely_ghost(dist: &BTreeMap<Ghost, f64>) -> Ghost {
    let mut best: Option<(&Ghost, f64)> = None;
    for (g, &p) in dist {
        if best.is_none_or(|(_, bp)| p > bp) {
            best = Some((g, p));
        }
    }
    *best.expect("nonempty").0
}

fn marginal(dist: &BTreeMap<Ghost, f64>) -> GhostStepBelief {
    let head = most_likely_ghost(dist);
    let mut cells: BTreeMap<Cell, f64> = BTreeMap::new();
    for (g, &p) in dist {
        *cells.entry(g.cell).or_insert(0.0) += p;
    }
    GhostStepBelief {
        mode: head.mode,
        home: head.home,
        cells: cells.into_iter().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_bounds() {
        assert!(SearchParams::new(4, 5).is_ok());
        assert_eq!(SearchParams::new(3, 5), Err(ParamError::Depth(3)));
        assert_eq!(SearchParams::new(9, 7), Err(ParamError::Lambda(7)));
        assert_eq!(SearchParams::default(), SearchParams { depth: 4, lambda: 5 });
        assert_eq!(SearchParams::default().t_max(), 4);
    }
}
