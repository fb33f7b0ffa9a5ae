//! The Behavlet catalog: twenty composite play features, each with a
//! state-check predicate and an evaluator over a predicted path.
//!
//! Evaluators read Pac-Man's own path from the plan and ghost positions from
//! the projected beliefs. Whether a ghost counts as a threat or as prey at
//! step `t` is taken from the plan's state just before that step.

use std::cell::OnceCell;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Engine, Event, GameState};
use crate::history::{near_power_pill, HistorySummary, LURE_RADIUS};
use crate::lookahead::{GhostBeliefs, Plan};
use crate::maze::{Cell, UNREACHABLE};

/// Radius used by the hunt and threat state checks.
pub const CHECK_RADIUS: u32 = 10;
/// Ticks after a hunt ends that still count as "after the hunt".
pub const AFTER_HUNT_WINDOW: u32 = 5;
/// Expected distance at which a ghost counts as close.
pub const CLOSE: f64 = 2.0;
const LURE_MIN_TICKS: u32 = 3;
const LURE_PAYOFF_STEPS: usize = 10;
const HOUSE_EXIT_RADIUS: u32 = 3;
const POWER_PILL_LURE_CHECK: u32 = 3;
const LIFE_MARGIN: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    Aggression,
    Caution,
    Decisiveness,
    Planning,
    Skill,
    Other,
}

/// What a state check sees: the actual current state and past.
#[derive(Clone, Copy)]
pub struct CheckContext<'a> {
    pub engine: &'a Engine,
    pub state: &'a GameState,
    pub history: &'a HistorySummary,
}

pub type Evaluator = fn(&PlanContext) -> f64;

pub struct BehavletSpec {
    pub id: &'static str,
    pub name: &'static str,
    pub category: Category,
    pub default_weight: f64,
    pub default_usage: bool,
    pub state_check: fn(&CheckContext) -> bool,
    pub evaluator: Evaluator,
}

impl std::fmt::Debug for BehavletSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BehavletSpec")
            .field("id", &self.id)
            .field("name", &self.name)
            .field("category", &self.category)
            .field("default_weight", &self.default_weight)
            .field("default_usage", &self.default_usage)
            .finish()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatalogError {
    #[error("unknown behavlet id {0:?}")]
    UnknownId(String),
    #[error("Points_Max cannot be excluded from the usage filter")]
    PointsMaxRequired,
}

macro_rules! spec {
    ($id:literal, $name:literal, $cat:ident, $w:expr, $usage:expr, $check:expr, $eval:expr) => {
        BehavletSpec {
            id: $id,
            name: $name,
            category: Category::$cat,
            default_weight: $w,
            default_usage: $usage,
            state_check: $check,
            evaluator: $eval,
        }
    };
}

static CATALOG: [BehavletSpec; 20] = [
    spec!("Points_Max", "Points_Max", Other, 1.0, true, always, points_max),
    spec!("A1", "A1_Hunt Close To Ghost House", Aggression, 1.0, true, hunt_related, a1),
    spec!("A4", "A4_Hunt Even After Power Pill Finishes", Aggression, 1.0, true, hunt_related, a4),
    spec!("A6", "A6_Chase Ghosts or Collect Dots", Aggression, 1.0, true, hunt_related, a6),
    spec!("C1.b", "C1.b_Times Trapped and Killed", Caution, -1.0, false, threat_near, c1b),
    spec!("C2.a", "C2.a_Average Distance to Ghosts", Caution, 1.0, true, outside_hunt, c2a),
    spec!("C2.b", "C2.b_Average Distance During Hunt", Caution, -1.0, true, hunt_related, c2b),
    spec!("C3", "C3_Close Calls", Caution, 0.5, true, threat_near, c3),
    spec!("C4", "C4_Caught After Hunt", Caution, -1.0, true, hunt_related, c4),
    spec!("C5", "C5_Moves With No Points Scored", Caution, -1.0, true, always, c5),
    spec!("C7", "C7_Killed at Ghost House", Caution, -1.0, true, threat_near, c7),
    spec!("Cherry", "Cherry Onscreen Time", Other, 1.0, false, fruit_present, cherry),
    spec!("D2", "D2_Player Vacillating", Decisiveness, -1.0, true, always, d2),
    spec!("P1", "P1_Wait Near Power Pill to Lure Ghosts", Planning, 1.0, false, lure_possible, p1),
    spec!("P1.c", "P1.c_Lure: # Ghosts Eaten After Lure", Planning, 1.0, false, lure_possible, p1c),
    spec!("P1.d", "P1.d_Lure: Caught Before Eating Pill", Planning, -1.0, false, lure_possible, p1d),
    spec!("P4", "P4_SpeedOfHunt", Planning, 1.0, true, hunt_related, p4),
    spec!("S2a", "S2a_Lives Gained", Skill, 1.0, false, life_in_reach, s2a),
    spec!("S2b", "S2b_Lives Lost", Skill, -1.0, false, threat_near, s2b),
    spec!("S4", "S4_Teleport Use", Skill, 1.0, false, teleport_near, s4),
];

/// The twenty catalog entries in table order.
pub fn catalog() -> &'static [BehavletSpec] {
    &CATALOG
}

pub fn index_of(id: &str) -> Result<usize, CatalogError> {
    CATALOG
        .iter()
        .position(|s| s.id == id)
        .ok_or_else(|| CatalogError::UnknownId(id.to_string()))
}

pub fn spec(id: &str) -> Result<&'static BehavletSpec, CatalogError> {
    index_of(id).map(|i| &CATALOG[i])
}

pub fn all_ids() -> BTreeSet<String> {
    CATALOG.iter().map(|s| s.id.to_string()).collect()
}

pub fn default_usage() -> BTreeSet<String> {
    CATALOG
        .iter()
        .filter(|s| s.default_usage)
        .map(|s| s.id.to_string())
        .collect()
}

/// Members of `usage` whose state check passes on the current state, in
/// catalog order. Points_Max is always included.
pub fn applicable_behavlets(ctx: &CheckContext, usage: &BTreeSet<String>) -> Vec<&'static str> {
    CATALOG
        .iter()
        .filter(|s| s.id == "Points_Max" || (usage.contains(s.id) && (s.state_check)(ctx)))
        .map(|s| s.id)
        .collect()
}

pub fn evaluate_behavlet(id: &str, ctx: &PlanContext) -> Result<f64, CatalogError> {
    spec(id).map(|s| (s.evaluator)(ctx))
}

// ---------------------------------------------------------------------------
// State checks

fn always(_: &CheckContext) -> bool {
    true
}

fn nearest_power_pill(ctx: &CheckContext) -> u32 {
    let maze = ctx.engine.maze();
    ctx.state
        .power_pills
        .cells(maze)
        .map(|p| maze.distance_raw(ctx.state.pacman.cell, p) as u32)
        .min()
        .unwrap_or(u32::MAX)
}

fn nearest_threat(ctx: &CheckContext) -> u32 {
    let maze = ctx.engine.maze();
    ctx.state
        .ghosts
        .iter()
        .filter(|g| g.is_threat())
        .map(|g| maze.ghost_distance_raw(ctx.state.pacman.cell, g.cell) as u32)
        .min()
        .unwrap_or(u32::MAX)
}

fn hunt_related(ctx: &CheckContext) -> bool {
    ctx.state.is_hunt()
        || nearest_power_pill(ctx) <= CHECK_RADIUS
        || ctx.history.hunt_ended_within(AFTER_HUNT_WINDOW)
}

fn outside_hunt(ctx: &CheckContext) -> bool {
    !ctx.state.is_hunt()
}

fn threat_near(ctx: &CheckContext) -> bool {
    nearest_threat(ctx) <= CHECK_RADIUS
}

fn fruit_present(ctx: &CheckContext) -> bool {
    ctx.state.fruit.present
}

fn lure_possible(ctx: &CheckContext) -> bool {
    nearest_power_pill(ctx) <= POWER_PILL_LURE_CHECK && threat_near(ctx)
}

fn life_in_reach(ctx: &CheckContext) -> bool {
    let every = ctx.engine.rules().extra_life_every;
    every > 0 && every - ctx.state.score % every <= LIFE_MARGIN
}

fn teleport_near(ctx: &CheckContext) -> bool {
    let maze = ctx.engine.maze();
    maze.teleport_pairs().iter().any(|&(a, b)| {
        [a, b]
            .iter()
            .any(|&t| maze.distance_raw(ctx.state.pacman.cell, t) as u32 <= CHECK_RADIUS)
    })
}

// ---------------------------------------------------------------------------
// Plan context

/// Everything an evaluator may read, with per-plan statistics computed on
/// first use.
pub struct PlanContext<'a> {
    pub engine: &'a Engine,
    pub root: &'a GameState,
    pub plan: &'a Plan,
    pub beliefs: &'a GhostBeliefs,
    pub history: &'a HistorySummary,
    threat: OnceCell<Vec<Option<f64>>>,
    prey: OnceCell<Vec<Option<f64>>>,
    eat: OnceCell<Vec<f64>>,
    pill: OnceCell<Vec<Option<u32>>>,
    since_hunt: OnceCell<Vec<Option<u32>>>,
}

/// Outcome of scanning a plan for a power-pill lure.
struct Lure {
    fired: bool,
    consumed_at: Option<usize>,
    died_before_pill: bool,
}

impl<'a> PlanContext<'a> {
    pub fn new(
        engine: &'a Engine,
        root: &'a GameState,
        plan: &'a Plan,
        beliefs: &'a GhostBeliefs,
        history: &'a HistorySummary,
    ) -> Self {
        Self {
            engine,
            root,
            plan,
            beliefs,
            history,
            threat: OnceCell::new(),
            prey: OnceCell::new(),
            eat: OnceCell::new(),
            pill: OnceCell::new(),
            since_hunt: OnceCell::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.plan.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plan.is_empty()
    }

    /// State before step `t` (1-based); step 1 starts from the root.
    pub fn pre(&self, t: usize) -> &GameState {
        if t == 1 {
            self.root
        } else {
            &self.plan.steps[t - 2].state
        }
    }

    /// State after step `t`.
    pub fn post(&self, t: usize) -> &GameState {
        &self.plan.steps[t - 1].state
    }

    /// Cell Pac-Man moved into at step `t` (before any respawn), or the root
    /// cell for `t == 0`.
    pub fn cell(&self, t: usize) -> Cell {
        if t == 0 {
            self.root.pacman.cell
        } else {
            self.plan.steps[t - 1].record.pacman.0
        }
    }

    fn diameter(&self) -> f64 {
        self.engine.maze().diameter() as f64
    }

    fn root_distance(&self, g: usize) -> f64 {
        let d = self
            .engine
            .maze()
            .ghost_distance_raw(self.root.pacman.cell, self.root.ghosts[g].cell);
        if d == UNREACHABLE {
            self.diameter()
        } else {
            d as f64
        }
    }

    /// Expected distance to ghost `g` at step `t`; step 0 uses the root.
    pub fn ghost_distance(&self, g: usize, t: usize) -> f64 {
        if t == 0 {
            self.root_distance(g)
        } else {
            self.beliefs.expected_distance(self.engine, g, t, self.cell(t))
        }
    }

    fn ghosts_where(&self, t: usize, keep: fn(&crate::engine::Ghost) -> bool) -> impl Iterator<Item = usize> + '_ {
        let state = if t == 0 { self.root } else { self.pre(t) };
        (0..4).filter(move |&g| keep(&state.ghosts[g]))
    }

    fn nearest_by(&self, keep: fn(&crate::engine::Ghost) -> bool) -> Vec<Option<f64>> {
        (0..=self.len())
            .map(|t| {
                self.ghosts_where(t, keep)
                    .map(|g| self.ghost_distance(g, t))
                    .min_by(f64::total_cmp)
            })
            .collect()
    }

    /// Expected distance to the nearest threat, indexed by step (0 = root).
    pub fn nearest_threat(&self) -> &[Option<f64>] {
        self.threat.get_or_init(|| self.nearest_by(|g| g.is_threat()))
    }

    /// Expected distance to the nearest frightened ghost, by step.
    pub fn nearest_prey(&self) -> &[Option<f64>] {
        self.prey.get_or_init(|| self.nearest_by(|g| g.is_prey()))
    }

    /// Expected number of ghosts eaten at each step (index `t - 1`).
    pub fn expected_eaten(&self) -> &[f64] {
        self.eat.get_or_init(|| {
            (1..=self.len())
                .map(|t| {
                    let cell = self.cell(t);
                    self.ghosts_where(t, |g| g.is_prey())
                        .map(|g| self.beliefs.at(g, t).probability(cell))
                        .sum()
                })
                .collect()
        })
    }

    /// Distance to the nearest remaining pill or power pill, by step.
    pub fn nearest_pill(&self) -> &[Option<u32>] {
        self.pill.get_or_init(|| {
            let maze = self.engine.maze();
            (0..=self.len())
                .map(|t| {
                    let (state, cell) = if t == 0 { (self.root, self.root.pacman.cell) } else { (self.post(t), self.cell(t)) };
                    state
                        .pills
                        .cells(maze)
                        .chain(state.power_pills.cells(maze))
                        .map(|p| maze.distance_raw(cell, p) as u32)
                        .min()
                })
                .collect()
        })
    }

    /// Ticks since the most recent hunt ended, as of each step (0 = root).
    /// A hunt cut short by Pac-Man's death does not count as ending.
    pub fn since_hunt_end(&self) -> &[Option<u32>] {
        self.since_hunt.get_or_init(|| {
            let mut out = Vec::with_capacity(self.len() + 1);
            let mut cur = if self.root.is_hunt() { None } else { self.history.ticks_since_hunt_end };
            out.push(cur);
            for t in 1..=self.len() {
                let rec = &self.plan.steps[t - 1].record;
                cur = if self.pre(t).is_hunt() && !self.post(t).is_hunt() && !rec.died() {
                    Some(0)
                } else if self.post(t).is_hunt() {
                    None
                } else {
                    cur.map(|x| x + 1)
                };
                out.push(cur);
            }
            out
        })
    }

    fn hunt_steps(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.len()).filter(|&t| self.pre(t).is_hunt())
    }

    fn death_step(&self) -> Option<usize> {
        (1..=self.len()).find(|&t| self.plan.steps[t - 1].record.died())
    }

    fn lure(&self) -> Lure {
        let mut run = self.history.lure_ticks;
        let threat = self.nearest_threat();
        let mut out = Lure { fired: false, consumed_at: None, died_before_pill: false };
        for t in 1..=self.len() {
            let rec = &self.plan.steps[t - 1].record;
            if rec.has(Event::PowerPillEaten) {
                if out.fired {
                    out.consumed_at = Some(t);
                }
                break;
            }
            if rec.died() {
                out.died_before_pill = out.fired;
                break;
            }
            if near_power_pill(self.engine, self.post(t), self.cell(t), LURE_RADIUS) {
                run += 1;
                let approaching = matches!((threat[t - 1], threat[t]), (Some(a), Some(b)) if b < a);
                if run >= LURE_MIN_TICKS && approaching {
                    out.fired = true;
                }
            } else {
                run = 0;
            }
        }
        out
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn decreased<T: PartialOrd + Copy>(series: &[Option<T>], t: usize) -> bool {
    matches!((series[t - 1], series[t]), (Some(a), Some(b)) if b < a)
}

// ---------------------------------------------------------------------------
// Evaluators

fn points_max(c: &PlanContext) -> f64 {
    let rules = c.engine.rules();
    let eaten = c.expected_eaten();
    (1..=c.len())
        .map(|t| {
            let rec = &c.plan.steps[t - 1].record;
            rec.item_points() as f64 + eaten[t - 1] * rules.ghost_value(c.pre(t).hunt_chain) as f64
        })
        .sum()
}

fn a1(c: &PlanContext) -> f64 {
    let maze = c.engine.maze();
    let Some(exit) = maze.house_exit() else { return 0.0 };
    let d = mean(c.hunt_steps().map(|t| maze.distance_raw(c.cell(t), exit) as f64));
    -d.unwrap_or(0.0)
}

fn a4(c: &PlanContext) -> f64 {
    let since = c.since_hunt_end();
    let threat = c.nearest_threat();
    (1..=c.len())
        .filter(|&t| since[t].is_some_and(|x| x <= AFTER_HUNT_WINDOW) && decreased(threat, t))
        .count() as f64
}

fn a6(c: &PlanContext) -> f64 {
    let prey = c.nearest_prey();
    let pill = c.nearest_pill();
    c.hunt_steps()
        .map(|t| decreased(prey, t) as i32 as f64 - decreased(pill, t) as i32 as f64)
        .sum()
}

fn c1b(c: &PlanContext) -> f64 {
    let Some(t) = c.death_step() else { return 0.0 };
    let close = c
        .ghosts_where(t, |g| g.is_threat())
        .filter(|&g| c.ghost_distance(g, t) <= CLOSE)
        .count();
    (close >= 2) as i32 as f64
}

fn c2a(c: &PlanContext) -> f64 {
    let per_step = (1..=c.len())
        .filter(|&t| !c.pre(t).is_hunt())
        .filter_map(|t| mean(c.ghosts_where(t, |g| g.is_threat()).map(|g| c.ghost_distance(g, t))));
    mean(per_step).unwrap_or(0.0)
}

fn c2b(c: &PlanContext) -> f64 {
    let per_step = c
        .hunt_steps()
        .filter_map(|t| mean(c.ghosts_where(t, |g| g.is_prey()).map(|g| c.ghost_distance(g, t))));
    mean(per_step).unwrap_or(0.0)
}

fn c3(c: &PlanContext) -> f64 {
    if c.death_step().is_some() {
        return 0.0;
    }
    let threat = c.nearest_threat();
    (1..=c.len()).filter(|&t| threat[t].is_some_and(|d| d <= CLOSE)).count() as f64
}

fn c4(c: &PlanContext) -> f64 {
    let Some(t) = c.death_step() else { return 0.0 };
    let since = c.since_hunt_end();
    since[t - 1].is_some_and(|x| x < AFTER_HUNT_WINDOW) as i32 as f64
}

fn c5(c: &PlanContext) -> f64 {
    let scoring = c.plan.steps.iter().filter(|s| s.record.score_delta > 0).count();
    c.beliefs.depth().max(c.len()) as f64 - scoring as f64
}

fn c7(c: &PlanContext) -> f64 {
    let maze = c.engine.maze();
    match (c.death_step(), maze.house_exit()) {
        (Some(t), Some(exit)) => (maze.distance_raw(c.cell(t), exit) as u32 <= HOUSE_EXIT_RADIUS) as i32 as f64,
        _ => 0.0,
    }
}

fn cherry(c: &PlanContext) -> f64 {
    (1..=c.len()).filter(|&t| c.post(t).fruit.present).count() as f64
}

fn d2(c: &PlanContext) -> f64 {
    c.plan
        .headings
        .windows(2)
        .filter(|w| w[1] == w[0].reverse())
        .count() as f64
}

fn p1(c: &PlanContext) -> f64 {
    c.lure().fired as i32 as f64
}

fn p1c(c: &PlanContext) -> f64 {
    let Some(k) = c.lure().consumed_at else { return 0.0 };
    let eaten = c.expected_eaten();
    eaten.iter().skip(k).take(LURE_PAYOFF_STEPS).sum()
}

fn p1d(c: &PlanContext) -> f64 {
    c.lure().died_before_pill as i32 as f64
}

fn p4(c: &PlanContext) -> f64 {
    let eaten = c.expected_eaten();
    mean(c.hunt_steps().map(|t| eaten[t - 1])).unwrap_or(0.0)
}

fn count_events(c: &PlanContext, event: Event) -> f64 {
    c.plan
        .steps
        .iter()
        .map(|s| s.record.events.iter().filter(|&&e| e == event).count())
        .sum::<usize>() as f64
}

fn s2a(c: &PlanContext) -> f64 {
    count_events(c, Event::LifeGained)
}

fn s2b(c: &PlanContext) -> f64 {
    count_events(c, Event::PacManDied)
}

fn s4(c: &PlanContext) -> f64 {
    count_events(c, Event::TeleportUsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_shape() {
        assert_eq!(catalog().len(), 20);
        let ids: BTreeSet<&str> = catalog().iter().map(|s| s.id).collect();
        assert_eq!(ids.len(), 20);
        let unused: BTreeSet<&str> = catalog().iter().filter(|s| !s.default_usage).map(|s| s.id).collect();
        let expected: BTreeSet<&str> = ["C1.b", "Cherry", "P1", "P1.c", "P1.d", "S2a", "S2b", "S4"].into();
        assert_eq!(unused, expected);
        assert_eq!(catalog()[0].id, "Points_Max");
    }

    #[test]
    fn unknown_id() {
        assert_eq!(index_of("Z9"), Err(CatalogError::UnknownId("Z9".into())));
    }
}
