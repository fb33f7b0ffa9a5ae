//! Independent reference implementations used to check the search code.

use std::collections::{BTreeMap, BTreeSet};

use pacmodel::engine::{Engine, Event, GameState, Ghost, GhostMode, TickRecord};
use pacmodel::lookahead::SearchParams;
use pacmodel::maze::{Cell, Heading, Maze};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn stops(state: &GameState, rec: &TickRecord) -> bool {
    state.game_over || rec.died() || rec.has(Event::LevelCleared)
}

fn moves(engine: &Engine, state: &GameState, run: u32, lambda: Option<u32>) -> Vec<Heading> {
    engine
        .pacman_moves(state.pacman.cell)
        .into_iter()
        .filter(|&h| !(lambda.is_some_and(|l| run > l) && h == state.pacman.heading.reverse()))
        .collect()
}

fn run_after(state: &GameState, run: u32, h: Heading) -> u32 {
    if h == state.pacman.heading {
        run + 1
    } else {
        1
    }
}

#[derive(Debug, Clone)]
pub struct OracleNode {
    pub path: Vec<Heading>,
    pub state: GameState,
    pub probability: f64,
}

impl OracleNode {
    pub fn key(&self) -> String {
        format!("{:?}|{:?}|{:?}|{}|{}", self.path, self.state.pacman, self.state.ghosts, self.state.score, self.state.lives)
    }
}

fn combos(alts: &[Vec<Ghost>], prefix: &mut Vec<Ghost>, out: &mut Vec<[Ghost; 4]>) {
    if prefix.len() == alts.len() {
        out.push([prefix[0], prefix[1], prefix[2], prefix[3]]);
        return;
    }
    for &g in &alts[prefix.len()] {
        prefix.push(g);
        combos(alts, prefix, out);
        prefix.pop();
    }
}

/// Recursive full expansion: every Pac-Man move times every combination of
/// ghost alternatives, probability = product of 1/|alternatives|.
pub fn naive_tree(engine: &Engine, root: &GameState, params: SearchParams) -> Vec<OracleNode> {
    fn rec(
        engine: &Engine,
        state: &GameState,
        run: u32,
        params: SearchParams,
        path: &mut Vec<Heading>,
        prob: f64,
        out: &mut Vec<OracleNode>,
    ) {
        if path.len() as u32 == params.depth {
            return;
        }
        for h in moves(engine, state, run, Some(params.lambda)) {
            let half = engine.begin_tick(state, h).unwrap();
            let alts: Vec<Vec<Ghost>> = (0..4).map(|g| engine.ghost_alternatives(half.state(), g)).collect();
            let p: f64 = alts.iter().map(|a| 1.0 / a.len() as f64).product();
            let mut all = Vec::new();
            combos(&alts, &mut Vec::new(), &mut all);
            path.push(h);
            for ghosts in all {
                let (s, r) = engine.finish_tick(half.clone(), ghosts);
                out.push(OracleNode { path: path.clone(), state: s.clone(), probability: prob * p });
                if !stops(&s, &r) {
                    rec(engine, &s, run_after(state, run, h), params, path, prob * p, out);
                }
            }
            path.pop();
        }
    }
    let mut out = Vec::new();
    rec(engine, root, root.pacman.run, params, &mut Vec::new(), 1.0, &mut out);
    out
}

/// Every Pac-Man walk up to `depth` without any pruning.
pub fn unpruned_walks(engine: &Engine, root: &GameState, depth: u32) -> Vec<(Vec<Heading>, Vec<GameState>)> {
    fn rec(
        engine: &Engine,
        state: &GameState,
        depth: u32,
        path: &mut Vec<Heading>,
        states: &mut Vec<GameState>,
        out: &mut Vec<(Vec<Heading>, Vec<GameState>)>,
    ) {
        for h in moves(engine, state, 0, None) {
            let (s, r) = engine.step(state, h).unwrap();
            path.push(h);
            states.push(s.clone());
            if stops(&s, &r) || path.len() as u32 == depth {
                out.push((path.clone(), states.clone()));
            } else {
                rec(engine, &s, depth, path, states, out);
            }
            path.pop();
            states.pop();
        }
    }
    let mut out = Vec::new();
    rec(engine, root, depth, &mut Vec::new(), &mut Vec::new(), &mut out);
    out
}

/// Ghost move rule written out from the maze alone: no reversal unless the
/// ghost is in a dead end.
fn roaming_options(maze: &Maze, cell: Cell, heading: Heading) -> Vec<(Cell, Heading)> {
    let fwd: Vec<(Cell, Heading)> = Heading::ALL
        .into_iter()
        .filter(|&h| h != heading.reverse())
        .filter_map(|h| maze.pac_neighbor(cell, h).map(|n| (n, h)))
        .collect();
    if fwd.is_empty() {
        maze.pac_neighbor(cell, heading.reverse()).map(|n| vec![(n, heading.reverse())]).unwrap_or_default()
    } else {
        fwd
    }
}

/// Monte-Carlo distribution of a frightened roaming ghost's cell after
/// `depth` ticks, assuming the hunt outlasts the horizon.
pub fn frightened_rollouts(maze: &Maze, ghost: &Ghost, tick: u64, depth: usize, n: usize, seed: u64) -> BTreeMap<Cell, f64> {
    assert!(ghost.mode == GhostMode::Frightened && !ghost.home);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<Cell, usize> = BTreeMap::new();
    for _ in 0..n {
        let (mut cell, mut heading) = (ghost.cell, ghost.heading);
        for t in 0..depth {
            if (tick + t as u64) % 2 == 1 {
                continue;
            }
            let opts = roaming_options(maze, cell, heading);
            (cell, heading) = opts[rng.gen_range(0..opts.len())];
        }
        *counts.entry(cell).or_insert(0) += 1;
    }
    counts.into_iter().map(|(c, k)| (c, k as f64 / n as f64)).collect()
}

/// Cells a roaming ghost can occupy after exactly `t` of its own moves,
/// allowing any legal non-reversing choice (and pauses when frightened on
/// odd ticks).
pub fn reachable_roaming(maze: &Maze, ghost: &Ghost, tick: u64, t: usize) -> BTreeSet<Cell> {
    let mut frontier: BTreeSet<(Cell, Heading)> = [(ghost.cell, ghost.heading)].into();
    for k in 0..t {
        let pause = ghost.mode == GhostMode::Frightened && (tick + k as u64) % 2 == 1;
        frontier = frontier
            .into_iter()
            .flat_map(|(c, h)| if pause { vec![(c, h)] } else { roaming_options(maze, c, h) })
            .collect();
    }
    frontier.into_iter().map(|(c, _)| c).collect()
}

pub fn total_variation(a: &BTreeMap<Cell, f64>, b: &BTreeMap<Cell, f64>) -> f64 {
    let keys: BTreeSet<&Cell> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

/// Full-tree nodes keyed by Pac-Man path and resulting state, sorted, for
/// comparison with [`naive_tree`].
pub fn keyed_tree(tree: &pacmodel::lookahead::FullTree) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = tree.nodes[1..]
        .iter()
        .map(|n| {
            let mut path = Vec::new();
            let mut cur = Some(n);
            while let Some(x) = cur {
                path.extend(x.heading);
                cur = x.parent.map(|p| &tree.nodes[p]);
            }
            path.reverse();
            let node = OracleNode { path, state: n.state.clone(), probability: n.probability };
            (node.key(), n.probability)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    out
}

pub fn keyed_oracle(nodes: Vec<OracleNode>) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = nodes.into_iter().map(|n| (n.key(), n.probability)).collect();
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    out
}

/// Breadth-first Pac-Man distances from `from` to every cell.
pub fn bfs(maze: &Maze, from: Cell) -> BTreeMap<Cell, u32> {
    let mut dist = BTreeMap::from([(from, 0u32)]);
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(cell) = queue.pop_front() {
        let d = dist[&cell];
        for h in Heading::ALL {
            if let Some(n) = maze.pac_neighbor(cell, h) {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(n) {
                    e.insert(d + 1);
                    queue.push_back(n);
                }
            }
        }
    }
    dist
}

/// State utility of the simple-feature model, recomputed from scratch with
/// breadth-first distances.
pub struct SimpleOracle<'a> {
    maze: &'a Maze,
    dist: BTreeMap<Cell, BTreeMap<Cell, u32>>,
    diameter: f64,
}

impl<'a> SimpleOracle<'a> {
    pub fn new(maze: &'a Maze) -> Self {
        let dist: BTreeMap<Cell, BTreeMap<Cell, u32>> = maze.navigable_cells().map(|c| (c, bfs(maze, c))).collect();
        let diameter = dist.values().flat_map(|m| m.values()).copied().max().unwrap_or(0) as f64;
        Self { maze, dist, diameter }
    }

    fn prox(&self, a: Cell, b: Cell) -> f64 {
        self.dist.get(&a).and_then(|m| m.get(&b)).map_or(0.0, |&d| 1.0 / (1.0 + d as f64))
    }

    pub fn utility(&self, s: &GameState, w: &pacmodel::model_simple::SimpleWeights, dispersion: f64) -> f64 {
        let maze = self.maze;
        let pac = s.pacman.cell;
        let threats: Vec<Cell> = s.ghosts.iter().filter(|g| !g.home && g.mode == GhostMode::Chase).map(|g| g.cell).collect();
        let mut threat = 0.0;
        if !threats.is_empty() {
            threat = threats.iter().map(|&g| self.prox(pac, g)).sum::<f64>() / threats.len() as f64;
            let mut d = Vec::new();
            for i in 0..threats.len() {
                for j in i + 1..threats.len() {
                    if let Some(&x) = self.dist.get(&threats[i]).and_then(|m| m.get(&threats[j])) {
                        d.push(x as f64);
                    }
                }
            }
            if !d.is_empty() {
                let m = d.iter().sum::<f64>() / d.len() as f64;
                let var = d.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / d.len() as f64;
                threat += dispersion * var / (self.diameter * self.diameter);
            }
        }
        let items: BTreeSet<Cell> = s.pills.cells(maze).chain(s.power_pills.cells(maze)).collect();
        let reward: f64 = items
            .iter()
            .map(|&i| {
                let adj = Heading::ALL
                    .into_iter()
                    .filter_map(|h| maze.pac_neighbor(i, h))
                    .filter(|n| items.contains(n))
                    .count();
                (1 + adj) as f64 * self.prox(pac, i)
            })
            .sum();
        let hunt = if s.hunt_timer > 0 {
            s.ghosts
                .iter()
                .filter(|g| !g.home && g.mode == GhostMode::Frightened)
                .map(|g| self.prox(pac, g.cell))
                .sum()
        } else {
            let best = |cells: &mut dyn Iterator<Item = Cell>| cells.map(|c| self.prox(pac, c)).fold(None, |a: Option<f64>, x| Some(a.map_or(x, |a| a.max(x))));
            match (best(&mut s.power_pills.cells(maze)), best(&mut threats.iter().copied())) {
                (Some(p), Some(g)) => p * g,
                _ => 0.0,
            }
        };
        w.threat_w * threat + w.reward_w * reward + w.lives_w * s.lives as f64 + w.hunt_w * hunt
    }
}
