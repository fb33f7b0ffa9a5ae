mod common;

use std::collections::BTreeMap;

use common::oracle::{keyed_oracle, keyed_tree, naive_tree, reachable_roaming, unpruned_walks};
use common::{c, default_engine, engine_for, midgame_states, place_ghost, CORRIDOR, LOOP, SMALL};
use pacmodel::engine::{Engine, GameState, GhostMode};
use pacmodel::lookahead::{
    enumerate_plans, expand_full_tree, project_ghost_beliefs, visit_full_tree, SearchParams, TreeError,
};
use pacmodel::maze::{Cell, Heading};

fn junction(engine: &Engine, degree: usize) -> Cell {
    let maze = engine.maze();
    maze.navigable_cells()
        .find(|&c| maze.pac_degree(c) == degree && !maze.is_house(c))
        .expect("maze has such a junction")
}

#[test]
fn long_straight_run_yields_a_single_plan() {
    let engine = engine_for(LOOP);
    let mut s = engine.initial_state(1, 1);
    s.pacman.cell = c(1, 6);
    s.pacman.heading = Heading::Right;
    s.pacman.run = 10;
    let plans = enumerate_plans(&engine, &s, SearchParams::custom(4, 5), s.pacman.run);
    assert_eq!(plans.len(), 1);
    assert_eq!(plans[0].headings, vec![Heading::Right; 4]);
}

#[test]
fn short_run_allows_reversal_in_a_corridor() {
    let engine = engine_for(LOOP);
    let mut s = engine.initial_state(1, 1);
    s.pacman.cell = c(1, 6);
    s.pacman.heading = Heading::Right;
    s.pacman.run = 0;
    let plans = enumerate_plans(&engine, &s, SearchParams::custom(3, 3), 0);
    assert_eq!(plans.len(), unpruned_walks(&engine, &s, 3).len());
    assert!(plans.iter().any(|p| p.headings[..2] == [Heading::Right, Heading::Left]));
}

#[test]
fn junction_plan_count_matches_brute_force() {
    let engine = default_engine();
    let mut s = engine.initial_state(4, 1);
    s.pacman.cell = junction(&engine, 4);
    s.pacman.run = 0;
    for depth in 1..=4 {
        let plans = enumerate_plans(&engine, &s, SearchParams::custom(depth, depth + 1), 0);
        let walks = unpruned_walks(&engine, &s, depth);
        assert_eq!(plans.len(), walks.len(), "depth {depth}");
        if depth == 1 {
            assert_eq!(plans.len(), 4);
        }
    }
}

#[test]
fn plans_replay_under_step() {
    let engine = default_engine();
    for s in midgame_states(&engine, 10, 50) {
        for plan in enumerate_plans(&engine, &s, SearchParams::custom(5, 3), s.pacman.run) {
            let mut cur = s.clone();
            for (h, step) in plan.headings.iter().zip(&plan.steps) {
                let (next, rec) = engine.step(&cur, *h).unwrap();
                assert_eq!(next, step.state);
                assert_eq!(rec, step.record);
                cur = next;
            }
            assert!(plan.truncated || plan.len() == 5);
        }
    }
}

#[test]
fn pruning_is_monotone_in_lambda() {
    let engine = default_engine();
    for s in midgame_states(&engine, 12, 80) {
        let counts: Vec<usize> = (3..=6)
            .map(|l| enumerate_plans(&engine, &s, SearchParams::custom(5, l), s.pacman.run).len())
            .collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    }
}

#[test]
fn large_lambda_equals_unpruned_search() {
    let engine = default_engine();
    for s in midgame_states(&engine, 8, 120) {
        let depth = 4;
        let lambda = depth + s.pacman.run;
        let plans = enumerate_plans(&engine, &s, SearchParams::custom(depth, lambda), s.pacman.run);
        let walks = unpruned_walks(&engine, &s, depth);
        assert_eq!(plans.len(), walks.len());
        for (p, (headings, states)) in plans.iter().zip(&walks) {
            assert_eq!(&p.headings, headings);
            assert!(p.steps.iter().map(|st| &st.state).eq(states.iter()));
        }
    }
}

#[test]
fn dead_end_corridor_plans() {
    let engine = engine_for(CORRIDOR);
    let s = engine.initial_state(1, 1);
    let plans = enumerate_plans(&engine, &s, SearchParams::custom(2, 5), 0);
    // From the corridor end the only move is Right.
    assert!(plans.iter().all(|p| p.first_heading() == Heading::Right));
}

#[test]
fn deterministic_ghosts_give_probability_one_children() {
    let engine = engine_for(LOOP);
    let mut s = engine.initial_state(1, 1);
    s.pacman.cell = c(1, 2);
    s.pacman.heading = Heading::Left;
    s.pacman.run = 0;
    let tree = expand_full_tree(&engine, &s, SearchParams::custom(1, 5), 1000).unwrap();
    let children: Vec<_> = tree.children(0).collect();
    assert_eq!(children.len(), 2);
    for i in children {
        assert_eq!(tree.nodes[i].probability, 1.0);
    }
}

#[test]
fn frightened_ghost_at_junction_splits_three_ways() {
    let engine = default_engine();
    let mut s = engine.initial_state(2, 1);
    let j = junction(&engine, 4);
    place_ghost(&mut s, 0, j, Heading::Up, GhostMode::Frightened);
    s.hunt_timer = 20;
    s.tick = 0;
    let moves = engine.pacman_moves(s.pacman.cell).len();
    let tree = expand_full_tree(&engine, &s, SearchParams::custom(1, 5), 1000).unwrap();
    assert_eq!(tree.nodes.len(), 1 + 3 * moves);
    for i in tree.children(0) {
        assert!((tree.nodes[i].probability - 1.0 / 3.0).abs() < 1e-15);
    }
}

#[test]
fn child_probabilities_sum_to_one_per_heading() {
    let engine = default_engine();
    for s in midgame_states(&engine, 6, 200) {
        let tree = expand_full_tree(&engine, &s, SearchParams::custom(3, 3), 1_000_000).unwrap();
        for (i, node) in tree.nodes.iter().enumerate() {
            let mut per_heading: BTreeMap<Heading, f64> = BTreeMap::new();
            for k in tree.children(i) {
                let child = &tree.nodes[k];
                *per_heading.entry(child.heading.unwrap()).or_default() += child.probability / node.probability;
            }
            for (h, total) in per_heading {
                assert!((total - 1.0).abs() < 1e-9, "node {i} heading {h:?}: {total}");
            }
        }
    }
}

fn tree_matches_oracle(engine: &Engine, s: &GameState, params: SearchParams) {
    let tree = expand_full_tree(engine, s, params, 2_000_000).unwrap();
    assert_eq!(keyed_tree(&tree), keyed_oracle(naive_tree(engine, s, params)));
}

#[test]
fn full_tree_matches_naive_expansion() {
    let engine = engine_for(SMALL);
    for s in midgame_states(&engine, 6, 10) {
        tree_matches_oracle(&engine, &s, SearchParams::custom(3, 3));
    }
}

#[test]
fn visitor_and_materialized_tree_agree() {
    let engine = default_engine();
    for s in midgame_states(&engine, 4, 300) {
        let params = SearchParams::custom(3, 4);
        let tree = expand_full_tree(&engine, &s, params, 1_000_000).unwrap();
        let mut mass: BTreeMap<(Heading, u32), f64> = BTreeMap::new();
        let count = visit_full_tree(&engine, &s, params, 1_000_000, |h, d, p, _| {
            *mass.entry((h, d)).or_default() += p;
        })
        .unwrap();
        assert_eq!(count, tree.nodes.len());
        let mut expect: BTreeMap<(Heading, u32), f64> = BTreeMap::new();
        for n in &tree.nodes[1..] {
            *expect.entry((n.first_heading.unwrap(), n.depth)).or_default() += n.probability;
        }
        assert_eq!(mass.len(), expect.len());
        for (k, v) in expect {
            assert!((mass[&k] - v).abs() < 1e-9);
        }
    }
}

#[test]
fn node_cap_is_enforced() {
    let engine = default_engine();
    let s = &midgame_states(&engine, 1, 400)[0];
    assert_eq!(
        expand_full_tree(&engine, s, SearchParams::custom(4, 3), 10).unwrap_err(),
        TreeError::CapExceeded { cap: 10 }
    );
    assert!(visit_full_tree(&engine, s, SearchParams::custom(4, 3), 10, |_, _, _, _| {}).is_err());
}

#[test]
fn full_tree_is_larger_than_plan_set() {
    let engine = default_engine();
    for s in midgame_states(&engine, 5, 500) {
        let params = SearchParams::custom(4, 3);
        let plans = enumerate_plans(&engine, &s, params, s.pacman.run).len();
        let nodes = visit_full_tree(&engine, &s, params, 5_000_000, |_, _, _, _| {}).unwrap();
        assert!(nodes > plans, "{nodes} <= {plans}");
    }
}

#[test]
fn chase_ghost_belief_is_a_point_mass() {
    let engine = default_engine();
    for s in midgame_states(&engine, 10, 600) {
        let beliefs = project_ghost_beliefs(&engine, &s, 5);
        for t in 1..=5 {
            for g in 0..4 {
                let b = beliefs.at(g, t);
                assert!((b.mass() - 1.0).abs() < 1e-12);
                if s.ghosts[g].mode == GhostMode::Chase && !s.is_hunt() {
                    assert_eq!(b.cells.len(), 1);
                }
            }
        }
    }
}

#[test]
fn frightened_belief_splits_at_a_junction() {
    let engine = default_engine();
    let mut s = engine.initial_state(2, 1);
    let j = junction(&engine, 4);
    place_ghost(&mut s, 0, j, Heading::Up, GhostMode::Frightened);
    s.hunt_timer = 20;
    s.tick = 0;
    let b = project_ghost_beliefs(&engine, &s, 4);
    let first = b.at(0, 1);
    assert_eq!(first.cells.len(), 3);
    assert!(first.cells.iter().all(|&(_, p)| (p - 1.0 / 3.0).abs() < 1e-15));
    for t in 1..=4 {
        let support = reachable_roaming(engine.maze(), &s.ghosts[0], s.tick, t);
        assert!(b.at(0, t).cells.iter().all(|(cell, _)| support.contains(cell)));
    }
}
