mod common;

use common::*;
use pacmodel::bots::{run_bots, BotPolicy};
use pacmodel::engine::{score_of_events, Actor, Event, GhostMode};
use pacmodel::maze::Heading;

#[test]
fn legal_moves_follow_geometry() {
    let e = engine_for(LOOP);
    let mut s = e.initial_state(1, 1);
    assert_eq!(e.legal_moves(&s, Actor::PacMan), vec![Heading::Left, Heading::Right]);
    place_ghost(&mut s, 0, c(1, 6), Heading::Right, GhostMode::Chase);
    assert_eq!(e.legal_moves(&s, Actor::Ghost(0)), vec![Heading::Right]);

    let d = default_engine();
    let mut s = d.initial_state(1, 1);
    let junction = d.maze().navigable_cells().find(|&x| d.maze().pac_degree(x) == 4).unwrap();
    s.pacman.cell = junction;
    assert_eq!(d.legal_moves(&s, Actor::PacMan), Heading::ALL.to_vec());
}

#[test]
fn eating_a_pill_scores_ten() {
    let e = engine_for(LOOP);
    let s = e.initial_state(1, 1);
    let before = s.pills.len();
    let (n, rec) = e.step(&s, Heading::Right).unwrap();
    assert_eq!(rec.events, vec![Event::PillEaten]);
    assert_eq!((rec.score_delta, n.score), (10, 10));
    assert_eq!(n.pills.len(), before - 1);
    assert!(!n.has_pill(e.maze(), c(1, 5)));
}

#[test]
fn power_pill_starts_a_hunt() {
    let e = engine_for(SMALL);
    let mut s = e.initial_state(1, 1);
    s.pacman.cell = c(1, 2);
    s.pacman.heading = Heading::Left;
    let (n, rec) = e.step(&s, Heading::Left).unwrap();
    assert!(rec.has(Event::PowerPillEaten));
    assert_eq!(rec.score_delta, 50);
    // Set to 40, then decremented once in the same tick.
    assert_eq!(n.hunt_timer, 39);
    assert!(n.ghosts.iter().all(|g| g.mode == GhostMode::Frightened));
}

#[test]
fn swapping_cells_with_a_chase_ghost_kills() {
    let e = engine_for(CORRIDOR);
    let mut s = e.initial_state(1, 1);
    s.pacman.cell = c(1, 2);
    s.pacman.heading = Heading::Right;
    place_ghost(&mut s, 0, c(1, 3), Heading::Left, GhostMode::Chase);
    let (n, rec) = e.step(&s, Heading::Right).unwrap();
    assert!(rec.died());
    assert_eq!(n.lives, 2);
    assert_eq!(n.pacman.cell, e.maze().pacman_start());
}

#[test]
fn eating_frightened_ghosts_doubles_within_a_hunt() {
    let e = engine_for(CORRIDOR);
    let mut s = e.initial_state(1, 1);
    s.pacman.cell = c(1, 2);
    s.pacman.heading = Heading::Right;
    s.hunt_timer = 20;
    s.hunt_chain = 1;
    // Odd tick: the frightened ghost pauses in Pac-Man's path.
    s.tick = 1;
    place_ghost(&mut s, 1, c(1, 3), Heading::Right, GhostMode::Frightened);
    let (n, rec) = e.step(&s, Heading::Right).unwrap();
    assert_eq!(rec.ghosts_eaten(), 1);
    assert_eq!(rec.events, vec![Event::PillEaten, Event::GhostEaten { ghost: 1, points: 400 }]);
    assert_eq!(rec.score_delta, 410);
    assert_eq!(n.hunt_chain, 2);
    assert_eq!(n.ghosts[1].mode, GhostMode::Eaten);
}

#[test]
fn illegal_heading_keeps_current() {
    let e = engine_for(LOOP);
    let s = e.initial_state(1, 1);
    let (n, rec) = e.step(&s, Heading::Up).unwrap();
    assert_eq!(rec.pacman.1, Heading::Left);
    assert_eq!(n.pacman.cell, c(1, 3));
}

#[test]
fn games_are_deterministic_and_consistent() {
    let e = default_engine();
    let a = run_bots(&e, BotPolicy::Hunter, 3, 5, 800, "d");
    let b = run_bots(&e, BotPolicy::Hunter, 3, 5, 800, "d");
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.to_jsonl(), y.to_jsonl());
    }
    for log in &a {
        let states = log.replay(&e).unwrap();
        let layout = e.maze().pill_layout().len() + e.maze().power_pill_layout().len();
        let mut level_start_items = layout;
        let mut score = 0u64;
        for (i, rec) in log.records.iter().enumerate() {
            assert_eq!(rec.score_delta, score_of_events(e.rules(), &rec.events));
            score += rec.score_delta as u64;
            let after = &states[i + 1];
            assert_eq!(after.score, score);
            if rec.has(Event::LevelCleared) {
                level_start_items = layout;
                continue;
            }
            let remaining = after.pills.len() + after.power_pills.len();
            assert_eq!(after.pills_eaten as usize + remaining, level_start_items);
            assert_eq!(after.ghosts.len(), 4);
            for g in &after.ghosts {
                assert!(e.maze().is_navigable(g.cell) || e.maze().is_house(g.cell));
            }
            assert!(e.maze().is_navigable(after.pacman.cell));
        }
    }
}

#[test]
fn eaten_ghosts_return_home_and_resume_chase() {
    let e = default_engine();
    let logs = run_bots(&e, BotPolicy::Hunter, 10, 3, 1500, "d");
    let mut seen = 0;
    for log in &logs {
        let states = log.replay(&e).unwrap();
        for (i, rec) in log.records.iter().enumerate() {
            for ev in &rec.events {
                if let Event::GhostEaten { ghost, .. } = *ev {
                    seen += 1;
                    let g = ghost as usize;
                    if let Some(s) = states[i + 1..].iter().find(|s| s.ghosts[g].mode != GhostMode::Eaten) {
                        assert_eq!(s.ghosts[g].mode, GhostMode::Chase);
                        assert!(s.ghosts[g].home);
                    }
                }
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn level_two_has_shorter_hunts() {
    let e = default_engine();
    assert_eq!(e.rules().hunt_duration(1), 40);
    assert_eq!(e.rules().hunt_duration(2), 35);
    let a = e.initial_state(1, 2);
    assert_eq!(a.level, 2);
    assert_eq!(a.pills, e.initial_state(1, 1).pills);
}
