mod common;

use std::collections::BTreeSet;

use common::{c, default_engine, engine_for, midgame_states, place_ghost, SMALL};
use pacmodel::behavlets::{applicable_behavlets, catalog, evaluate_behavlet, CheckContext, PlanContext};
use pacmodel::engine::{CellSet, Event, GhostMode};
use pacmodel::history::HistorySummary;
use pacmodel::lookahead::{enumerate_plans, full_tree_expansions, project_ghost_beliefs, Plan, SearchParams};
use pacmodel::maze::Heading;
use pacmodel::model_behavlet::{predict_model2, Model2Config};

fn plan_with(plans: &[Plan], headings: &[Heading]) -> Plan {
    plans.iter().find(|p| p.headings == headings).expect("plan enumerated").clone()
}

#[test]
fn points_max_counts_pills_on_the_plan() {
    let engine = engine_for(SMALL);
    let s = engine.initial_state(1, 1);
    let params = SearchParams::custom(3, 5);
    let plans = enumerate_plans(&engine, &s, params, 0);
    let plan = plan_with(&plans, &[Heading::Right; 3]);
    let beliefs = project_ghost_beliefs(&engine, &s, 3);
    let history = HistorySummary::new();
    let ctx = PlanContext::new(&engine, &s, &plan, &beliefs, &history);
    assert_eq!(evaluate_behavlet("Points_Max", &ctx).unwrap(), 30.0);
}

#[test]
fn points_max_equals_replayed_score_without_prey() {
    let engine = default_engine();
    let history = HistorySummary::new();
    for s in midgame_states(&engine, 20, 70).into_iter().filter(|s| !s.is_hunt()) {
        let params = SearchParams::custom(5, 3);
        let beliefs = project_ghost_beliefs(&engine, &s, 5);
        for plan in enumerate_plans(&engine, &s, params, s.pacman.run) {
            if plan.steps.iter().any(|st| st.record.has(Event::PowerPillEaten)) {
                continue;
            }
            let ctx = PlanContext::new(&engine, &s, &plan, &beliefs, &history);
            let replayed: u32 = plan.steps.iter().map(|st| st.record.score_delta).sum();
            assert_eq!(evaluate_behavlet("Points_Max", &ctx).unwrap(), replayed as f64);
        }
    }
}

#[test]
fn idle_plan_counts_every_step_for_c5() {
    let engine = default_engine();
    let maze = engine.maze();
    let mut s = engine.initial_state(1, 1);
    s.pills = CellSet::from_cells(maze, [c(1, 1)]);
    s.power_pills = CellSet::from_cells(maze, []);
    let beliefs = project_ghost_beliefs(&engine, &s, 4);
    let history = HistorySummary::new();
    for plan in enumerate_plans(&engine, &s, SearchParams::custom(4, 5), 0) {
        let ctx = PlanContext::new(&engine, &s, &plan, &beliefs, &history);
        assert_eq!(evaluate_behavlet("C5", &ctx).unwrap(), 4.0);
    }
}

#[test]
fn reversals_counted_by_d2() {
    let engine = engine_for(SMALL);
    let s = engine.initial_state(1, 1);
    let plans = enumerate_plans(&engine, &s, SearchParams::custom(3, 5), 0);
    let beliefs = project_ghost_beliefs(&engine, &s, 3);
    let history = HistorySummary::new();
    let eval = |h: &[Heading]| {
        let plan = plan_with(&plans, h);
        evaluate_behavlet("D2", &PlanContext::new(&engine, &s, &plan, &beliefs, &history)).unwrap()
    };
    assert_eq!(eval(&[Heading::Right; 3]), 0.0);
    assert_eq!(eval(&[Heading::Right, Heading::Left, Heading::Right]), 2.0);
    assert_eq!(eval(&[Heading::Left, Heading::Left, Heading::Right]), 1.0);
}

#[test]
fn evaluators_are_finite_and_bounded() {
    let engine = default_engine();
    let history = HistorySummary::new();
    for s in midgame_states(&engine, 15, 90) {
        for depth in [1, 4] {
            let beliefs = project_ghost_beliefs(&engine, &s, depth as usize);
            for plan in enumerate_plans(&engine, &s, SearchParams::custom(depth, 3), s.pacman.run) {
                let ctx = PlanContext::new(&engine, &s, &plan, &beliefs, &history);
                for spec in catalog() {
                    let v = (spec.evaluator)(&ctx);
                    assert!(v.is_finite(), "{} = {v}", spec.id);
                }
                let d2 = evaluate_behavlet("D2", &ctx).unwrap();
                assert!(d2 >= 0.0 && d2 < depth as f64);
                let c5 = evaluate_behavlet("C5", &ctx).unwrap();
                assert!((0.0..=depth as f64).contains(&c5));
                for flag in ["C1.b", "C4", "C7", "P1", "P1.d"] {
                    let v = evaluate_behavlet(flag, &ctx).unwrap();
                    assert!(v == 0.0 || v == 1.0, "{flag} = {v}");
                }
            }
        }
    }
}

#[test]
fn state_checker_examples() {
    let engine = default_engine();
    let history = HistorySummary::new();
    let all: BTreeSet<String> = catalog().iter().map(|s| s.id.to_string()).collect();

    // Start position: no hunt, power pills far, ghosts at home.
    let s = engine.initial_state(1, 1);
    let active = applicable_behavlets(&CheckContext { engine: &engine, state: &s, history: &history }, &all);
    for id in ["A1", "A4", "A6", "C2.b", "C4", "P4", "C1.b", "C3", "C7", "S2b", "P1", "Cherry"] {
        assert!(!active.contains(&id), "{id} active at start");
    }
    for id in ["Points_Max", "C2.a", "C5", "D2"] {
        assert!(active.contains(&id), "{id} inactive at start");
    }

    // A hunt swaps the outside-hunt distance term for the hunt group.
    let mut h = s.clone();
    h.hunt_timer = 20;
    place_ghost(&mut h, 0, c(5, 4), Heading::Left, GhostMode::Frightened);
    let active = applicable_behavlets(&CheckContext { engine: &engine, state: &h, history: &history }, &all);
    assert!(!active.contains(&"C2.a"));
    for id in ["A1", "A6", "C2.b", "P4"] {
        assert!(active.contains(&id));
    }

    // Only ids in the usage set are ever returned, Points_Max always.
    let usage: BTreeSet<String> = ["C5".to_string()].into();
    let active = applicable_behavlets(&CheckContext { engine: &engine, state: &s, history: &history }, &usage);
    assert_eq!(active, vec!["Points_Max", "C5"]);

    let config = Model2Config { state_checker: false, ..Model2Config::full_catalog() };
    let ids = config.active_ids(&CheckContext { engine: &engine, state: &s, history: &history });
    assert_eq!(ids.len(), catalog().len());
}

#[test]
fn model2_never_expands_the_full_tree() {
    let engine = default_engine();
    let before = full_tree_expansions();
    for s in midgame_states(&engine, 30, 5) {
        predict_model2(&engine, &s, &HistorySummary::new(), &Model2Config::full_catalog());
    }
    assert_eq!(full_tree_expansions(), before);
}
