"""Smoke test for the Python bindings.

Build and install first:  pip install maturin && maturin develop -m crates/py/Cargo.toml
"""

import pacmodel_py as pm


def main() -> None:
    maze = pm.Maze.default()
    assert maze.census() == (143, 32, 7), maze.census()
    assert maze.navigable_count() == 182
    assert abs(pm.branching_rate(143, 32, 7) - 410 / 182) < 1e-12

    engine = pm.Engine(maze)
    state = engine.initial_state(seed=1)
    history = pm.History()
    for _ in range(20):
        if state.game_over:
            break
        heading, confidence, active = engine.predict_model2(state, history)
        assert heading in engine.legal_moves(state)
        assert 0.0 <= confidence <= 1.0 and "Points_Max" in active
        state, record = engine.step(state, heading, history)
        assert record["heading"] == heading
    print(state)
    assert history.ticks == state.tick

    assert engine.predict_model1(engine.initial_state(seed=2), depth=4) in ("Up", "Left", "Down", "Right")

    logs = pm.simulate(engine, "greedy_pills", games=3, seed=5, tick_cap=200)
    assert len(logs) == 3 and all(len(log) > 0 for log in logs)
    again = pm.GameLog.parse(logs[0].to_jsonl())
    assert again.headings() == logs[0].headings()

    m2 = pm.evaluate_logs(engine, logs, model="2")
    rnd = pm.evaluate_logs(engine, logs, model="random")
    print(f"model 2 {m2['accuracy']:.3f}  random {rnd['accuracy']:.3f}  over {m2['states']} states")
    assert m2["states"] == sum(len(log) for log in logs)
    print("smoke test ok")


if __name__ == "__main__":
    main()
