//! Python bindings: mazes, the engine, both predictors, bots and evaluation.

#![allow(clippy::useless_conversion)]

use std::sync::Arc;

use pacmodel::bots::{run_bots, BotPolicy};
use pacmodel::engine::{Engine, GameState, Rules};
use pacmodel::eval::{evaluate, EvalOptions, Model1Predictor, Model2Predictor, Predictor, RandomBaseline};
use pacmodel::history::HistorySummary;
use pacmodel::log::GameLog;
use pacmodel::lookahead::SearchParams;
use pacmodel::maze::{branching_rate, AdjacencyCensus, Cell, Heading, Maze};
use pacmodel::model_behavlet::{predict_model2, Model2Config};
use pacmodel::model_simple::{predict_model1, Model1Config};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn heading(s: &str) -> PyResult<Heading> {
    s.parse().map_err(value_err)
}

fn params(depth: u32, lambda_: u32) -> PyResult<SearchParams> {
    SearchParams::new(depth, lambda_).map_err(value_err)
}

#[pyclass(name = "Maze", frozen)]
#[derive(Clone)]
struct PyMaze(Arc<Maze>);

#[pymethods]
impl PyMaze {
    #[staticmethod]
    fn default() -> Self {
        Self(Arc::new(Maze::default_maze()))
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Maze::parse(text).map(|m| Self(Arc::new(m))).map_err(value_err)
    }

    /// (degree-2, degree-3, degree-4) navigable cell counts.
    fn census(&self) -> (usize, usize, usize) {
        let c = self.0.census();
        (c.deg2, c.deg3, c.deg4)
    }

    fn navigable_count(&self) -> usize {
        self.0.navigable_count()
    }

    fn checksum(&self) -> String {
        self.0.checksum().to_string()
    }

    fn is_playable(&self) -> bool {
        self.0.is_playable()
    }

    /// Shortest Pac-Man path length between two (row, col) cells.
    fn distance(&self, a: (u16, u16), b: (u16, u16)) -> Option<u32> {
        self.0.distance(Cell::new(a.0, a.1), Cell::new(b.0, b.1))
    }
}

#[pyclass(name = "GameState", frozen)]
#[derive(Clone)]
struct PyGameState(GameState);

#[pymethods]
impl PyGameState {
    #[getter]
    fn tick(&self) -> u64 {
        self.0.tick
    }

    #[getter]
    fn score(&self) -> u64 {
        self.0.score
    }

    #[getter]
    fn lives(&self) -> u32 {
        self.0.lives
    }

    #[getter]
    fn level(&self) -> u32 {
        self.0.level
    }

    #[getter]
    fn game_over(&self) -> bool {
        self.0.game_over
    }

    #[getter]
    fn hunt_timer(&self) -> u32 {
        self.0.hunt_timer
    }

    /// ((row, col), heading)
    #[getter]
    fn pacman(&self) -> ((u16, u16), &'static str) {
        let p = &self.0.pacman;
        ((p.cell.row, p.cell.col), p.heading.as_str())
    }

    /// [((row, col), mode, home)] for the four ghosts.
    #[getter]
    fn ghosts(&self) -> Vec<((u16, u16), String, bool)> {
        self.0
            .ghosts
            .iter()
            .map(|g| ((g.cell.row, g.cell.col), format!("{:?}", g.mode), g.home))
            .collect()
    }

    #[getter]
    fn pills_left(&self) -> usize {
        self.0.pills.len() + self.0.power_pills.len()
    }

    fn __repr__(&self) -> String {
        let p = &self.0.pacman;
        format!(
            "GameState(tick={}, pacman=({}, {}) {}, score={}, lives={})",
            self.0.tick, p.cell.row, p.cell.col, p.heading, self.0.score, self.0.lives
        )
    }
}

#[pyclass(name = "History")]
#[derive(Clone, Default)]
struct PyHistory(HistorySummary);

#[pymethods]
impl PyHistory {
    #[new]
    fn new() -> Self {
        Self::default()
    }

    #[getter]
    fn ticks(&self) -> u64 {
        self.0.ticks
    }
}

#[pyclass(name = "Engine", frozen)]
struct PyEngine(Arc<Engine>);

#[pymethods]
impl PyEngine {
    #[new]
    #[pyo3(signature = (maze=None))]
    fn new(maze: Option<PyMaze>) -> PyResult<Self> {
        let maze = maze.map(|m| m.0).unwrap_or_else(|| Arc::new(Maze::default_maze()));
        Engine::new(maze, Rules::default()).map(|e| Self(Arc::new(e))).map_err(value_err)
    }

    #[pyo3(signature = (seed, level=1))]
    fn initial_state(&self, seed: u64, level: u32) -> PyGameState {
        PyGameState(self.0.initial_state(seed, level))
    }

    /// Headings Pac-Man may take from the state's cell.
    fn legal_moves(&self, state: &PyGameState) -> Vec<&'static str> {
        self.0.pacman_moves(state.0.pacman.cell).into_iter().map(Heading::as_str).collect()
    }

    /// Advances one tick. When `history` is given it is updated in place.
    /// Returns the next state and the tick's score delta and events.
    #[pyo3(signature = (state, heading, history=None))]
    fn step<'py>(
        &self,
        py: Python<'py>,
        state: &PyGameState,
        heading: &str,
        history: Option<&Bound<'py, PyHistory>>,
    ) -> PyResult<(PyGameState, Bound<'py, PyDict>)> {
        let (next, rec) = self.0.step(&state.0, self::heading(heading)?).map_err(value_err)?;
        if let Some(h) = history {
            h.borrow_mut().0.observe(&self.0, &state.0, &rec, &next);
        }
        let d = PyDict::new_bound(py);
        d.set_item("tick", rec.tick)?;
        d.set_item("heading", rec.pacman.1.as_str())?;
        d.set_item("score_delta", rec.score_delta)?;
        d.set_item("events", rec.events.iter().map(|e| format!("{e:?}")).collect::<Vec<_>>())?;
        Ok((PyGameState(next), d))
    }

    /// Model 1 prediction: full-tree search over simple features.
    #[pyo3(signature = (state, depth=4, lambda_=5))]
    fn predict_model1(&self, state: &PyGameState, depth: u32, lambda_: u32) -> PyResult<&'static str> {
        let config = Model1Config { params: params(depth, lambda_)?, ..Default::default() };
        predict_model1(&self.0, &state.0, &config)
            .map(|p| p.heading.as_str())
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// Model 2 prediction: (heading, confidence, active behavlet ids).
    #[pyo3(signature = (state, history=None, depth=4, lambda_=5))]
    fn predict_model2(
        &self,
        state: &PyGameState,
        history: Option<PyRef<'_, PyHistory>>,
        depth: u32,
        lambda_: u32,
    ) -> PyResult<(&'static str, f64, Vec<&'static str>)> {
        let config = Model2Config { params: params(depth, lambda_)?, ..Default::default() };
        let empty = HistorySummary::new();
        let h = history.as_ref().map(|h| &h.0).unwrap_or(&empty);
        let p = predict_model2(&self.0, &state.0, h, &config);
        Ok((p.heading.as_str(), p.confidence, p.active))
    }
}

#[pyclass(name = "GameLog", frozen)]
#[derive(Clone)]
struct PyGameLog(GameLog);

#[pymethods]
impl PyGameLog {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        GameLog::parse(text).map(Self).map_err(value_err)
    }

    fn to_jsonl(&self) -> String {
        self.0.to_jsonl()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.header.seed
    }

    #[getter]
    fn policy(&self) -> String {
        self.0.header.policy.clone()
    }

    /// Logged Pac-Man headings, one per tick.
    fn headings(&self) -> Vec<&'static str> {
        self.0.records.iter().map(|r| r.pacman.1.as_str()).collect()
    }

    fn __len__(&self) -> usize {
        self.0.records.len()
    }
}

/// Plays `games` bot games on the engine's maze.
#[pyfunction]
#[pyo3(signature = (engine, policy, games, seed=1, tick_cap=1500))]
fn simulate(engine: &PyEngine, policy: &str, games: usize, seed: u64, tick_cap: u32) -> PyResult<Vec<PyGameLog>> {
    let policy: BotPolicy = policy.parse().map_err(value_err)?;
    let digest = pacmodel::Config::default().digest();
    Ok(run_bots(&engine.0, policy, games, seed, tick_cap, &digest).into_iter().map(PyGameLog).collect())
}

/// Accuracy of a predictor ("1", "2" or "random") over logs.
#[pyfunction]
#[pyo3(signature = (engine, logs, model="2", depth=4, lambda_=5))]
fn evaluate_logs<'py>(
    py: Python<'py>,
    engine: &PyEngine,
    logs: Vec<PyGameLog>,
    model: &str,
    depth: u32,
    lambda_: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let p = params(depth, lambda_)?;
    let predictor: Box<dyn Predictor> = match model {
        "1" => Box::new(Model1Predictor(Model1Config { params: p, ..Default::default() })),
        "2" => Box::new(Model2Predictor(Model2Config { params: p, ..Default::default() })),
        "random" => Box::new(RandomBaseline { seed: 1 }),
        other => return Err(PyValueError::new_err(format!("unknown model `{other}`"))),
    };
    let logs: Vec<GameLog> = logs.into_iter().map(|l| l.0).collect();
    let engine = engine.0.clone();
    let report = py
        .allow_threads(|| evaluate(&engine, &logs, predictor.as_ref(), EvalOptions::default()))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let d = PyDict::new_bound(py);
    d.set_item("predictor", report.predictor)?;
    d.set_item("games", report.games)?;
    d.set_item("states", report.states_evaluated)?;
    d.set_item("correct", report.correct)?;
    d.set_item("accuracy", report.accuracy)?;
    d.set_item("mean_streak", report.streak.map(|s| s.mean))?;
    Ok(d)
}

/// Mean moves per step from an adjacency census.
#[pyfunction(name = "branching_rate")]
#[pyo3(signature = (deg2, deg3, deg4, actors=1.0))]
fn py_branching_rate(deg2: usize, deg3: usize, deg4: usize, actors: f64) -> PyResult<f64> {
    branching_rate(&AdjacencyCensus { deg2, deg3, deg4 }, actors).map_err(value_err)
}

#[pymodule]
fn pacmodel_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMaze>()?;
    m.add_class::<PyGameState>()?;
    m.add_class::<PyHistory>()?;
    m.add_class::<PyEngine>()?;
    m.add_class::<PyGameLog>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_logs, m)?)?;
    m.add_function(wrap_pyfunction!(py_branching_rate, m)?)?;
    Ok(())
}
