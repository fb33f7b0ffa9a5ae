//! Offline evaluation on stored logs: accuracy, streaks, timing, parameter
//! sweeps, leave-one-out ablation and the speed/accuracy correlation.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::behavlets::catalog;
use crate::engine::{Engine, GameState};
use crate::history::HistorySummary;
use crate::log::{GameLog, LogError};
use crate::lookahead::{SearchParams, TreeError, DEPTH_RANGE, LAMBDA_RANGE};
use crate::maze::Heading;
use crate::model_behavlet::{predict_model2, Model2Config};
use crate::model_simple::{predict_model1, Model1Config};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PredictError {
    #[error(transparent)]
    Offline(#[from] TreeError),
}

/// A per-game prediction session. Sessions are created fresh for each game
/// and see the game's states in order.
pub trait PredictorSession {
    fn predict(&mut self, engine: &Engine, state: &GameState, history: &HistorySummary) -> Result<Heading, PredictError>;
}

pub trait Predictor: Sync {
    fn name(&self) -> String;
    fn start<'a>(&'a self, log: &'a GameLog) -> Box<dyn PredictorSession + 'a>;
}

pub struct Model1Predictor(pub Model1Config);

impl Predictor for Model1Predictor {
    fn name(&self) -> String {
        format!("model1(depth={},lambda={})", self.0.params.depth, self.0.params.lambda)
    }

    fn start<'a>(&'a self, _: &'a GameLog) -> Box<dyn PredictorSession + 'a> {
        Box::new(self)
    }
}

impl PredictorSession for &Model1Predictor {
    fn predict(&mut self, engine: &Engine, state: &GameState, _: &HistorySummary) -> Result<Heading, PredictError> {
        Ok(predict_model1(engine, state, &self.0)?.heading)
    }
}

pub struct Model2Predictor(pub Model2Config);

impl Predictor for Model2Predictor {
    fn name(&self) -> String {
        format!("model2(depth={},lambda={})", self.0.params.depth, self.0.params.lambda)
    }

    fn start<'a>(&'a self, _: &'a GameLog) -> Box<dyn PredictorSession + 'a> {
        Box::new(self)
    }
}

impl PredictorSession for &Model2Predictor {
    fn predict(&mut self, engine: &Engine, state: &GameState, history: &HistorySummary) -> Result<Heading, PredictError> {
        Ok(predict_model2(engine, state, history, &self.0).heading)
    }
}

/// Uniform choice among Pac-Man's legal headings.
pub struct RandomBaseline {
    pub seed: u64,
}

struct RandomSession(ChaCha8Rng);

impl Predictor for RandomBaseline {
    fn name(&self) -> String {
        "random".to_string()
    }

    fn start<'a>(&'a self, log: &'a GameLog) -> Box<dyn PredictorSession + 'a> {
        Box::new(RandomSession(ChaCha8Rng::seed_from_u64(self.seed ^ log.header.seed)))
    }
}

impl PredictorSession for RandomSession {
    fn predict(&mut self, engine: &Engine, state: &GameState, _: &HistorySummary) -> Result<Heading, PredictError> {
        let moves = engine.pacman_moves(state.pacman.cell);
        Ok(moves[self.0.gen_range(0..moves.len())])
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Record per-call wall-clock time.
    pub timing: bool,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no logs to evaluate")]
    Empty,
    #[error("game {game}: {source}")]
    Log { game: usize, source: LogError },
    #[error("game {game}, tick {tick}: {source}")]
    Predict { game: usize, tick: u64, source: PredictError },
}

impl EvalError {
    /// The prediction needed a look-ahead tree above the node cap.
    pub fn is_offline(&self) -> bool {
        matches!(self, EvalError::Predict { source: PredictError::Offline(_), .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRow {
    pub index: usize,
    pub seed: u64,
    pub policy: String,
    pub states: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub mean_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
}

impl Summary {
    /// Mean, median and sample standard deviation; `None` when empty.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len().is_multiple_of(2) { (sorted[mid - 1] + sorted[mid]) / 2.0 } else { sorted[mid] };
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, median, sd })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub predictor: String,
    pub games: usize,
    pub states_evaluated: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Lengths of maximal runs of consecutive correct predictions.
    pub streaks: Vec<u32>,
    pub streak: Option<Summary>,
    pub ms_per_state: Option<Summary>,
    pub rows: Vec<GameRow>,
}

struct GameResult {
    row: GameRow,
    streaks: Vec<u32>,
    times: Vec<f64>,
}

fn evaluate_game(
    engine: &Engine,
    index: usize,
    log: &GameLog,
    predictor: &dyn Predictor,
    opts: EvalOptions,
) -> Result<GameResult, EvalError> {
    let states = log.replay(engine).map_err(|source| EvalError::Log { game: index, source })?;
    let mut session = predictor.start(log);
    let mut history = HistorySummary::new();
    let mut streaks = Vec::new();
    let mut run = 0u32;
    let mut correct = 0usize;
    let mut times = Vec::new();
    for (i, rec) in log.records.iter().enumerate() {
        let state = &states[i];
        let start = opts.timing.then(Instant::now);
        let predicted = session
            .predict(engine, state, &history)
            .map_err(|source| EvalError::Predict { game: index, tick: rec.tick, source })?;
        if let Some(start) = start {
            // The first call of a game warms caches and is not timed.
            if i > 0 {
                times.push(start.elapsed().as_secs_f64() * 1000.0);
            }
        }
        if predicted == rec.pacman.1 {
            correct += 1;
            run += 1;
        } else if run > 0 {
            streaks.push(run);
            run = 0;
        }
        history.observe(engine, state, rec, &states[i + 1]);
    }
    if run > 0 {
        streaks.push(run);
    }
    let n = log.records.len();
    let row = GameRow {
        index,
        seed: log.header.seed,
        policy: log.header.policy.clone(),
        states: n,
        correct,
        accuracy: if n > 0 { correct as f64 / n as f64 } else { 0.0 },
        mean_ms: Summary::of(&times).map(|s| s.mean),
    };
    Ok(GameResult { row, streaks, times })
}

/// Replays every log and scores `predictor` against the logged headings.
/// Games run in parallel and are merged in log order.
pub fn evaluate(
    engine: &Engine,
    logs: &[GameLog],
    predictor: &dyn Predictor,
    opts: EvalOptions,
) -> Result<EvalReport, EvalError> {
    if logs.is_empty() {
        return Err(EvalError::Empty);
    }
    let results: Vec<GameResult> = logs
        .par_iter()
        .enumerate()
        .map(|(i, log)| evaluate_game(engine, i, log, predictor, opts))
        .collect::<Result<_, _>>()?;
    let states_evaluated = results.iter().map(|r| r.row.states).sum();
    let correct = results.iter().map(|r| r.row.correct).sum();
    let streaks: Vec<u32> = results.iter().flat_map(|r| r.streaks.iter().copied()).collect();
    let streak_values: Vec<f64> = streaks.iter().map(|&s| s as f64).collect();
    let times: Vec<f64> = results.iter().flat_map(|r| r.times.iter().copied()).collect();
    Ok(EvalReport {
        predictor: predictor.name(),
        games: logs.len(),
        states_evaluated,
        correct,
        accuracy: if states_evaluated > 0 { correct as f64 / states_evaluated as f64 } else { 0.0 },
        streak: Summary::of(&streak_values),
        streaks,
        ms_per_state: Summary::of(&times),
        rows: results.into_iter().map(|r| r.row).collect(),
    })
}

/// Mean of 1/|legal headings| over every evaluated state: the expected
/// accuracy of uniform guessing.
pub fn analytic_random_accuracy(engine: &Engine, logs: &[GameLog]) -> Result<f64, EvalError> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (i, log) in logs.iter().enumerate() {
        let states = log.replay(engine).map_err(|source| EvalError::Log { game: i, source })?;
        for s in &states[..log.records.len()] {
            sum += 1.0 / engine.pacman_moves(s.pacman.cell).len() as f64;
            n += 1;
        }
    }
    if n == 0 {
        return Err(EvalError::Empty);
    }
    Ok(sum / n as f64)
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map(|v| format!("{v:.digits$}")).unwrap_or_else(|| "NA".to_string())
}

impl EvalReport {
    pub fn summary_line(&self) -> String {
        let streak = self.streak.map(|s| format!("{:.2} (sd {:.2})", s.mean, s.sd)).unwrap_or_else(|| "NA".into());
        let ms = self
            .ms_per_state
            .map(|s| format!("M={:.2} md={:.2} SD={:.2}", s.mean, s.median, s.sd))
            .unwrap_or_else(|| "NA".into());
        format!(
            "{}: {} games, {} states, accuracy {:.2}%, streak {}, ms/state {}",
            self.predictor,
            self.games,
            self.states_evaluated,
            100.0 * self.accuracy,
            streak,
            ms
        )
    }

    /// Per-game CSV preceded by a summary comment block.
    pub fn to_csv(&self, config_digest: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# config_digest: {config_digest}");
        let _ = writeln!(out, "# {}", self.summary_line());
        out.push_str("game,seed,policy,states,correct,accuracy,mean_ms\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.6},{}",
                r.index,
                r.seed,
                r.policy,
                r.states,
                r.correct,
                r.accuracy,
                fmt_opt(r.mean_ms, 4)
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CellOutcome {
    Done { accuracy: f64, ms_mean: Option<f64>, states: usize },
    OfflineSkipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub depth: u32,
    pub lambda: u32,
    pub outcome: CellOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub predictor: String,
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    /// Highest-accuracy cell; ties go to the earliest in grid order.
    pub fn best(&self) -> Option<&SweepCell> {
        let mut best: Option<(&SweepCell, f64)> = None;
        for c in &self.cells {
            if let CellOutcome::Done { accuracy, .. } = c.outcome {
                if best.is_none_or(|(_, b)| accuracy > b) {
                    best = Some((c, accuracy));
                }
            }
        }
        best.map(|(c, _)| c)
    }

    pub fn to_csv(&self, config_digest: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# config_digest: {config_digest}");
        let _ = writeln!(out, "# predictor: {}", self.predictor);
        if let Some(b) = self.best() {
            let _ = writeln!(out, "# best: depth={} lambda={}", b.depth, b.lambda);
        }
        out.push_str("depth,lambda,status,accuracy,ms_mean,states\n");
        for c in &self.cells {
            match &c.outcome {
                CellOutcome::Done { accuracy, ms_mean, states } => {
                    let _ = writeln!(
                        out,
                        "{},{},ok,{:.6},{},{}",
                        c.depth,
                        c.lambda,
                        accuracy,
                        fmt_opt(*ms_mean, 4),
                        states
                    );
                }
                CellOutcome::OfflineSkipped => {
                    let _ = writeln!(out, "{},{},offline-skipped,NA,NA,NA", c.depth, c.lambda);
                }
            }
        }
        out
    }
}

/// Evaluates one predictor per (depth, lambda) cell of the studied grid,
/// depth-major. Cells whose look-ahead exceeds the tree cap are recorded
/// as offline-skipped.
pub fn parameter_sweep<P, F>(engine: &Engine, logs: &[GameLog], make: F, opts: EvalOptions) -> Result<SweepGrid, EvalError>
where
    P: Predictor,
    F: Fn(SearchParams) -> P,
{
    if logs.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut cells = Vec::new();
    let mut name = String::new();
    for depth in DEPTH_RANGE {
        for lambda in LAMBDA_RANGE {
            let predictor = make(SearchParams { depth, lambda });
            if name.is_empty() {
                name = predictor.name().split('(').next().unwrap_or_default().to_string();
            }
            let outcome = match evaluate(engine, logs, &predictor, opts) {
                Ok(r) => CellOutcome::Done {
                    accuracy: r.accuracy,
                    ms_mean: r.ms_per_state.map(|s| s.mean),
                    states: r.states_evaluated,
                },
                Err(e) if e.is_offline() => CellOutcome::OfflineSkipped,
                Err(e) => return Err(e),
            };
            cells.push(SweepCell { depth, lambda, outcome });
        }
    }
    Ok(SweepGrid { predictor: name, cells })
}

pub const LOO_BASELINE: &str = "None - baseline";
pub const LOO_STATE_CHECKER: &str = "State-checking code";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooRow {
    pub excluded: String,
    /// Baseline minus excluded-run mean ms/state.
    pub delta_ms: Option<f64>,
    /// Baseline minus excluded-run accuracy, in percentage points.
    pub delta_acc_pp: f64,
    pub usage: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooTable {
    pub baseline: EvalReport,
    /// The 21 exclusion rows (state checker first, then catalog order).
    pub rows: Vec<LooRow>,
}

/// Whether an excluded feature earns its place: it saves time when
/// present (Δms ≤ 0) or its removal costs at least half a point of
/// accuracy. Without timing, any accuracy cost qualifies.
pub fn usage_verdict(delta_ms: Option<f64>, delta_acc_pp: f64) -> bool {
    match delta_ms {
        Some(ms) => ms <= 0.0 || delta_acc_pp >= 0.5,
        None => delta_acc_pp > 0.0,
    }
}

/// The model with one catalog entry removed.
pub fn excluding(base: &Model2Config, id: &str) -> Model2Config {
    let mut c = base.clone();
    c.weights.insert(id.to_string(), 0.0);
    if id != "Points_Max" {
        c.usage.remove(id);
    }
    c
}

/// Baseline with the full catalog and the state checker, then the checker
/// removed, then each catalog entry removed in turn.
pub fn leave_one_out(engine: &Engine, logs: &[GameLog], base: &Model2Config, opts: EvalOptions) -> Result<LooTable, EvalError> {
    let full = Model2Config { usage: crate::behavlets::all_ids(), state_checker: true, ..base.clone() };
    let baseline = evaluate(engine, logs, &Model2Predictor(full.clone()), opts)?;
    let mut variants = vec![(LOO_STATE_CHECKER.to_string(), Model2Config { state_checker: false, ..full.clone() })];
    variants.extend(catalog().iter().map(|s| (s.id.to_string(), excluding(&full, s.id))));

    let mut rows = Vec::with_capacity(variants.len());
    for (name, config) in variants {
        let r = evaluate(engine, logs, &Model2Predictor(config), opts)?;
        let delta_ms = match (baseline.ms_per_state, r.ms_per_state) {
            (Some(b), Some(x)) => Some(b.mean - x.mean),
            _ => None,
        };
        let delta_acc_pp = 100.0 * (baseline.accuracy - r.accuracy);
        rows.push(LooRow { excluded: name, delta_ms, delta_acc_pp, usage: usage_verdict(delta_ms, delta_acc_pp) });
    }
    Ok(LooTable { baseline, rows })
}

impl LooTable {
    pub fn row_count(&self) -> usize {
        self.rows.len() + 1
    }

    /// Table-shaped CSV. The baseline row carries absolute values; every
    /// other row carries differences from it (baseline minus excluded).
    pub fn to_csv(&self, config_digest: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# config_digest: {config_digest}");
        let _ = writeln!(out, "# ms/State and Acc % are baseline minus excluded run; the baseline row is absolute");
        out.push_str("Excluded,ms/State,Acc %,Usage\n");
        let _ = writeln!(
            out,
            "{},{},{:.2},-",
            LOO_BASELINE,
            fmt_opt(self.baseline.ms_per_state.map(|s| s.mean), 2),
            100.0 * self.baseline.accuracy
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.2},{}",
                r.excluded,
                fmt_opt(r.delta_ms, 2),
                r.delta_acc_pp,
                if r.usage { "Y" } else { "N" }
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    /// Two-tailed p-value from Student's t with n - 2 degrees of freedom.
    pub p: f64,
    pub n: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorrelationError {
    #[error("need at least 3 rows, got {0}")]
    TooFew(usize),
    #[error("correlation undefined: a column has zero variance")]
    ZeroVariance,
    #[error("report has no timing data; rerun with timing enabled")]
    NoTiming,
}

pub fn pearson(pairs: &[(f64, f64)]) -> Result<Correlation, CorrelationError> {
    let n = pairs.len();
    if n < 3 {
        return Err(CorrelationError::TooFew(n));
    }
    let nf = n as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CorrelationError::ZeroVariance);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = nf - 2.0;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    Ok(Correlation { r, p, n })
}

/// Pearson correlation between per-game accuracy and mean ms/state.
pub fn speed_accuracy_correlation(report: &EvalReport) -> Result<Correlation, CorrelationError> {
    let pairs: Option<Vec<(f64, f64)>> = report.rows.iter().map(|r| r.mean_ms.map(|ms| (r.accuracy, ms))).collect();
    pearson(&pairs.ok_or(CorrelationError::NoTiming)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    pub states: usize,
    pub divergent: usize,
}

/// Counts states where the state checker changes Model 2's decision.
pub fn checker_divergence(engine: &Engine, logs: &[GameLog], config: &Model2Config) -> Result<Divergence, EvalError> {
    let on = Model2Config { state_checker: true, ..config.clone() };
    let off = Model2Config { state_checker: false, ..config.clone() };
    let per_game: Vec<(usize, usize)> = logs
        .par_iter()
        .enumerate()
        .map(|(i, log)| {
            let states = log.replay(engine).map_err(|source| EvalError::Log { game: i, source })?;
            let mut history = HistorySummary::new();
            let mut divergent = 0;
            for (t, rec) in log.records.iter().enumerate() {
                let a = predict_model2(engine, &states[t], &history, &on).heading;
                let b = predict_model2(engine, &states[t], &history, &off).heading;
                divergent += (a != b) as usize;
                history.observe(engine, &states[t], rec, &states[t + 1]);
            }
            Ok((log.records.len(), divergent))
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(Divergence {
        states: per_game.iter().map(|p| p.0).sum(),
        divergent: per_game.iter().map(|p| p.1).sum(),
    })
}
