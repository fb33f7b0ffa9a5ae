//! Model 2: Behavlet utility summed per Pac-Man-only plan, with ghosts
//! represented by projected beliefs.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::behavlets::{self, applicable_behavlets, catalog, CatalogError, CheckContext, Evaluator, PlanContext};
use crate::engine::{Engine, GameState};
use crate::history::HistorySummary;
use crate::lookahead::{enumerate_plans, project_ghost_beliefs, Plan, SearchParams};
use crate::maze::Heading;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Model2Config {
    pub params: SearchParams,
    pub usage: BTreeSet<String>,
    pub state_checker: bool,
    pub weights: BTreeMap<String, f64>,
}

impl Default for Model2Config {
    fn default() -> Self {
        Self {
            params: SearchParams::default(),
            usage: behavlets::default_usage(),
            state_checker: true,
            weights: default_weights(),
        }
    }
}

pub fn default_weights() -> BTreeMap<String, f64> {
    catalog().iter().map(|s| (s.id.to_string(), s.default_weight)).collect()
}

impl Model2Config {
    /// The full catalog with the state checker on.
    pub fn full_catalog() -> Self {
        Self { usage: behavlets::all_ids(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        for id in self.usage.iter().chain(self.weights.keys()) {
            behavlets::index_of(id)?;
        }
        if !self.usage.contains("Points_Max") {
            return Err(CatalogError::PointsMaxRequired);
        }
        Ok(())
    }

    pub fn weight(&self, id: &str) -> f64 {
        match self.weights.get(id) {
            Some(&w) => w,
            None => behavlets::spec(id).map(|s| s.default_weight).unwrap_or(0.0),
        }
    }

    /// Behavlet ids used for this state, in catalog order.
    pub fn active_ids(&self, ctx: &CheckContext) -> Vec<&'static str> {
        if self.state_checker {
            applicable_behavlets(ctx, &self.usage)
        } else {
            catalog()
                .iter()
                .filter(|s| self.usage.contains(s.id))
                .map(|s| s.id)
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model2Prediction {
    pub heading: Heading,
    /// (plan headings, utility) in enumeration order.
    pub plan_utilities: Vec<(Vec<Heading>, f64)>,
    pub active: Vec<&'static str>,
    /// Utility gap between the best and the best differing first heading,
    /// relative to the spread of all plan utilities.
    pub confidence: f64,
    pub elapsed_ms: f64,
}

/// Index of the best plan; ties go to the plan whose first heading comes
/// first in canonical order, then to the earliest enumerated.
pub fn best_plan(plans: &[Plan], utilities: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, (p, &u)) in plans.iter().zip(utilities).enumerate() {
        best = match best {
            None => Some(i),
            Some(b) => {
                let (bu, bh) = (utilities[b], plans[b].first_heading().index());
                let h = p.first_heading().index();
                if u > bu || (u == bu && h < bh) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

fn confidence(plans: &[Plan], utilities: &[f64], best: usize) -> f64 {
    let top = utilities[best];
    let first = plans[best].first_heading();
    let runner = plans
        .iter()
        .zip(utilities)
        .filter(|(p, _)| p.first_heading() != first)
        .map(|(_, &u)| u)
        .max_by(f64::total_cmp);
    let lo = utilities.iter().copied().min_by(f64::total_cmp).unwrap_or(top);
    match runner {
        None => 1.0,
        Some(r) if top > lo => ((top - r) / (top - lo)).clamp(0.0, 1.0),
        Some(_) => 0.0,
    }
}

/// Utility of every plan under the given weighted behavlets.
pub fn plan_utilities(
    engine: &Engine,
    state: &GameState,
    history: &HistorySummary,
    plans: &[Plan],
    weighted: &[(Evaluator, f64)],
    depth: usize,
) -> Vec<f64> {
    let beliefs = project_ghost_beliefs(engine, state, depth);
    plans
        .iter()
        .map(|plan| {
            let ctx = PlanContext::new(engine, state, plan, &beliefs, history);
            weighted.iter().map(|(eval, w)| w * eval(&ctx)).sum()
        })
        .collect()
}

pub fn predict_model2(
    engine: &Engine,
    state: &GameState,
    history: &HistorySummary,
    config: &Model2Config,
) -> Model2Prediction {
    let start = Instant::now();
    let check = CheckContext { engine, state, history };
    let active = config.active_ids(&check);
    let weighted: Vec<(Evaluator, f64)> = active
        .iter()
        .map(|&id| (behavlets::spec(id).expect("catalog id").evaluator, config.weight(id)))
        .filter(|&(_, w)| w != 0.0)
        .collect();

    let plans = enumerate_plans(engine, state, config.params, state.pacman.run);
    let utilities = plan_utilities(engine, state, history, &plans, &weighted, config.params.depth as usize);
    let (heading, conf) = match best_plan(&plans, &utilities) {
        Some(b) => (plans[b].first_heading(), confidence(&plans, &utilities, b)),
        None => (state.pacman.heading, 0.0),
    };
    let plan_utilities = plans.into_iter().map(|p| p.headings).zip(utilities).collect();
    Model2Prediction {
        heading,
        plan_utilities,
        active,
        confidence: conf,
        elapsed_ms: start.elapsed().as_secs_f64() * 1000.0,
    }
}
