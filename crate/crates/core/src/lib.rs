//! Pac-Man simulation with two decision-theoretic move predictors: a
//! simple-feature full-tree search and a Behavlet per-path search with
//! projected ghost beliefs.

pub mod behavlets;
pub mod bots;
pub mod config;
pub mod corpus;
pub mod engine;
pub mod eval;
pub mod history;
pub mod log;
pub mod lookahead;
pub mod maze;
pub mod model_behavlet;
pub mod model_simple;

pub use bots::BotPolicy;
pub use config::Config;
pub use engine::{Engine, Event, GameState, Rules, TickRecord};
pub use history::HistorySummary;
pub use log::GameLog;
pub use lookahead::SearchParams;
pub use maze::{Cell, Heading, Maze};
pub use model_behavlet::{predict_model2, Model2Config};
pub use model_simple::{predict_model1, Model1Config, SimpleWeights};
