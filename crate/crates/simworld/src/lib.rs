//! Desk-scale tidy-up simulator. A point robot on an occupancy grid plans
//! 8-connected shortest paths, tracks them with pure pursuit, and runs the
//! pick / classify / select / deposit loop with stochastic sensing and
//! manipulation.
//!
//! Randomness comes from ChaCha8 seeded by `SimConfig::rng_seed`, with one
//! stream per subsystem (localization, classification, primitives), so an
//! episode is a pure function of its inputs.

pub mod control;
pub mod episode;
pub mod geometry;
pub mod grid;
pub mod montecarlo;
pub mod planner;
pub mod rules;
pub mod sensing;
pub mod world;

use thiserror::Error;
use tidyup_llmbackend::BackendError;
use tidyup_promptkit::{ParseError, PromptError};

pub use control::{pure_pursuit_step, ControlError};
pub use episode::{run_episode, ComponentRates, EpisodeLog, ObjectRecord, Scene, SimConfig, Termination};
pub use geometry::{normalize_angle, Point, Pose2D, Rect};
pub use grid::{build_occupancy_grid, Cell, GridError, OccupancyGrid};
pub use montecarlo::{summarize, sweep, Estimate, SweepSummary};
pub use planner::{plan_path, Path, PathCost, PlanError};
pub use rules::{derive_rules, resolve_rules, RuleEntry, RuleTable, Rules, RulesFile};
pub use sensing::{execute_primitive, simulate_classify};
pub use world::{closest_object, ObjectState, World, WorldError, WorldFile, WorldObject};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("object category {0:?} is not among the classifier categories")]
    UnknownCategory(String),
    #[error("unknown receptacle {0}")]
    UnknownReceptacle(String),
    #[error("no object is grasped")]
    NothingGrasped,
    #[error("receptacle is {distance:.3} m away, beyond reach {limit} m")]
    OutOfRange { distance: f64, limit: f64 },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl SimError {
    pub fn is_backend(&self) -> bool {
        matches!(self, SimError::Backend(_))
    }
}
