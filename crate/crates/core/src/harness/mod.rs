//! Scenario files, the 10 Hz closed loop, traces and run metrics.
//!
//! Per tick: sensors at the true state, user perception, MCL, footprint
//! merge, replan check, DWA, actuation, user motion, the description
//! scheduler, then one trace record.

mod batch;
mod metrics;
mod run;
mod scenario;
mod trace;

pub use batch::{run_batch, BatchResult};
pub use metrics::{
    compute_metrics, polygon_clearance, polygon_hits_occupied, tick_collision, user_clearance, MetricsContext,
    RunMetrics, TickCollision, CLEARANCE_CAP,
};
pub use run::{lattice_poses, load_map, run_loaded, run_scenario, LoadedScenario, RunOutput, RunStatus};
pub use scenario::{HarnessParams, MapSource, NoiseToggles, Scenario};
pub use trace::{read_trace, trace_to_string, write_trace, Event, TraceRecord};

use std::path::PathBuf;

use thiserror::Error;

use crate::dialogue::DialogueError;
use crate::geometry::GeometryError;
use crate::localization::LocalizationError;
use crate::perception::PerceptionError;
use crate::planning::PlanningError;
use crate::world::{ParseError, WorldError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("{}: {source}", path.display())]
    Map { path: PathBuf, source: ParseError },
    #[error("lexicon: {0}")]
    Lexicon(#[from] DialogueError),
    #[error("trace: {0}")]
    Trace(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Localization(#[from] LocalizationError),
    #[error(transparent)]
    Planning(#[from] PlanningError),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl HarnessError {
    /// Input that could not be read or parsed, as opposed to a failure while running.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            HarnessError::Io { .. }
                | HarnessError::Scenario(_)
                | HarnessError::Map { .. }
                | HarnessError::Lexicon(_)
                | HarnessError::Trace(_)
        )
    }
}
