//! Global and local planning for the robot and the person it guides.
//!
//! [`astar`] searches an inflated [`Costmap`]; [`dwa_plan`] picks a velocity
//! command whose rollout keeps every polygon of a [`CompositeFootprint`] off
//! lethal cells.

mod astar;
mod costmap;
mod dwa;
mod footprint;

pub use astar::{astar, GlobalPath, PathCost};
pub use costmap::{inflate, CostCell, Costmap, FREE_COST, INFLATED_COST};
pub use dwa::{
    dwa_plan, dynamic_window, evaluate_commands, footprint_collides, pursuit_waypoint, rollout_collision,
    CommandScore, DwaConfig, DynamicWindow, TIE_TOLERANCE,
};
pub use footprint::{lost_user_box, merge_footprint, CompositeFootprint};

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanningError {
    #[error("start cell ({0}, {1}) is blocked or outside the map")]
    StartBlocked(i64, i64),
    #[error("goal cell ({0}, {1}) is blocked or outside the map")]
    GoalBlocked(i64, i64),
    #[error("no path between start and goal")]
    NoPath,
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid footprint: {0}")]
    InvalidFootprint(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
