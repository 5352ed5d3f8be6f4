//! Ground-truth world: the occupancy grid with semantic annotations, robot
//! and user motion, and the two simulated sensors (LiDAR and the torso depth
//! camera).
//!
//! Camera poses use a fixed convention throughout the crate: the camera frame
//! has `+x` pointing to the image right and `+y` along the optical axis. A
//! camera looking along heading `h` therefore has frame rotation `h - π/2`;
//! [`camera_mount`] builds such a pose.

mod camera;
mod grid;
mod kinematics;
mod lidar;
mod map_file;

pub use camera::{render_torso, CameraConfig, TorsoColumn, TorsoObservation};
pub use grid::{squared_distance_transform, Cell, GridGeometry, OccupancyGrid, RayCell, RayCells};
pub use kinematics::{step_robot, step_user, MotionLimits, RobotConfig, UserMotion, UserState, OMEGA_EPS};
pub use lidar::{cast_lidar, LidarScan, LidarSpec};
pub use map_file::{parse_map, serialize_map, MapFile, ParseError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Pose2D, Vec2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("sensor pose ({x:.3}, {y:.3}) lies inside an obstacle or outside the map")]
    SensorInsideObstacle { x: f64, y: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Salience {
    Static,
    Hazard,
}

impl Salience {
    pub fn as_str(self) -> &'static str {
        match self {
            Salience::Static => "static",
            Salience::Hazard => "hazard",
        }
    }
}

/// A labelled object in the map, used by the scene describer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticEntity {
    pub label: String,
    pub position: Vec2,
    pub salience: Salience,
}

/// Pose of a camera frame mounted at `position` whose optical axis points along `heading`.
pub fn camera_mount(position: Vec2, heading: f64) -> Pose2D {
    Pose2D::from_position(position, heading - std::f64::consts::FRAC_PI_2)
}

/// Heading of the optical axis of a camera frame pose.
pub fn optical_heading(camera_pose: &Pose2D) -> f64 {
    crate::geometry::normalize_angle(camera_pose.theta + std::f64::consts::FRAC_PI_2)
}
