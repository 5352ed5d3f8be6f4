use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::dialogue::DescribeConfig;
use crate::geometry::Pose2D;
use crate::localization::{LogOddsParams, MclConfig};
use crate::perception::{EstimatorConfig, ReachBox, TrackerConfig};
use crate::planning::DwaConfig;
use crate::world::{CameraConfig, LidarSpec, RobotConfig, UserMotion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseToggles {
    pub lidar: bool,
    pub depth: bool,
    pub odometry: bool,
    pub user: bool,
}

impl Default for NoiseToggles {
    fn default() -> Self {
        Self::all(true)
    }
}

impl NoiseToggles {
    pub fn all(on: bool) -> Self {
        Self {
            lidar: on,
            depth: on,
            odometry: on,
            user: on,
        }
    }

    pub fn any(&self) -> bool {
        self.lidar || self.depth || self.odometry || self.user
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapSource {
    /// Build the planning map from scans at known lattice poses.
    Mapped,
    /// Plan and localize on the ground-truth grid.
    Truth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessParams {
    pub dt: f64,
    pub goal_tolerance: f64,
    /// Seconds without a user track before the run aborts.
    pub lost_user_abort: f64,
    /// Growth of the reach box used while the user is lost.
    pub lost_user_margin: f64,
    /// Replan when the estimate drifts this far from the global path.
    pub replan_distance: f64,
    pub inflation_radius: f64,
    /// Outward offset of each footprint polygon used by the local planner.
    pub robot_padding: f64,
    pub user_padding: f64,
    /// `false` plans with the robot body only.
    pub user_footprint: bool,
    pub torso_width: f64,
    /// User clearance below this counts as a violation tick.
    pub user_violation_clearance: f64,
    /// Smoothness bound on the executed linear jerk, m/s³.
    pub jerk_bound: f64,
    pub map_source: MapSource,
    pub mapping_spacing: f64,
    pub mapping_clearance: f64,
    pub particles: usize,
    pub field_sigma: f64,
    pub field_p_rand: f64,
    pub odometry_sigma_xy: f64,
    pub odometry_sigma_theta: f64,
    pub robot: RobotConfig,
    pub lidar: LidarSpec,
    pub camera: CameraConfig,
    pub user_motion: UserMotion,
    pub reach: ReachBox,
    pub estimator: EstimatorConfig,
    pub tracker: TrackerConfig,
    pub mcl: MclConfig,
    pub log_odds: LogOddsParams,
    pub dwa: DwaConfig,
    pub describe: DescribeConfig,
}

impl Default for HarnessParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            goal_tolerance: 0.4,
            lost_user_abort: 3.0,
            lost_user_margin: 0.1,
            replan_distance: 0.5,
            inflation_radius: 0.3,
            robot_padding: 0.05,
            user_padding: 0.05,
            user_footprint: true,
            torso_width: 0.45,
            user_violation_clearance: 0.1,
            jerk_bound: 5.0,
            map_source: MapSource::Mapped,
            mapping_spacing: 1.0,
            mapping_clearance: 0.3,
            particles: 500,
            field_sigma: 0.3,
            field_p_rand: 0.3,
            odometry_sigma_xy: 0.005,
            odometry_sigma_theta: 0.005,
            robot: RobotConfig::default(),
            lidar: LidarSpec::default(),
            camera: CameraConfig::default(),
            user_motion: UserMotion::default(),
            reach: ReachBox::default(),
            estimator: EstimatorConfig::default(),
            tracker: TrackerConfig::default(),
            mcl: MclConfig::default(),
            log_odds: LogOddsParams::default(),
            dwa: DwaConfig::default(),
            describe: DescribeConfig::default(),
        }
    }
}

/// A run description. Relative map and lexicon paths are resolved against
/// the directory of the scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub map: PathBuf,
    pub lexicon: PathBuf,
    pub robot_start: Pose2D,
    /// Defaults to the grip point, facing along the robot.
    #[serde(default)]
    pub user_start: Option<Pose2D>,
    pub utterance: String,
    pub duration_max: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub noise: NoiseToggles,
    #[serde(default)]
    pub params: HarnessParams,
}

impl Scenario {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, HarnessError> {
        let mut sc: Scenario = toml::from_str(text).map_err(|e| HarnessError::Scenario(e.to_string()))?;
        sc.map = base_dir.join(&sc.map);
        sc.lexicon = base_dir.join(&sc.lexicon);
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = read(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn user_start_pose(&self) -> Pose2D {
        self.user_start.unwrap_or_else(|| {
            let a = self.params.robot.anchor_point(&self.robot_start);
            Pose2D::from_position(a, self.robot_start.theta)
        })
    }
}

pub(crate) fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
