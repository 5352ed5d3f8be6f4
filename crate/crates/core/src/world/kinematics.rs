use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{camera_mount, WorldError};
use crate::geometry::{normalize_angle, ConvexPolygon, Pose2D, Twist2D, Vec2};
use crate::rng::gaussian;

/// Below this turn rate the unicycle update uses the straight-line formula.
pub const OMEGA_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotionLimits {
    pub v_min: f64,
    pub v_max: f64,
    pub omega_max: f64,
    /// Linear acceleration limit, m/s².
    pub a_max: f64,
    /// Angular acceleration limit, rad/s².
    pub alpha_max: f64,
}

impl Default for MotionLimits {
    fn default() -> Self {
        Self {
            v_min: 0.0,
            v_max: 0.7,
            omega_max: 1.0,
            a_max: 0.2,
            alpha_max: 1.0,
        }
    }
}

impl MotionLimits {
    pub fn validate(&self) -> Result<(), WorldError> {
        if !(self.v_min <= 0.0 && 0.0 <= self.v_max) {
            return Err(WorldError::InvalidConfig("need v_min <= 0 <= v_max".into()));
        }
        if !(self.a_max > 0.0 && self.alpha_max > 0.0 && self.omega_max >= 0.0) {
            return Err(WorldError::InvalidConfig("acceleration limits must be positive".into()));
        }
        Ok(())
    }

    /// Clamps a command into the velocity limits; the flag reports whether anything changed.
    pub fn clamp(&self, cmd: Twist2D) -> (Twist2D, bool) {
        let out = Twist2D::new(
            cmd.v.clamp(self.v_min, self.v_max),
            cmd.omega.clamp(-self.omega_max, self.omega_max),
        );
        (out, out != cmd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobotConfig {
    pub limits: MotionLimits,
    /// Convex body outline in the robot frame; must contain the origin.
    pub body_polygon: ConvexPolygon,
    /// Torso camera frame in the robot frame (x right, y optical axis).
    pub camera_extrinsics: Pose2D,
    /// Forward-looking camera used for scene descriptions.
    pub scene_camera_extrinsics: Pose2D,
    pub lidar_extrinsics: Pose2D,
    /// Point the user holds on to, in the robot frame.
    pub anchor_offset: Vec2,
}

impl Default for RobotConfig {
    fn default() -> Self {
        // Default grip: 0.55 m behind, 0.35 m to the right of the base center.
        let anchor_offset = Vec2::new(-0.55, -0.35);
        let camera_position = Vec2::new(-0.05, 0.0);
        let look = anchor_offset - camera_position;
        Self {
            limits: MotionLimits::default(),
            body_polygon: ConvexPolygon::regular(Vec2::ZERO, 0.18, 8)
                .expect("octagon is a valid polygon"),
            camera_extrinsics: camera_mount(camera_position, look.angle()),
            scene_camera_extrinsics: camera_mount(Vec2::new(0.1, 0.0), 0.0),
            lidar_extrinsics: Pose2D::identity(),
            anchor_offset,
        }
    }
}

impl RobotConfig {
    pub fn validate(&self) -> Result<(), WorldError> {
        self.limits.validate()?;
        if !self.body_polygon.contains(Vec2::ZERO) {
            return Err(WorldError::InvalidConfig("body polygon must contain the origin".into()));
        }
        Ok(())
    }

    pub fn anchor_point(&self, robot_pose: &Pose2D) -> Vec2 {
        robot_pose.transform_point(self.anchor_offset)
    }
}

/// Exact unicycle integration of a constant command over `dt`.
pub fn step_robot(pose: &Pose2D, cmd: &Twist2D, dt: f64) -> Pose2D {
    let Twist2D { v, omega } = *cmd;
    if omega.abs() < OMEGA_EPS {
        let (s, c) = pose.theta.sin_cos();
        return Pose2D::new(pose.x + v * dt * c, pose.y + v * dt * s, pose.theta + omega * dt);
    }
    let theta1 = pose.theta + omega * dt;
    let r = v / omega;
    Pose2D::new(
        pose.x + r * (theta1.sin() - pose.theta.sin()),
        pose.y - r * (theta1.cos() - pose.theta.cos()),
        theta1,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserState {
    /// Torso center; `theta` is the facing direction.
    pub pose: Pose2D,
    pub torso_width: f64,
}

impl UserState {
    pub fn new(pose: Pose2D, torso_width: f64) -> Result<Self, WorldError> {
        if !(torso_width > 0.0) {
            return Err(WorldError::InvalidConfig(format!("torso width {torso_width}")));
        }
        Ok(Self { pose, torso_width })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UserMotion {
    /// First-order lag time constant toward the grip point, seconds.
    pub time_constant: f64,
    /// Per-step positional noise, meters.
    pub position_sigma: f64,
    /// Below this speed the user turns toward the robot heading instead of the motion direction.
    pub turn_speed_threshold: f64,
}

impl Default for UserMotion {
    fn default() -> Self {
        Self {
            time_constant: 0.8,
            position_sigma: 0.03,
            turn_speed_threshold: 0.05,
        }
    }
}

/// User follows the grip anchor with a first-order lag plus Gaussian jitter.
pub fn step_user<R: Rng + ?Sized>(
    user: &UserState,
    robot_pose: &Pose2D,
    cfg: &RobotConfig,
    motion: &UserMotion,
    dt: f64,
    noise: &mut R,
) -> UserState {
    let anchor = cfg.anchor_point(robot_pose);
    let here = user.pose.position();
    let decay = (-dt / motion.time_constant).exp();
    let lagged = anchor + (here - anchor) * decay;
    let moved = lagged - here;
    let target_heading = if moved.norm() > motion.turn_speed_threshold * dt {
        moved.angle()
    } else {
        robot_pose.theta
    };
    let theta = user.pose.theta + (1.0 - decay) * normalize_angle(target_heading - user.pose.theta);
    let jitter = Vec2::new(
        gaussian(noise, motion.position_sigma),
        gaussian(noise, motion.position_sigma),
    );
    let p = lagged + jitter;
    UserState {
        pose: Pose2D::new(p.x, p.y, theta),
        torso_width: user.torso_width,
    }
}
