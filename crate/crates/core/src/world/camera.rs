use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Cell, OccupancyGrid, RayCells, UserState, WorldError};
use crate::geometry::{Pose2D, Vec2};
use crate::rng::gaussian;

/// Horizontal slice of a pinhole depth camera. The principal point sits at
/// `image_width / 2` and column `u` looks along `x/y = (u - width/2) / f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    pub image_width: usize,
    pub hfov: f64,
    pub max_depth: f64,
    pub depth_noise_sigma: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            image_width: 640,
            hfov: 87f64.to_radians(),
            max_depth: 4.0,
            depth_noise_sigma: 0.01,
        }
    }
}

impl CameraConfig {
    pub fn validate(&self) -> Result<(), WorldError> {
        if self.image_width < 2 {
            return Err(WorldError::InvalidConfig("image width must be at least 2".into()));
        }
        if !(self.hfov > 0.0 && self.hfov < std::f64::consts::PI) {
            return Err(WorldError::InvalidConfig(format!("hfov {}", self.hfov)));
        }
        if !(self.max_depth > 0.0) {
            return Err(WorldError::InvalidConfig("max depth must be positive".into()));
        }
        Ok(())
    }

    pub fn focal_length(&self) -> f64 {
        self.image_width as f64 / (2.0 * (self.hfov / 2.0).tan())
    }

    pub fn principal_point(&self) -> f64 {
        self.image_width as f64 / 2.0
    }

    /// Ray slope `x/y` of a pixel column.
    pub fn column_slope(&self, column: f64) -> f64 {
        (column - self.principal_point()) / self.focal_length()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorsoColumn {
    pub column: usize,
    /// Distance along the optical axis, meters.
    pub depth: f64,
}

/// Per-column depth of the segmented torso. Empty when the user is not visible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsoObservation {
    pub columns: Vec<TorsoColumn>,
    pub camera: CameraConfig,
}

/// Renders the torso as a flat vertical plate of `torso_width`, centered on
/// the user and perpendicular to the user's facing direction.
pub fn render_torso<R: Rng + ?Sized>(
    camera: &CameraConfig,
    camera_pose: &Pose2D,
    user: &UserState,
    grid: &OccupancyGrid,
    noise: &mut R,
) -> TorsoObservation {
    let mut columns = Vec::new();
    let to_camera = camera_pose.inverse();
    let half = Vec2::from_angle(user.pose.theta + std::f64::consts::FRAC_PI_2) * (user.torso_width / 2.0);
    let center = user.pose.position();
    let a = to_camera.transform_point(center - half);
    let b = to_camera.transform_point(center + half);
    let edge = b - a;
    let eye = camera_pose.position();
    let optical = Vec2::from_angle(camera_pose.theta + std::f64::consts::FRAC_PI_2);
    let right = Vec2::from_angle(camera_pose.theta);

    for u in 0..camera.image_width {
        let ray = Vec2::new(camera.column_slope(u as f64), 1.0);
        let denom = ray.cross(edge);
        if denom.abs() < 1e-12 {
            continue;
        }
        let depth = a.cross(edge) / denom;
        let s = a.cross(ray) / denom;
        if !(0.0..=1.0).contains(&s) || depth <= 0.0 || depth > camera.max_depth {
            continue;
        }
        // Occlusion: any occupied cell on the ray before the plate hides the column.
        let dir_world = right * ray.x + optical * ray.y;
        let dist = depth * dir_world.norm();
        let blocked = RayCells::new(grid.geometry(), eye, dir_world.angle(), dist)
            .take_while(|c| c.t_enter < dist)
            .any(|c| grid.get(c.ix, c.iy) == Cell::Occupied);
        if blocked {
            continue;
        }
        let measured = depth + gaussian(noise, camera.depth_noise_sigma);
        if measured > 0.0 && measured <= camera.max_depth {
            columns.push(TorsoColumn {
                column: u,
                depth: measured,
            });
        }
    }
    TorsoObservation {
        columns,
        camera: *camera,
    }
}
