//! User pose from torso depth, and the user's reachable-space rectangle.
//!
//! Estimates live in the torso camera frame (`+x` image right, `+y` optical
//! axis). `phi` is the rotation of the torso plane relative to the image
//! plane: zero when the user squarely faces the camera, positive when the
//! user's left side (image right) is farther away.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{normalize_angle, ConvexPolygon, GeometryError, Pose2D, Vec2};
use crate::world::TorsoObservation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerceptionError {
    #[error("no user detected ({columns} torso columns, need {k_min})")]
    NoUserDetected { columns: usize, k_min: usize },
    #[error("torso observation too narrow to estimate orientation")]
    DegenerateObservation,
    #[error("user not seen for {since:.2} s")]
    UserLost { since: f64 },
    #[error("invalid reach box: {0}")]
    InvalidBox(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    /// Minimum number of torso columns.
    pub k_min: usize,
    /// Fraction of columns on each side used for the edge depths.
    pub edge_fraction: f64,
    /// Fraction of sorted depths dropped at each end before taking the median.
    pub trim_fraction: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            k_min: 5,
            edge_fraction: 0.2,
            trim_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseEstimate {
    pub x_cam: f64,
    pub y_cam: f64,
    pub phi: f64,
}

impl PoseEstimate {
    pub fn new(x_cam: f64, y_cam: f64, phi: f64) -> Self {
        Self { x_cam, y_cam, phi }
    }

    /// User frame (x along the facing direction) expressed in the camera frame.
    pub fn user_in_camera(&self) -> Pose2D {
        Pose2D::new(self.x_cam, self.y_cam, self.phi - std::f64::consts::FRAC_PI_2)
    }
}

/// Camera-frame pose estimate plus the reachable-space polygon in the robot frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserEstimate {
    pub x_cam: f64,
    pub y_cam: f64,
    pub phi: f64,
    pub boundary_robot: ConvexPolygon,
    pub timestamp: f64,
}

impl UserEstimate {
    pub fn from_pose(est: &PoseEstimate, reach: &ReachBox, extrinsics: &Pose2D, timestamp: f64) -> Self {
        Self {
            x_cam: est.x_cam,
            y_cam: est.y_cam,
            phi: est.phi,
            boundary_robot: user_boundary_polygon(est, reach, extrinsics),
            timestamp,
        }
    }

    pub fn pose(&self) -> PoseEstimate {
        PoseEstimate::new(self.x_cam, self.y_cam, self.phi)
    }
}

/// Rectangle of space the user can reach, in the user frame (x = facing).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ReachBoxFields")]
pub struct ReachBox {
    depth: f64,
    width: f64,
    center_offset: Vec2,
}

#[derive(Deserialize)]
struct ReachBoxFields {
    depth: f64,
    width: f64,
    center_offset: Vec2,
}

impl TryFrom<ReachBoxFields> for ReachBox {
    type Error = PerceptionError;
    fn try_from(f: ReachBoxFields) -> Result<Self, Self::Error> {
        ReachBox::new(f.depth, f.width, f.center_offset)
    }
}

impl Default for ReachBox {
    fn default() -> Self {
        Self {
            depth: 0.7,
            width: 0.7,
            center_offset: Vec2::new(-0.1, 0.0),
        }
    }
}

impl ReachBox {
    pub fn new(depth: f64, width: f64, center_offset: Vec2) -> Result<Self, PerceptionError> {
        if !(depth > 0.0 && depth.is_finite() && width > 0.0 && width.is_finite()) {
            return Err(PerceptionError::InvalidBox(format!("{depth} x {width}")));
        }
        if !center_offset.is_finite() {
            return Err(PerceptionError::InvalidBox("non-finite offset".into()));
        }
        Ok(Self {
            depth,
            width,
            center_offset,
        })
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn center_offset(&self) -> Vec2 {
        self.center_offset
    }

    /// Same box with each side grown by `2·margin`.
    pub fn grown(&self, margin: f64) -> Result<Self, PerceptionError> {
        Self::new(self.depth + 2.0 * margin, self.width + 2.0 * margin, self.center_offset)
    }

    /// Corners in the user frame, counterclockwise.
    pub fn corners(&self) -> [Vec2; 4] {
        let c = self.center_offset;
        let (hd, hw) = (self.depth / 2.0, self.width / 2.0);
        [
            c + Vec2::new(-hd, -hw),
            c + Vec2::new(hd, -hw),
            c + Vec2::new(hd, hw),
            c + Vec2::new(-hd, hw),
        ]
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

pub fn estimate_user_pose(obs: &TorsoObservation, cfg: &EstimatorConfig) -> Result<PoseEstimate, PerceptionError> {
    let cols = &obs.columns;
    let n = cols.len();
    if n < cfg.k_min.max(1) {
        return Err(PerceptionError::NoUserDetected {
            columns: n,
            k_min: cfg.k_min,
        });
    }
    if cols[n - 1].column - cols[0].column < 2 {
        return Err(PerceptionError::DegenerateObservation);
    }
    let f = obs.camera.focal_length();
    let cx = obs.camera.principal_point();

    let mut depths: Vec<f64> = cols.iter().map(|c| c.depth).collect();
    depths.sort_by(f64::total_cmp);
    let trim = (cfg.trim_fraction * n as f64).floor() as usize;
    let kept = &depths[trim..n - trim];
    let m = kept.len();
    let y_cam = if m % 2 == 1 {
        kept[m / 2]
    } else {
        0.5 * (kept[m / 2 - 1] + kept[m / 2])
    };

    let weight: f64 = cols.iter().map(|c| c.depth).sum();
    let u_centroid = cols.iter().map(|c| c.column as f64 * c.depth).sum::<f64>() / weight;
    let x_cam = (u_centroid - cx) * y_cam / f;

    let k = ((cfg.edge_fraction * n as f64).round() as usize).clamp(1, n / 2);
    let lateral = |c: &crate::world::TorsoColumn| (c.column as f64 - cx) * c.depth / f;
    let (left, right) = (&cols[..k], &cols[n - k..]);
    let d_l = mean(left.iter().map(|c| c.depth));
    let d_r = mean(right.iter().map(|c| c.depth));
    let x_l = mean(left.iter().map(lateral));
    let x_r = mean(right.iter().map(lateral));
    if !(x_r - x_l > 0.0) {
        return Err(PerceptionError::DegenerateObservation);
    }
    let phi = (d_r - d_l).atan2(x_r - x_l);
    Ok(PoseEstimate { x_cam, y_cam, phi })
}

/// `T_robot←cam · T_cam←user · corners`, counterclockwise.
pub fn user_boundary_polygon(est: &PoseEstimate, reach: &ReachBox, extrinsics: &Pose2D) -> ConvexPolygon {
    let t = extrinsics.compose(&est.user_in_camera());
    ConvexPolygon::new(reach.corners().iter().map(|c| t.transform_point(*c)).collect())
        .expect("rigid image of a valid rectangle is a valid polygon")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerConfig {
    /// Weight of the new measurement.
    pub lambda: f64,
    /// Seconds an estimate is held without detections.
    pub t_hold: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            lambda: 0.6,
            t_hold: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackState {
    pub pose: PoseEstimate,
    /// Seconds since the last detection.
    pub since_seen: f64,
}

fn blend(a: f64, b: f64, lambda: f64) -> f64 {
    if lambda >= 1.0 {
        b
    } else {
        a + lambda * (b - a)
    }
}

/// Exponential smoothing with a hold window for missed detections.
pub fn track_user(
    prev: Option<&TrackState>,
    new: Option<&PoseEstimate>,
    dt: f64,
    cfg: &TrackerConfig,
) -> Result<TrackState, PerceptionError> {
    match (prev, new) {
        (None, Some(n)) => Ok(TrackState {
            pose: *n,
            since_seen: 0.0,
        }),
        (Some(p), Some(n)) => {
            let l = cfg.lambda;
            let phi = if l >= 1.0 {
                n.phi
            } else {
                normalize_angle(p.pose.phi + l * normalize_angle(n.phi - p.pose.phi))
            };
            Ok(TrackState {
                pose: PoseEstimate {
                    x_cam: blend(p.pose.x_cam, n.x_cam, l),
                    y_cam: blend(p.pose.y_cam, n.y_cam, l),
                    phi,
                },
                since_seen: 0.0,
            })
        }
        (Some(p), None) => {
            let since = p.since_seen + dt;
            if since > cfg.t_hold + 1e-9 {
                Err(PerceptionError::UserLost { since })
            } else {
                Ok(TrackState {
                    pose: p.pose,
                    since_seen: since,
                })
            }
        }
        (None, None) => Err(PerceptionError::UserLost { since: dt }),
    }
}
