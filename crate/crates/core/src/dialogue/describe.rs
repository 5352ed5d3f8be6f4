use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_angle, Pose2D};
use crate::world::{optical_heading, Cell, OccupancyGrid, RayCells, Salience, SemanticEntity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DescribeConfig {
    pub describe_range: f64,
    pub max_items: usize,
    pub hfov: f64,
    pub period: f64,
}

impl Default for DescribeConfig {
    fn default() -> Self {
        Self {
            describe_range: 5.0,
            max_items: 3,
            hfov: 87f64.to_radians(),
            period: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDescription {
    pub text: String,
    pub entities_mentioned: Vec<SemanticEntity>,
    pub time: f64,
}

pub const NOTHING_AROUND: &str = "No notable objects around.";

/// Bearing of `p` from the camera, counterclockwise from the optical axis.
pub fn bearing(camera_pose: &Pose2D, p: crate::geometry::Vec2) -> f64 {
    let d = p - camera_pose.position();
    normalize_angle(d.y.atan2(d.x) - optical_heading(camera_pose))
}

/// No occupied cell on the sight line before the entity's own cell.
pub fn line_of_sight(grid: &OccupancyGrid, camera_pose: &Pose2D, entity: &SemanticEntity) -> bool {
    let from = camera_pose.position();
    let d = entity.position - from;
    let dist = d.norm();
    let target = grid.geometry().world_to_cell(entity.position);
    !RayCells::new(grid.geometry(), from, d.y.atan2(d.x), dist)
        .take_while(|c| c.t_enter < dist && (c.ix, c.iy) != target)
        .any(|c| grid.get(c.ix, c.iy) == Cell::Occupied)
}

pub fn is_describable(entity: &SemanticEntity, camera_pose: &Pose2D, grid: &OccupancyGrid, cfg: &DescribeConfig) -> bool {
    let dist = entity.position.distance(camera_pose.position());
    dist <= cfg.describe_range
        && bearing(camera_pose, entity.position).abs() <= cfg.hfov / 2.0
        && line_of_sight(grid, camera_pose, entity)
}

fn distance_bucket(d: f64) -> &'static str {
    if d < 1.0 {
        "very close"
    } else if d < 3.0 {
        "nearby"
    } else {
        "ahead in the distance"
    }
}

fn direction_bucket(b: f64, hfov: f64) -> &'static str {
    if b > hfov / 6.0 {
        "to your left"
    } else if b < -hfov / 6.0 {
        "to your right"
    } else {
        "in front of you"
    }
}

/// Hazards first, then nearest first, capped at `max_items`.
pub fn describe_scene(
    entities: &[SemanticEntity],
    camera_pose: &Pose2D,
    grid: &OccupancyGrid,
    cfg: &DescribeConfig,
    time: f64,
) -> SceneDescription {
    let here = camera_pose.position();
    let mut picked: Vec<(&SemanticEntity, f64)> = entities
        .iter()
        .filter(|e| is_describable(e, camera_pose, grid, cfg))
        .map(|e| (e, e.position.distance(here)))
        .collect();
    picked.sort_by(|a, b| {
        let rank = |e: &SemanticEntity| (e.salience != Salience::Hazard) as u8;
        rank(a.0)
            .cmp(&rank(b.0))
            .then(a.1.total_cmp(&b.1))
            .then(a.0.label.cmp(&b.0.label))
    });
    picked.truncate(cfg.max_items);
    let text = if picked.is_empty() {
        NOTHING_AROUND.to_string()
    } else {
        let clauses: Vec<String> = picked
            .iter()
            .map(|(e, d)| {
                format!(
                    "There is a {} {} {}",
                    e.label,
                    distance_bucket(*d),
                    direction_bucket(bearing(camera_pose, e.position), cfg.hfov)
                )
            })
            .collect();
        format!("{}.", clauses.join("; "))
    };
    SceneDescription {
        text,
        entities_mentioned: picked.into_iter().map(|(e, _)| e.clone()).collect(),
        time,
    }
}

pub fn description_due(last_emit: f64, now: f64, period: f64) -> bool {
    now - last_emit >= period
}
