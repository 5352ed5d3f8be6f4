use serde::{Deserialize, Serialize};

use super::{Event, RunStatus, TraceRecord};
use crate::geometry::{Aabb, ConvexPolygon, Pose2D, Vec2};
use crate::world::{Cell, OccupancyGrid};

/// Clearances are searched for this far and capped there.
pub const CLEARANCE_CAP: f64 = 2.0;

/// What compute_metrics needs beyond the trace itself.
#[derive(Debug, Clone)]
pub struct MetricsContext<'a> {
    pub truth: &'a OccupancyGrid,
    pub goal: Option<Pose2D>,
    pub robot_start: Pose2D,
    pub dt: f64,
    pub goal_tolerance: f64,
    pub torso_width: f64,
    pub user_violation_clearance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub status: RunStatus,
    pub success: bool,
    pub time_to_goal: Option<f64>,
    pub path_length: f64,
    pub min_clearance_robot: f64,
    pub min_clearance_user: f64,
    pub collision_count: usize,
    pub user_violation_ticks: usize,
    pub max_linear_jerk: f64,
    pub max_angular_accel: f64,
    pub description_count: usize,
    pub localization_rmse: f64,
    pub ticks: usize,
}

fn occupied_cells_near<'g>(grid: &'g OccupancyGrid, rect: &Aabb) -> impl Iterator<Item = Aabb> + 'g {
    let g = grid.geometry();
    let (x0, y0, x1, y1) = g.cell_range(rect);
    (y0..=y1).flat_map(move |iy| {
        (x0..=x1)
            .filter(move |&ix| grid.get(ix, iy) == Cell::Occupied)
            .map(move |ix| grid.geometry().cell_rect(ix, iy))
    })
}

/// True when the polygon shares interior area with an occupied cell.
pub fn polygon_hits_occupied(grid: &OccupancyGrid, poly: &ConvexPolygon) -> bool {
    occupied_cells_near(grid, &poly.aabb()).any(|r| poly.overlaps_rect(&r))
}

pub fn polygon_clearance(grid: &OccupancyGrid, poly: &ConvexPolygon) -> f64 {
    occupied_cells_near(grid, &poly.aabb().expanded(CLEARANCE_CAP))
        .map(|r| poly.distance_to_rect(&r))
        .fold(CLEARANCE_CAP, f64::min)
}

/// Distance from the torso center to the nearest occupied cell, minus half the torso width.
pub fn user_clearance(grid: &OccupancyGrid, user: Vec2, torso_width: f64) -> f64 {
    let r = torso_width / 2.0;
    let window = Aabb::new(user, user).expanded(CLEARANCE_CAP + r);
    occupied_cells_near(grid, &window)
        .map(|c| c.distance_to_point(user))
        .fold(CLEARANCE_CAP + r, f64::min)
        - r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickCollision {
    pub robot: bool,
    pub user: bool,
}

impl TickCollision {
    pub fn any(&self) -> bool {
        self.robot || self.user
    }
}

/// Footprint polygons at the true robot pose against occupied truth cells,
/// plus the true torso against its own clearance.
pub fn tick_collision(grid: &OccupancyGrid, record: &TraceRecord, torso_width: f64) -> TickCollision {
    let mut polys = record.footprint.iter().map(|p| p.transformed(&record.robot));
    let robot = polys.next().is_some_and(|p| polygon_hits_occupied(grid, &p));
    let user_box = polys.any(|p| polygon_hits_occupied(grid, &p));
    let user_point = user_clearance(grid, record.user.position(), torso_width) < 0.0;
    TickCollision {
        robot,
        user: user_box || user_point,
    }
}

pub fn compute_metrics(trace: &[TraceRecord], ctx: &MetricsContext) -> RunMetrics {
    let status = trace.iter().rev().find_map(TraceRecord::status).unwrap_or(RunStatus::Timeout);
    let mut path_length = 0.0;
    let mut prev_pose = ctx.robot_start;
    let mut min_clearance_robot = CLEARANCE_CAP;
    let mut min_clearance_user = CLEARANCE_CAP;
    let mut collision_count = 0;
    let mut user_violation_ticks = 0;
    let mut time_to_goal = None;
    let mut sq_err = 0.0;
    for r in trace {
        path_length += prev_pose.distance(&r.robot);
        prev_pose = r.robot;
        if let Some(body) = r.footprint.first() {
            min_clearance_robot = min_clearance_robot.min(polygon_clearance(ctx.truth, &body.transformed(&r.robot)));
        }
        let cu = user_clearance(ctx.truth, r.user.position(), ctx.torso_width);
        min_clearance_user = min_clearance_user.min(cu);
        if cu < ctx.user_violation_clearance {
            user_violation_ticks += 1;
        }
        if tick_collision(ctx.truth, r, ctx.torso_width).any() {
            collision_count += 1;
        }
        if time_to_goal.is_none() {
            if let Some(goal) = ctx.goal {
                if r.robot.distance(&goal) <= ctx.goal_tolerance {
                    time_to_goal = Some(r.time);
                }
            }
        }
        sq_err += r.robot.distance(&r.robot_estimate).powi(2);
    }

    // finite differences of the executed commands, starting from rest
    let (mut v_prev, mut w_prev, mut a_prev) = (0.0, 0.0, 0.0);
    let (mut max_jerk, mut max_alpha) = (0.0f64, 0.0f64);
    for cmd in trace.iter().filter_map(|r| r.cmd) {
        let a = (cmd.v - v_prev) / ctx.dt;
        max_jerk = max_jerk.max(((a - a_prev) / ctx.dt).abs());
        max_alpha = max_alpha.max(((cmd.omega - w_prev) / ctx.dt).abs());
        (v_prev, w_prev, a_prev) = (cmd.v, cmd.omega, a);
    }

    let description_count = trace
        .iter()
        .flat_map(|r| &r.events)
        .filter(|e| matches!(e, Event::Description { .. }))
        .count();
    RunMetrics {
        status,
        success: time_to_goal.is_some() && collision_count == 0,
        time_to_goal,
        path_length,
        min_clearance_robot,
        min_clearance_user,
        collision_count,
        user_violation_ticks,
        max_linear_jerk: max_jerk,
        max_angular_accel: max_alpha,
        description_count,
        localization_rmse: if trace.is_empty() { 0.0 } else { (sq_err / trace.len() as f64).sqrt() },
        ticks: trace.len(),
    }
}
