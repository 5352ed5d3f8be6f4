use serde::{Deserialize, Serialize};

use super::{CompositeFootprint, Costmap, GlobalPath, PlanningError};
use crate::geometry::{linspace, normalize_angle, ConvexPolygon, Pose2D, Twist2D, Vec2};
use crate::world::{step_robot, MotionLimits};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DwaConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub v_samples: usize,
    pub omega_samples: usize,
    pub horizon: f64,
    pub dt_rollout: f64,
    /// Control period the window is computed for.
    pub dt_cmd: f64,
    pub limits: MotionLimits,
    pub lookahead: f64,
    /// The heading term is scored at the pose this far along each rollout.
    pub heading_time: f64,
    pub recovery_omega: f64,
}

impl Default for DwaConfig {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            beta: 0.1,
            gamma: 0.1,
            v_samples: 5,
            omega_samples: 11,
            horizon: 3.0,
            dt_rollout: 0.1,
            dt_cmd: 0.1,
            limits: MotionLimits {
                v_max: 0.6,
                ..MotionLimits::default()
            },
            lookahead: 1.0,
            heading_time: 1.0,
            recovery_omega: 0.5,
        }
    }
}

impl DwaConfig {
    pub fn validate(&self) -> Result<(), PlanningError> {
        let bad = |m: &str| Err(PlanningError::InvalidConfig(m.into()));
        if !(self.alpha >= 0.0 && self.beta >= 0.0 && self.gamma >= 0.0) {
            return bad("objective weights must be nonnegative");
        }
        if !(self.alpha + self.beta + self.gamma > 0.0) {
            return bad("objective weights must not all be zero");
        }
        if self.v_samples < 2 || self.omega_samples < 2 {
            return bad("need at least 2 samples per axis");
        }
        if !(self.dt_rollout > 0.0 && self.horizon >= self.dt_rollout && self.dt_cmd > 0.0) {
            return bad("need horizon >= dt_rollout > 0 and dt_cmd > 0");
        }
        if !(self.lookahead > 0.0) {
            return bad("lookahead must be positive");
        }
        if !(self.heading_time > 0.0) {
            return bad("heading_time must be positive");
        }
        self.limits
            .validate()
            .map_err(|e| PlanningError::InvalidConfig(e.to_string()))
    }

    fn weight_sum(&self) -> f64 {
        self.alpha + self.beta + self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicWindow {
    pub v_min: f64,
    pub v_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl DynamicWindow {
    /// Sample grid, linear velocity outermost.
    pub fn samples(&self, v_samples: usize, omega_samples: usize) -> Vec<Twist2D> {
        let omegas = linspace(self.omega_min, self.omega_max, omega_samples);
        linspace(self.v_min, self.v_max, v_samples)
            .into_iter()
            .flat_map(|v| omegas.iter().map(move |&w| Twist2D::new(v, w)))
            .collect()
    }
}

fn window_axis(current: f64, step: f64, lo: f64, hi: f64) -> (f64, f64) {
    let a = (current - step).max(lo);
    let b = (current + step).min(hi);
    if a <= b {
        (a, b)
    } else {
        // current lies outside the limits by more than one step
        let edge = current.clamp(lo, hi);
        (edge, edge)
    }
}

pub fn dynamic_window(current: &Twist2D, cfg: &DwaConfig, dt_cmd: f64) -> DynamicWindow {
    let l = &cfg.limits;
    let (v_min, v_max) = window_axis(current.v, l.a_max * dt_cmd, l.v_min, l.v_max);
    let (omega_min, omega_max) = window_axis(current.omega, l.alpha_max * dt_cmd, -l.omega_max, l.omega_max);
    DynamicWindow {
        v_min,
        v_max,
        omega_min,
        omega_max,
    }
}

/// True when any footprint polygon at `pose` overlaps a lethal cell.
pub fn footprint_collides(cm: &Costmap, fp: &CompositeFootprint, pose: &Pose2D) -> bool {
    fp.polygons()
        .iter()
        .any(|p| polygon_collides(cm, &p.transformed(pose)))
}

pub(crate) fn polygon_collides(cm: &Costmap, world: &ConvexPolygon) -> bool {
    let c = world.centroid_of_vertices();
    if cm.lethal_clearance_bound(c).is_some_and(|d| d >= world.bounding_radius()) {
        return false;
    }
    let g = cm.geometry();
    let (x0, y0, x1, y1) = g.cell_range(&world.aabb());
    for iy in y0..=y1 {
        for ix in x0..=x1 {
            if cm.is_lethal(ix, iy) && world.overlaps_rect(&g.cell_rect(ix, iy)) {
                return true;
            }
        }
    }
    false
}

/// First rollout time at which the footprint touches a lethal cell, or `None`
/// when the whole horizon is clear.
pub fn rollout_collision(
    cm: &Costmap,
    pose: &Pose2D,
    cmd: &Twist2D,
    fp: &CompositeFootprint,
    cfg: &DwaConfig,
) -> Option<f64> {
    let steps = (cfg.horizon / cfg.dt_rollout).round() as usize;
    (1..=steps)
        .map(|k| k as f64 * cfg.dt_rollout)
        .find(|&t| footprint_collides(cm, fp, &step_robot(pose, cmd, t)))
}

/// Farthest waypoint, walking forward from the one nearest the robot, that
/// stays within `lookahead`. Falls back to the nearest waypoint.
pub fn pursuit_waypoint(path: &GlobalPath, position: Vec2, lookahead: f64) -> Vec2 {
    let wps = &path.waypoints;
    let mut nearest = 0;
    let mut best = f64::INFINITY;
    for (i, w) in wps.iter().enumerate() {
        let d = w.distance(position);
        if d < best {
            best = d;
            nearest = i;
        }
    }
    let mut pick = nearest;
    for (i, w) in wps.iter().enumerate().skip(nearest) {
        if w.distance(position) <= lookahead {
            pick = i;
        } else {
            break;
        }
    }
    wps[pick]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommandScore {
    pub cmd: Twist2D,
    pub time_to_collision: Option<f64>,
    pub admissible: bool,
    pub heading: f64,
    pub clearance: f64,
    pub velocity: f64,
    /// Weighted sum of the min-max normalized terms; zero when inadmissible.
    pub score: f64,
}

fn heading_term(pose: &Pose2D, cmd: &Twist2D, target: Vec2, dt: f64) -> f64 {
    let p = step_robot(pose, cmd, dt);
    let to = target - p.position();
    let err = normalize_angle(to.y.atan2(to.x) - p.theta);
    1.0 - err.abs() / std::f64::consts::PI
}

fn admissible(cmd: &Twist2D, ttc: Option<f64>, limits: &MotionLimits) -> bool {
    let Some(t) = ttc else { return true };
    let linear = cmd.v * cmd.v / (2.0 * limits.a_max) <= cmd.v.abs() * t;
    let angular = cmd.omega * cmd.omega / (2.0 * limits.alpha_max) <= cmd.omega.abs() * t;
    linear && angular
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn normalized(x: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        (x - lo) / (hi - lo)
    } else {
        0.0
    }
}

/// Scores every sample of the dynamic window.
pub fn evaluate_commands(
    pose: &Pose2D,
    current: &Twist2D,
    path: &GlobalPath,
    cm: &Costmap,
    fp: &CompositeFootprint,
    cfg: &DwaConfig,
) -> Vec<CommandScore> {
    let target = pursuit_waypoint(path, pose.position(), cfg.lookahead);
    let window = dynamic_window(current, cfg, cfg.dt_cmd);
    let mut scored: Vec<CommandScore> = window
        .samples(cfg.v_samples, cfg.omega_samples)
        .into_iter()
        .map(|cmd| {
            let ttc = rollout_collision(cm, pose, &cmd, fp, cfg);
            CommandScore {
                cmd,
                time_to_collision: ttc,
                admissible: admissible(&cmd, ttc, &cfg.limits),
                heading: heading_term(pose, &cmd, target, cfg.heading_time),
                clearance: ttc.unwrap_or(cfg.horizon).min(cfg.horizon) / cfg.horizon,
                velocity: cmd.v,
                score: 0.0,
            }
        })
        .collect();
    let ok = || scored.iter().filter(|s| s.admissible);
    let h = min_max(ok().map(|s| s.heading));
    let c = min_max(ok().map(|s| s.clearance));
    let v = min_max(ok().map(|s| s.velocity));
    for s in scored.iter_mut().filter(|s| s.admissible) {
        s.score = cfg.alpha * normalized(s.heading, h)
            + cfg.beta * normalized(s.clearance, c)
            + cfg.gamma * normalized(s.velocity, v);
    }
    scored
}

/// Scores closer than this fraction of the weight sum are ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Best admissible command. Ties prefer smaller |ω|, then smaller v, then
/// smaller ω. With nothing admissible the robot turns in place toward the
/// pursuit waypoint.
pub fn dwa_plan(
    pose: &Pose2D,
    current: &Twist2D,
    path: &GlobalPath,
    cm: &Costmap,
    fp: &CompositeFootprint,
    cfg: &DwaConfig,
) -> Twist2D {
    let scored = evaluate_commands(pose, current, path, cm, fp, cfg);
    let best = scored
        .iter()
        .filter(|s| s.admissible)
        .map(|s| s.score)
        .fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        let target = pursuit_waypoint(path, pose.position(), cfg.lookahead);
        let to = target - pose.position();
        let err = normalize_angle(to.y.atan2(to.x) - pose.theta);
        return Twist2D::new(0.0, cfg.recovery_omega.copysign(if err < 0.0 { -1.0 } else { 1.0 }));
    }
    let cutoff = best - TIE_TOLERANCE * cfg.weight_sum();
    scored
        .iter()
        .filter(|s| s.admissible && s.score >= cutoff)
        .map(|s| s.cmd)
        .min_by(|a, b| {
            a.omega
                .abs()
                .total_cmp(&b.omega.abs())
                .then(a.v.total_cmp(&b.v))
                .then(a.omega.total_cmp(&b.omega))
        })
        .expect("at least one admissible command")
}
