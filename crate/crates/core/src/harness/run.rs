use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::scenario::{read, MapSource};
use super::{
    compute_metrics, tick_collision, Event, HarnessError, HarnessParams, MetricsContext, RunMetrics, Scenario,
    TraceRecord,
};
use crate::dialogue::{describe_scene, description_due, extract_intent, DestinationLexicon, Stopwords};
use crate::geometry::{ConvexPolygon, Pose2D, Twist2D, Vec2};
use crate::localization::{
    build_likelihood_field, build_map, estimate_pose, mcl_step, LocalizationError, ParticleSet,
};
use crate::perception::{estimate_user_pose, track_user, TrackState, UserEstimate};
use crate::planning::{astar, dwa_plan, inflate, lost_user_box, CompositeFootprint, GlobalPath, PlanningError};
use crate::rng::{gaussian, stream, StreamName};
use crate::world::{
    cast_lidar, parse_map, render_torso, step_robot, step_user, Cell, MapFile, OccupancyGrid, SemanticEntity,
    UserState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Reached,
    Timeout,
    Clarify,
    Unreachable,
    LostUser,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Reached => "reached",
            RunStatus::Timeout => "timeout",
            RunStatus::Clarify => "clarify",
            RunStatus::Unreachable => "unreachable",
            RunStatus::LostUser => "lost_user",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub metrics: RunMetrics,
}

pub fn load_map(text: &str) -> Result<(OccupancyGrid, Vec<SemanticEntity>), crate::world::ParseError> {
    parse_map(text).map(|m| (m.grid, m.entities))
}

/// Free lattice poses at least `clearance` from any occupied cell.
pub fn lattice_poses(truth: &OccupancyGrid, spacing: f64, clearance: f64) -> Vec<Pose2D> {
    let g = truth.geometry();
    let d2 = truth.occupied_distance_sq();
    let mut out = Vec::new();
    let (w, h) = (g.width as f64 * g.resolution, g.height as f64 * g.resolution);
    let mut y = spacing / 2.0;
    while y < h {
        let mut x = spacing / 2.0;
        while x < w {
            let p = g.origin.transform_point(Vec2::new(x, y));
            let (ix, iy) = g.world_to_cell(p);
            if let Some(i) = g.index(ix, iy) {
                if truth.get(ix, iy) == Cell::Free && d2[i].sqrt() * g.resolution >= clearance {
                    out.push(Pose2D::from_position(p, 0.0));
                }
            }
            x += spacing;
        }
        y += spacing;
    }
    out
}

/// A scenario with its map and lexicon read and checked.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub map: MapFile,
    pub lexicon: DestinationLexicon,
}

impl LoadedScenario {
    pub fn load(sc: &Scenario) -> Result<Self, HarnessError> {
        let map = parse_map(&read(&sc.map)?).map_err(|source| HarnessError::Map {
            path: sc.map.clone(),
            source,
        })?;
        let lexicon = DestinationLexicon::parse(&read(&sc.lexicon)?)?;
        Self::new(sc.clone(), map, lexicon)
    }

    pub fn new(scenario: Scenario, map: MapFile, lexicon: DestinationLexicon) -> Result<Self, HarnessError> {
        let invalid = |m: String| Err(HarnessError::InvalidScenario(m));
        if !(scenario.duration_max > 0.0) {
            return invalid(format!("duration_max {} must be positive", scenario.duration_max));
        }
        if !(scenario.params.dt > 0.0) {
            return invalid(format!("dt {} must be positive", scenario.params.dt));
        }
        for (what, p) in [("robot", scenario.robot_start), ("user", scenario.user_start_pose())] {
            if map.grid.cell_at(p.position()) != Cell::Free {
                return invalid(format!("{what} start ({}, {}) is not on a free cell", p.x, p.y));
            }
        }
        lexicon.check_goals(&map.grid)?;
        scenario.params.robot.validate()?;
        scenario.params.camera.validate()?;
        scenario.params.dwa.validate()?;
        Ok(Self {
            scenario,
            map,
            lexicon,
        })
    }

    /// Goal is taken from the trace's intent event so a re-read trace scores identically.
    pub fn metrics_context<'a>(&'a self, trace: &[TraceRecord]) -> MetricsContext<'a> {
        let p = &self.scenario.params;
        let goal = trace.iter().flat_map(|r| &r.events).find_map(|e| match e {
            Event::Intent { destination, .. } => self.lexicon.get(destination).map(|d| d.goal),
            _ => None,
        });
        MetricsContext {
            truth: &self.map.grid,
            goal,
            robot_start: self.scenario.robot_start,
            dt: p.dt,
            goal_tolerance: p.goal_tolerance,
            torso_width: p.torso_width,
            user_violation_clearance: p.user_violation_clearance,
        }
    }

    pub fn metrics(&self, trace: &[TraceRecord]) -> RunMetrics {
        compute_metrics(trace, &self.metrics_context(trace))
    }
}

/// Parameters with the disabled noise sources zeroed.
fn effective_params(sc: &Scenario) -> HarnessParams {
    let mut p = sc.params.clone();
    if !sc.noise.lidar {
        p.lidar.range_sigma = 0.0;
    }
    if !sc.noise.depth {
        p.camera.depth_noise_sigma = 0.0;
    }
    if !sc.noise.odometry {
        p.odometry_sigma_xy = 0.0;
        p.odometry_sigma_theta = 0.0;
    }
    if !sc.noise.user {
        p.user_motion.position_sigma = 0.0;
    }
    p
}

pub fn run_scenario(sc: &Scenario) -> Result<RunOutput, HarnessError> {
    let loaded = LoadedScenario::load(sc)?;
    run_loaded(&loaded, sc.seed)
}

fn distance_to_path(path: &GlobalPath, p: Vec2) -> f64 {
    path.waypoints.iter().map(|w| w.distance(p)).fold(f64::INFINITY, f64::min)
}

struct Tick {
    robot: Pose2D,
    user: UserState,
    estimate: Pose2D,
    user_estimate: Option<UserEstimate>,
    footprint: Vec<ConvexPolygon>,
}

pub fn run_loaded(loaded: &LoadedScenario, seed: u64) -> Result<RunOutput, HarnessError> {
    let sc = &loaded.scenario;
    let p = effective_params(sc);
    let dt = p.dt;
    let truth = &loaded.map.grid;
    let mut lidar_rng = stream(seed, StreamName::Lidar);
    let mut depth_rng = stream(seed, StreamName::Depth);
    let mut odom_rng = stream(seed, StreamName::Odometry);
    let mut user_rng = stream(seed, StreamName::User);
    let mut mcl_rng = stream(seed, StreamName::Mcl);
    let mut mapping_rng = stream(seed, StreamName::Mapping);

    let body = p.robot.body_polygon.clone();
    let mut state = Tick {
        robot: sc.robot_start,
        user: UserState::new(sc.user_start_pose(), p.torso_width)?,
        estimate: sc.robot_start,
        user_estimate: None,
        footprint: vec![body.clone()],
    };
    let mut trace: Vec<TraceRecord> = Vec::new();
    let record = |k: u64, s: &Tick, cmd: Option<Twist2D>, events: Vec<Event>| TraceRecord {
        tick: k,
        time: k as f64 * dt,
        robot: s.robot,
        robot_estimate: s.estimate,
        user: s.user.pose,
        user_estimate: s.user_estimate.clone(),
        cmd,
        footprint: s.footprint.clone(),
        events,
    };
    let finish = |trace: Vec<TraceRecord>| {
        let metrics = loaded.metrics(&trace);
        info!(
            "seed {seed}: {} after {} ticks, {} collisions",
            metrics.status.as_str(),
            metrics.ticks,
            metrics.collision_count
        );
        Ok(RunOutput { trace, metrics })
    };

    let mut pending = Vec::new();
    let goal = match extract_intent(&sc.utterance, &loaded.lexicon, &Stopwords::default()) {
        Ok(intent) => {
            pending.push(Event::Intent {
                destination: intent.destination_id.clone(),
                score: intent.score,
            });
            pending.push(Event::Confirmation {
                text: intent.confirmation_text,
            });
            loaded
                .lexicon
                .get(&intent.destination_id)
                .expect("intent names a lexicon entry")
                .goal
        }
        Err(e) => {
            pending.push(Event::Clarify { message: e.to_string() });
            pending.push(Event::End {
                status: RunStatus::Clarify,
            });
            trace.push(record(0, &state, None, pending));
            return finish(trace);
        }
    };

    let map = match p.map_source {
        MapSource::Truth => truth.clone(),
        MapSource::Mapped => {
            let poses = lattice_poses(truth, p.mapping_spacing, p.mapping_clearance);
            build_map(truth, &poses, &p.lidar, &p.robot.lidar_extrinsics, p.log_odds, &mut mapping_rng)?
        }
    };
    let cm = inflate(&map, p.inflation_radius)?;
    let field = build_likelihood_field(&map, p.field_sigma, p.field_p_rand)?;
    let mut particles = ParticleSet::at_pose(p.particles, sc.robot_start)?;
    let robot_padded = body.inflated(p.robot_padding)?;
    let lost_box = lost_user_box(p.robot.anchor_offset, &p.reach, p.lost_user_margin)?;

    let mut path = match astar(&cm, &state.estimate, &goal) {
        Ok(path) => Some(path),
        Err(e @ (PlanningError::NoPath | PlanningError::StartBlocked(..) | PlanningError::GoalBlocked(..))) => {
            pending.push(Event::Warning { message: e.to_string() });
            None
        }
        Err(e) => return Err(e.into()),
    };

    if let Some(path) = &path {
        debug!("global path: {} waypoints, cost {:.2}", path.waypoints.len(), path.total_cost);
        for w in &path.waypoints {
            log::trace!("waypoint {:.2} {:.2}", w.x, w.y);
        }
    }
    let mut current = Twist2D::ZERO;
    let mut track: Option<TrackState> = None;
    let mut unseen = 0.0;
    let mut odom_delta = Pose2D::identity();
    let mut last_emit = 0.0;
    let mut k: u64 = 0;
    loop {
        let t = k as f64 * dt;
        let mut events = std::mem::take(&mut pending);
        let mut stop = if path.is_none() {
            Some(RunStatus::Unreachable)
        } else if state.robot.distance(&goal) <= p.goal_tolerance {
            Some(RunStatus::Reached)
        } else if t >= sc.duration_max - 1e-9 {
            Some(RunStatus::Timeout)
        } else {
            None
        };

        let mut cmd = None;
        if stop.is_none() {
            // sensors at the true state
            let lidar_pose = state.robot.compose(&p.robot.lidar_extrinsics);
            let scan = match cast_lidar(truth, &lidar_pose, &p.lidar, &mut lidar_rng) {
                Ok(s) => Some(s),
                Err(e) => {
                    events.push(Event::Warning { message: e.to_string() });
                    None
                }
            };
            let cam_pose = state.robot.compose(&p.robot.camera_extrinsics);
            let obs = render_torso(&p.camera, &cam_pose, &state.user, truth, &mut depth_rng);

            // perception
            let detection = estimate_user_pose(&obs, &p.estimator).ok();
            unseen = if detection.is_some() { 0.0 } else { unseen + dt };
            track = track_user(track.as_ref(), detection.as_ref(), dt, &p.tracker).ok();
            state.user_estimate = track
                .as_ref()
                .map(|s| UserEstimate::from_pose(&s.pose, &p.reach, &p.robot.camera_extrinsics, t));
            if track.is_none() && unseen > p.lost_user_abort + 1e-9 {
                events.push(Event::Warning {
                    message: format!("user not seen for {unseen:.1} s"),
                });
                stop = Some(RunStatus::LostUser);
            }

            // localization
            particles = match mcl_step(
                &particles,
                &odom_delta,
                scan.as_ref(),
                &field,
                &map,
                &p.robot.lidar_extrinsics,
                &p.mcl,
                &mut mcl_rng,
            ) {
                Ok(ps) => ps,
                Err(LocalizationError::DegenerateBelief { reinitialized }) => {
                    events.push(Event::Warning {
                        message: "particle weights vanished; localization reinitialized".into(),
                    });
                    reinitialized
                }
                Err(e) => return Err(e.into()),
            };
            state.estimate = estimate_pose(&particles);

            // footprint merge
            let user_region = state
                .user_estimate
                .as_ref()
                .map_or_else(|| lost_box.clone(), |u| u.boundary_robot.clone());
            let planning_fp = if p.user_footprint {
                state.footprint = vec![body.clone(), user_region.clone()];
                CompositeFootprint::new(vec![robot_padded.clone(), user_region.inflated(p.user_padding)?])?
            } else {
                state.footprint = vec![body.clone()];
                CompositeFootprint::new(vec![robot_padded.clone()])?
            };

            if stop.is_none() {
                let current_path = path.as_ref().expect("checked above");
                if distance_to_path(current_path, state.estimate.position()) > p.replan_distance {
                    match astar(&cm, &state.estimate, &goal) {
                        Ok(np) => {
                            debug!("tick {k}: replanned, cost {:.2}", np.total_cost);
                            path = Some(np);
                        }
                        Err(PlanningError::NoPath) => {
                            events.push(Event::Warning {
                                message: PlanningError::NoPath.to_string(),
                            });
                            stop = Some(RunStatus::Unreachable);
                        }
                        Err(e) => events.push(Event::Warning {
                            message: format!("replan skipped: {e}"),
                        }),
                    }
                }
            }

            if stop.is_none() {
                let planned = dwa_plan(
                    &state.estimate,
                    &current,
                    path.as_ref().expect("checked above"),
                    &cm,
                    &planning_fp,
                    &p.dwa,
                );
                let (executed, clamped) = p.robot.limits.clamp(planned);
                if clamped {
                    events.push(Event::Warning {
                        message: format!("command ({:.3}, {:.3}) clamped", planned.v, planned.omega),
                    });
                }
                cmd = Some(executed);
            }
        }

        if description_due(last_emit, t, p.describe.period) {
            last_emit = t;
            let camera = state.robot.compose(&p.robot.scene_camera_extrinsics);
            let d = describe_scene(&loaded.map.entities, &camera, truth, &p.describe, t);
            events.push(Event::Description {
                text: d.text,
                entities: d.entities_mentioned,
                camera,
            });
        }
        if let Some(status) = stop {
            events.push(Event::End { status });
        }
        let mut rec = record(k, &state, cmd, events);
        let hit = tick_collision(truth, &rec, p.torso_width);
        if hit.any() {
            rec.events.push(Event::Collision {
                robot: hit.robot,
                user: hit.user,
            });
        }
        trace.push(rec);

        let Some(cmd) = cmd else { break };
        // actuate, then let the user follow
        let next = step_robot(&state.robot, &cmd, dt);
        let d = state.robot.relative(&next);
        odom_delta = Pose2D::new(
            d.x + gaussian(&mut odom_rng, p.odometry_sigma_xy),
            d.y + gaussian(&mut odom_rng, p.odometry_sigma_xy),
            d.theta + gaussian(&mut odom_rng, p.odometry_sigma_theta),
        );
        state.user = step_user(&state.user, &next, &p.robot, &p.user_motion, dt, &mut user_rng);
        state.robot = next;
        current = cmd;
        k += 1;
    }
    finish(trace)
}
