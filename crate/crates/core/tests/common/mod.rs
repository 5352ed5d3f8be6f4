#![allow(dead_code)]

pub mod perception;
pub mod planning;

use std::path::PathBuf;

use wayfinder::geometry::{Pose2D, Twist2D};
use wayfinder::harness::lattice_poses;
use wayfinder::localization::{
    build_likelihood_field, build_map, estimate_pose, mcl_step, LocalizationError, LogOddsParams, MclConfig,
    ParticleSet,
};
use wayfinder::rng::{gaussian, stream, StreamName};
use wayfinder::world::{cast_lidar, parse_map, step_robot, LidarSpec, MapFile};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn load_fixture_map(rel: &str) -> MapFile {
    parse_map(&std::fs::read_to_string(fixture(rel)).unwrap()).unwrap()
}

/// Scripted 50-step loop through the room: east, turn left, north.
pub fn mcl_trajectory() -> Vec<Twist2D> {
    let mut cmds = vec![Twist2D::new(2.0, 0.0); 20];
    cmds.extend(vec![Twist2D::new(1.0, std::f64::consts::FRAC_PI_2); 10]);
    cmds.extend(vec![Twist2D::new(2.0, 0.0); 20]);
    cmds
}

pub struct MclTrial {
    pub final_error: f64,
    pub degenerate_events: usize,
}

pub const MCL_FIELD_SIGMA: f64 = 0.3;
pub const MCL_FIELD_P_RAND: f64 = 0.3;

/// One localization run on the fixture room. `uniform` selects global
/// initialization; otherwise every particle starts at the true pose.
pub fn mcl_trial(seed: u64, particles: usize, uniform: bool, cfg: &MclConfig) -> MclTrial {
    let truth = load_fixture_map("maps/mcl_room.map").grid;
    let spec = LidarSpec::default();
    let mut mapping = stream(seed, StreamName::Mapping);
    let poses = lattice_poses(&truth, 1.0, 0.3);
    let map = build_map(&truth, &poses, &spec, &Pose2D::identity(), LogOddsParams::default(), &mut mapping).unwrap();
    let field = build_likelihood_field(&map, MCL_FIELD_SIGMA, MCL_FIELD_P_RAND).unwrap();
    let mut mcl = stream(seed, StreamName::Mcl);
    let mut lidar = stream(seed, StreamName::Lidar);
    let mut odom = stream(seed, StreamName::Odometry);
    let mut pose = Pose2D::new(2.0, 2.0, 0.0);
    let mut ps = if uniform {
        ParticleSet::uniform(particles, &map, &mut mcl).unwrap()
    } else {
        ParticleSet::at_pose(particles, pose).unwrap()
    };
    let mut degenerate_events = 0;
    let dt = 0.1;
    for cmd in mcl_trajectory() {
        let next = step_robot(&pose, &cmd, dt);
        let d = pose.relative(&next);
        let noisy = Pose2D::new(
            d.x + gaussian(&mut odom, 0.01),
            d.y + gaussian(&mut odom, 0.01),
            d.theta + gaussian(&mut odom, 0.01),
        );
        pose = next;
        let scan = cast_lidar(&truth, &pose, &spec, &mut lidar).unwrap();
        ps = match mcl_step(&ps, &noisy, Some(&scan), &field, &map, &Pose2D::identity(), cfg, &mut mcl) {
            Ok(p) => p,
            Err(LocalizationError::DegenerateBelief { reinitialized }) => {
                degenerate_events += 1;
                reinitialized
            }
            Err(e) => panic!("{e}"),
        };
    }
    MclTrial {
        final_error: estimate_pose(&ps).distance(&pose),
        degenerate_events,
    }
}
