use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wayfinder::geometry::{normalize_angle, Pose2D, Vec2};
use wayfinder::perception::{estimate_user_pose, user_boundary_polygon, EstimatorConfig, ReachBox};
use wayfinder::rng::{stream, StreamName};
use wayfinder::world::{camera_mount, render_torso, CameraConfig, Cell, OccupancyGrid, UserState};

pub fn open_grid() -> OccupancyGrid {
    OccupancyGrid::new(200, 200, 0.05, Pose2D::new(-5.0, -5.0, 0.0), Cell::Free).unwrap()
}

/// User placed at camera-frame (x, y) with torso rotation `phi`, camera at the origin looking along +x.
pub fn user_at(x: f64, y: f64, phi: f64) -> (Pose2D, UserState) {
    let cam = camera_mount(Vec2::ZERO, 0.0);
    let world = cam.transform_point(Vec2::new(x, y));
    // facing back toward the camera, rotated by phi
    let user = UserState::new(Pose2D::from_position(world, PI + phi), 0.45).unwrap();
    (cam, user)
}

/// Max absolute errors over `n` noiseless render/estimate round trips: x, y, phi and boundary area.
pub fn round_trip_errors(n: usize, seed: u64) -> (f64, f64, f64, f64) {
    let cam = CameraConfig { depth_noise_sigma: 0.0, ..Default::default() };
    let grid = open_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = stream(seed, StreamName::Depth);
    let reach = ReachBox::default();
    let (mut ex, mut ey, mut ep, mut ea) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n {
        let y = rng.random_range(1.0..3.0);
        let x = rng.random_range(-0.5..0.5) * y;
        let phi = rng.random_range(-0.6..0.6);
        let (pose, user) = user_at(x, y, phi);
        let obs = render_torso(&cam, &pose, &user, &grid, &mut noise);
        let est = estimate_user_pose(&obs, &EstimatorConfig::default()).unwrap();
        ex = ex.max((est.x_cam - x).abs());
        ey = ey.max((est.y_cam - y).abs());
        ep = ep.max(normalize_angle(est.phi - phi).abs());
        let poly = user_boundary_polygon(&est, &reach, &Pose2D::new(0.2, -0.1, 1.0));
        ea = ea.max((poly.area() - reach.depth() * reach.width()).abs());
    }
    (ex, ey, ep, ea)
}
