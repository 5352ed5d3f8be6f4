use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Cell, OccupancyGrid, RayCells, WorldError};
use crate::geometry::Pose2D;
use crate::rng::gaussian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LidarSpec {
    pub n_beams: usize,
    pub angle_min: f64,
    pub angle_max: f64,
    pub max_range: f64,
    pub range_sigma: f64,
}

impl Default for LidarSpec {
    fn default() -> Self {
        let n = 180;
        let step = 2.0 * std::f64::consts::PI / n as f64;
        Self {
            n_beams: n,
            angle_min: -std::f64::consts::PI,
            angle_max: std::f64::consts::PI - step,
            max_range: 8.0,
            range_sigma: 0.01,
        }
    }
}

impl LidarSpec {
    /// Beam angle in the sensor frame.
    pub fn beam_angle(&self, i: usize) -> f64 {
        beam_angle(self.n_beams, self.angle_min, self.angle_max, i)
    }
}

fn beam_angle(n: usize, angle_min: f64, angle_max: f64, i: usize) -> f64 {
    if n <= 1 {
        angle_min
    } else {
        angle_min + (angle_max - angle_min) * i as f64 / (n - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarScan {
    pub n_beams: usize,
    pub angle_min: f64,
    pub angle_max: f64,
    pub max_range: f64,
    pub ranges: Vec<f64>,
}

impl LidarScan {
    pub fn beam_angle(&self, i: usize) -> f64 {
        beam_angle(self.n_beams, self.angle_min, self.angle_max, i)
    }

    pub fn empty(max_range: f64) -> Self {
        Self {
            n_beams: 0,
            angle_min: 0.0,
            angle_max: 0.0,
            max_range,
            ranges: Vec::new(),
        }
    }
}

/// Distance to the first occupied cell along each beam, capped at the maximum range.
pub fn cast_lidar<R: Rng + ?Sized>(
    grid: &OccupancyGrid,
    sensor_pose: &Pose2D,
    spec: &LidarSpec,
    noise: &mut R,
) -> Result<LidarScan, WorldError> {
    let origin = sensor_pose.position();
    if grid.cell_at(origin) != Cell::Free {
        return Err(WorldError::SensorInsideObstacle {
            x: origin.x,
            y: origin.y,
        });
    }
    let mut ranges = Vec::with_capacity(spec.n_beams);
    for i in 0..spec.n_beams {
        let angle = sensor_pose.theta + spec.beam_angle(i);
        let hit = RayCells::new(grid.geometry(), origin, angle, spec.max_range)
            .find(|c| grid.get(c.ix, c.iy) == Cell::Occupied)
            .map(|c| c.t_enter);
        let range = match hit {
            Some(t) if t < spec.max_range => {
                let noisy = t + gaussian(noise, spec.range_sigma);
                noisy.clamp(1e-6, spec.max_range)
            }
            _ => spec.max_range,
        };
        ranges.push(range);
    }
    Ok(LidarScan {
        n_beams: spec.n_beams,
        angle_min: spec.angle_min,
        angle_max: spec.angle_max,
        max_range: spec.max_range,
        ranges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamName};
    use proptest::prelude::*;

    fn noiseless() -> LidarSpec {
        LidarSpec {
            range_sigma: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn empty_map_reads_max_range() {
        let g = OccupancyGrid::new(200, 200, 0.1, Pose2D::identity(), Cell::Free).unwrap();
        let mut rng = stream(0, StreamName::Lidar);
        let scan = cast_lidar(&g, &Pose2D::new(10.0, 10.0, 0.2), &noiseless(), &mut rng).unwrap();
        assert_eq!(scan.ranges.len(), 180);
        assert!(scan.ranges.iter().all(|r| *r == 8.0));
    }

    #[test]
    fn wall_ahead_analytic() {
        let res = 0.1;
        let mut g = OccupancyGrid::new(100, 40, res, Pose2D::identity(), Cell::Free).unwrap();
        // wall face at x = 4.0, sensor at x = 1.0
        for iy in 0..40 {
            g.set(40, iy, Cell::Occupied);
        }
        let spec = LidarSpec {
            n_beams: 1,
            angle_min: 0.0,
            angle_max: 0.0,
            ..noiseless()
        };
        let mut rng = stream(0, StreamName::Lidar);
        let scan = cast_lidar(&g, &Pose2D::new(1.0, 2.0, 0.0), &spec, &mut rng).unwrap();
        assert!((scan.ranges[0] - 3.0).abs() <= res, "{}", scan.ranges[0]);
        // Oblique beam: face at x=4.0, distance 3.0/cos(angle).
        let angle: f64 = 0.3;
        let scan = cast_lidar(&g, &Pose2D::new(1.0, 2.0, angle), &spec, &mut rng).unwrap();
        assert!((scan.ranges[0] - 3.0 / angle.cos()).abs() <= res);
    }

    #[test]
    fn sensor_inside_wall_is_error() {
        let mut g = OccupancyGrid::new(10, 10, 0.1, Pose2D::identity(), Cell::Free).unwrap();
        g.set(5, 5, Cell::Occupied);
        let mut rng = stream(0, StreamName::Lidar);
        let err = cast_lidar(&g, &Pose2D::new(0.55, 0.55, 0.0), &noiseless(), &mut rng).unwrap_err();
        assert!(matches!(err, WorldError::SensorInsideObstacle { .. }));
    }

    #[test]
    fn noisy_ranges_stay_in_bounds() {
        let mut g = OccupancyGrid::new(30, 30, 0.1, Pose2D::identity(), Cell::Free).unwrap();
        for i in 0..30 {
            g.set(i, 0, Cell::Occupied);
            g.set(0, i, Cell::Occupied);
        }
        let spec = LidarSpec { range_sigma: 0.5, ..Default::default() };
        let mut rng = stream(4, StreamName::Lidar);
        let scan = cast_lidar(&g, &Pose2D::new(0.15, 0.15, 0.0), &spec, &mut rng).unwrap();
        assert!(scan.ranges.iter().all(|r| *r > 0.0 && *r <= spec.max_range));
    }

    proptest! {
        #[test]
        fn inserting_obstacles_never_lengthens_beams(seed in any::<u64>(), extra in proptest::collection::vec((0i64..40, 0i64..40), 1..20)) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut g = OccupancyGrid::new(40, 40, 0.1, Pose2D::identity(), Cell::Free).unwrap();
            for _ in 0..60 {
                let (x, y) = (rng.random_range(0..40), rng.random_range(0..40));
                g.set(x, y, Cell::Occupied);
            }
            let pose = Pose2D::new(2.05, 2.05, 0.1);
            g.set(20, 20, Cell::Free);
            let mut n = stream(0, StreamName::Lidar);
            let before = cast_lidar(&g, &pose, &noiseless(), &mut n).unwrap();
            for (x, y) in extra {
                if (x, y) != (20, 20) {
                    g.set(x, y, Cell::Occupied);
                }
            }
            let after = cast_lidar(&g, &pose, &noiseless(), &mut n).unwrap();
            for (a, b) in after.ranges.iter().zip(&before.ranges) {
                prop_assert!(a <= b);
            }
        }
    }
}
